#ifndef ICLIP_TENSOR_HPP
#define ICLIP_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace iclip {

using Shape = std::vector<std::size_t>;

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::size_t size() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

/// Shared handle to a node in the computation tape. Copies alias the same
/// storage; tensors without gradient tracking are immutable by convention.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->data.size(); }
  std::size_t ndim() const { return node_->shape.size(); }

  // 1-D tensors are treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::vector<double>& data() { return node_->data; }
  const std::vector<double>& data() const { return node_->data; }
  std::vector<double>& grad() { node_->ensure_grad(); return node_->grad; }
  const std::vector<double>& grad() const;
  bool has_grad() const { return node_->grad.size() == node_->data.size(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool rg) { node_->requires_grad = rg; }

  double value() const;  // scalar tensors only
  double at(std::size_t r, std::size_t c) const;

  void zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

  detail::TensorNode* node() const { return node_.get(); }

  friend Tensor make_op(Shape shape, std::vector<double> values,
                        std::vector<Tensor> parents,
                        std::function<void(detail::TensorNode&)> backward_fn);

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::TensorNode> node_;
};

/// Runs reverse-mode accumulation from a scalar loss. Gradients are added
/// into .grad() of every requires_grad tensor reachable from the loss;
/// callers zero parameter gradients beforehand.
void backward(const Tensor& loss);

// ---- differentiable operations -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false,
              bool trans_b = false);
Tensor add(const Tensor& a, const Tensor& b);  // same shape, or b a broadcast row
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor affine(const Tensor& a, double mul, double add);  // mul*x + add
Tensor scale(const Tensor& a, double s);
Tensor scale_by(const Tensor& a, const Tensor& s);  // s is a scalar tensor
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor stack_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor row(const Tensor& a, std::size_t i);
Tensor gather_rows(const Tensor& table, const std::vector<int>& indices);
Tensor tanh_op(const Tensor& a);
Tensor gelu(const Tensor& a);  // exact erf form
Tensor log_op(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor softmax_rows(const Tensor& a);
Tensor layernorm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias,
                      double eps = 1e-5);
Tensor l2_normalize_rows(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// ---- plain numeric helpers (no tape) -------------------------------------

/// Stable softmax over a vector; output sums to 1 within 1e-12 in 64-bit.
std::vector<double> softmax_values(const std::vector<double>& v);

/// Unit-normalizes a vector; throws on near-zero norm (< 1e-12).
std::vector<double> l2_normalize_values(const std::vector<double>& v);

void check_finite(const std::vector<double>& values, const char* where);

}  // namespace iclip

#endif  // ICLIP_TENSOR_HPP
