#include "iclip/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace iclip {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::pair<std::size_t, std::size_t> as_matrix(const Tensor& t) {
  return {t.rows(), t.cols()};
}

ConstMatMap map_of(const Tensor& t) {
  return ConstMatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

MatMap map_of_grad(detail::TensorNode& n, std::size_t r, std::size_t c) {
  n.ensure_grad();
  return MatMap(n.grad.data(), static_cast<Eigen::Index>(r),
                static_cast<Eigen::Index>(c));
}

}  // namespace

void check_finite(const std::vector<double>& values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite value in " + std::string(where));
  }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = std::make_shared<detail::TensorNode>();
  n->shape = std::move(shape);
  n->data.assign(shape_numel(n->shape), 0.0);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto n = std::make_shared<detail::TensorNode>();
  n->shape = std::move(shape);
  n->data.assign(shape_numel(n->shape), value);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw std::invalid_argument("Tensor::from: shape/data size mismatch");
  check_finite(values, "Tensor::from");
  auto n = std::make_shared<detail::TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

std::size_t Tensor::rows() const {
  return node_->shape.size() >= 2 ? node_->shape[0] : 1;
}

std::size_t Tensor::cols() const {
  const auto& s = node_->shape;
  if (s.empty()) return 1;
  return s.size() >= 2 ? s[1] : s[0];
}

const std::vector<double>& Tensor::grad() const {
  if (node_->grad.size() != node_->data.size())
    throw std::runtime_error("gradient not populated");
  return node_->grad;
}

double Tensor::value() const {
  if (size() != 1) throw std::invalid_argument("value() on non-scalar tensor");
  return node_->data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return node_->data[r * cols() + c];
}

Tensor make_op(Shape shape, std::vector<double> values,
               std::vector<Tensor> parents,
               std::function<void(detail::TensorNode&)> backward_fn) {
  check_finite(values, "op result");
  auto n = std::make_shared<detail::TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(values);
  for (auto& p : parents) {
    if (p.node()->requires_grad) n->requires_grad = true;
  }
  if (n->requires_grad) {
    for (auto& p : parents) n->parents.push_back(p.node_);
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(n));
}

void backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar");
  if (!loss.node()->requires_grad) return;

  // Iterative post-order topological sort.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  std::vector<std::pair<detail::TensorNode*, std::size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  visited.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      detail::TensorNode* p = node->parents[idx++].get();
      if (p->requires_grad && visited.insert(p).second)
        stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

// ---- ops -----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  auto [ar, ac] = as_matrix(a);
  auto [br, bc] = as_matrix(b);
  const std::size_t m = trans_a ? ac : ar;
  const std::size_t k = trans_a ? ar : ac;
  const std::size_t kb = trans_b ? bc : br;
  const std::size_t n = trans_b ? br : bc;
  require(k == kb, "matmul: inner dimension mismatch");

  std::vector<double> out(m * n);
  {
    MatMap c(out.data(), static_cast<Eigen::Index>(m),
             static_cast<Eigen::Index>(n));
    auto A = map_of(a);
    auto B = map_of(b);
    if (!trans_a && !trans_b) c.noalias() = A * B;
    else if (trans_a && !trans_b) c.noalias() = A.transpose() * B;
    else if (!trans_a && trans_b) c.noalias() = A * B.transpose();
    else c.noalias() = A.transpose() * B.transpose();
  }
  return make_op(
      {m, n}, std::move(out), {a, b},
      [a, b, trans_a, trans_b, m, n](detail::TensorNode& self) {
        ConstMatMap g(self.grad.data(), static_cast<Eigen::Index>(m),
                      static_cast<Eigen::Index>(n));
        auto A = map_of(a);
        auto B = map_of(b);
        if (a.requires_grad()) {
          auto da = map_of_grad(*a.node(), a.rows(), a.cols());
          if (!trans_a && !trans_b) da.noalias() += g * B.transpose();
          else if (!trans_a && trans_b) da.noalias() += g * B;
          else if (trans_a && !trans_b) da.noalias() += B * g.transpose();
          else da.noalias() += B.transpose() * g.transpose();
        }
        if (b.requires_grad()) {
          auto db = map_of_grad(*b.node(), b.rows(), b.cols());
          if (!trans_a && !trans_b) db.noalias() += A.transpose() * g;
          else if (trans_a && !trans_b) db.noalias() += A * g;
          else if (!trans_a && trans_b) db.noalias() += g.transpose() * A;
          else db.noalias() += g.transpose() * A.transpose();
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape() || a.size() == b.size()) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = a.data()[i] + b.data()[i];
    return make_op(a.shape(), std::move(out), {a, b},
                   [a, b](detail::TensorNode& self) {
                     if (a.requires_grad()) {
                       a.node()->ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         a.node()->grad[i] += self.grad[i];
                     }
                     if (b.requires_grad()) {
                       b.node()->ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         b.node()->grad[i] += self.grad[i];
                     }
                   });
  }
  // broadcast: b is a row vector applied to every row of a
  require(b.rows() == 1 && b.cols() == a.cols(),
          "add: incompatible shapes for row broadcast");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out[i * c + j] = a.data()[i * c + j] + b.data()[j];
  return make_op(a.shape(), std::move(out), {a, b},
                 [a, b, r, c](detail::TensorNode& self) {
                   if (a.requires_grad()) {
                     a.node()->ensure_grad();
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       a.node()->grad[i] += self.grad[i];
                   }
                   if (b.requires_grad()) {
                     b.node()->ensure_grad();
                     for (std::size_t i = 0; i < r; ++i)
                       for (std::size_t j = 0; j < c; ++j)
                         b.node()->grad[j] += self.grad[i * c + j];
                   }
                 });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "mul: shape mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.data()[i] * b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b},
                 [a, b](detail::TensorNode& self) {
                   if (a.requires_grad()) {
                     a.node()->ensure_grad();
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       a.node()->grad[i] += self.grad[i] * b.data()[i];
                   }
                   if (b.requires_grad()) {
                     b.node()->ensure_grad();
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       b.node()->grad[i] += self.grad[i] * a.data()[i];
                   }
                 });
}

Tensor affine(const Tensor& a, double m, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m * a.data()[i] + c;
  return make_op(a.shape(), std::move(out), {a},
                 [a, m](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     a.node()->grad[i] += m * self.grad[i];
                 });
}

Tensor scale(const Tensor& a, double s) { return affine(a, s, 0.0); }

Tensor scale_by(const Tensor& a, const Tensor& s) {
  require(s.size() == 1, "scale_by: scale must be a scalar tensor");
  const double sv = s.data()[0];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * a.data()[i];
  return make_op(a.shape(), std::move(out), {a, s},
                 [a, s, sv](detail::TensorNode& self) {
                   if (a.requires_grad()) {
                     a.node()->ensure_grad();
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       a.node()->grad[i] += sv * self.grad[i];
                   }
                   if (s.requires_grad()) {
                     s.node()->ensure_grad();
                     double acc = 0.0;
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       acc += self.grad[i] * a.data()[i];
                     s.node()->grad[0] += acc;
                   }
                 });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  return stack_rows({a, b});
}

Tensor stack_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "stack_rows: empty input");
  const std::size_t c = parts.front().cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require(p.cols() == c, "stack_rows: column mismatch");
    total += p.rows();
  }
  std::vector<double> out;
  out.reserve(total * c);
  for (const auto& p : parts)
    out.insert(out.end(), p.data().begin(), p.data().end());
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_op({total, c}, std::move(out), parents,
                 [parts](detail::TensorNode& self) {
                   std::size_t off = 0;
                   for (const auto& p : parts) {
                     if (p.requires_grad()) {
                       p.node()->ensure_grad();
                       for (std::size_t i = 0; i < p.size(); ++i)
                         p.node()->grad[i] += self.grad[off + i];
                     }
                     off += p.size();
                   }
                 });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "concat_cols: row mismatch");
  const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols();
  std::vector<double> out(r * (ca + cb));
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(a.data().begin() + i * ca, ca, out.begin() + i * (ca + cb));
    std::copy_n(b.data().begin() + i * cb, cb,
                out.begin() + i * (ca + cb) + ca);
  }
  return make_op({r, ca + cb}, std::move(out), {a, b},
                 [a, b, r, ca, cb](detail::TensorNode& self) {
                   const std::size_t c = ca + cb;
                   if (a.requires_grad()) {
                     a.node()->ensure_grad();
                     for (std::size_t i = 0; i < r; ++i)
                       for (std::size_t j = 0; j < ca; ++j)
                         a.node()->grad[i * ca + j] += self.grad[i * c + j];
                   }
                   if (b.requires_grad()) {
                     b.node()->ensure_grad();
                     for (std::size_t i = 0; i < r; ++i)
                       for (std::size_t j = 0; j < cb; ++j)
                         b.node()->grad[i * cb + j] +=
                             self.grad[i * c + ca + j];
                   }
                 });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= a.rows(), "slice_rows: range out of bounds");
  const std::size_t c = a.cols();
  std::vector<double> out(a.data().begin() + begin * c,
                          a.data().begin() + end * c);
  return make_op({end - begin, c}, std::move(out), {a},
                 [a, begin, c](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     a.node()->grad[begin * c + i] += self.grad[i];
                 });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= a.cols(), "slice_cols: range out of bounds");
  const std::size_t r = a.rows(), c = a.cols(), w = end - begin;
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(a.data().begin() + i * c + begin, w, out.begin() + i * w);
  return make_op({r, w}, std::move(out), {a},
                 [a, begin, r, c, w](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < r; ++i)
                     for (std::size_t j = 0; j < w; ++j)
                       a.node()->grad[i * c + begin + j] +=
                           self.grad[i * w + j];
                 });
}

Tensor row(const Tensor& a, std::size_t i) { return slice_rows(a, i, i + 1); }

Tensor gather_rows(const Tensor& table, const std::vector<int>& indices) {
  const std::size_t c = table.cols();
  std::vector<double> out;
  out.reserve(indices.size() * c);
  for (int idx : indices) {
    require(idx >= 0 && static_cast<std::size_t>(idx) < table.rows(),
            "gather_rows: index out of range");
    out.insert(out.end(), table.data().begin() + idx * c,
               table.data().begin() + (idx + 1) * c);
  }
  return make_op({indices.size(), c}, std::move(out), {table},
                 [table, indices, c](detail::TensorNode& self) {
                   if (!table.requires_grad()) return;
                   table.node()->ensure_grad();
                   for (std::size_t i = 0; i < indices.size(); ++i)
                     for (std::size_t j = 0; j < c; ++j)
                       table.node()->grad[indices[i] * c + j] +=
                           self.grad[i * c + j];
                 });
}

Tensor tanh_op(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::tanh(a.data()[i]);
  Tensor r = make_op(a.shape(), std::move(out), {a},
                     [a](detail::TensorNode& self) {
                       if (!a.requires_grad()) return;
                       a.node()->ensure_grad();
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         const double y = self.data[i];
                         a.node()->grad[i] += self.grad[i] * (1.0 - y * y);
                       }
                     });
  return r;
}

Tensor gelu(const Tensor& a) {
  static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  static const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a.data()[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  }
  return make_op(a.shape(), std::move(out), {a},
                 [a](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     const double x = a.data()[i];
                     const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
                     const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
                     a.node()->grad[i] += self.grad[i] * (cdf + x * pdf);
                   }
                 });
}

Tensor log_op(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(a.data()[i] > 0.0, "log: non-positive input");
    out[i] = std::log(a.data()[i]);
  }
  return make_op(a.shape(), std::move(out), {a},
                 [a](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     a.node()->grad[i] += self.grad[i] / a.data()[i];
                 });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::min(hi, std::max(lo, a.data()[i]));
  return make_op(a.shape(), std::move(out), {a},
                 [a, lo, hi](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     const double x = a.data()[i];
                     if (x > lo && x < hi)
                       a.node()->grad[i] += self.grad[i];
                   }
                 });
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  require(c > 0, "softmax: empty rows");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < r; ++i) {
    double mx = a.data()[i * c];
    for (std::size_t j = 1; j < c; ++j)
      mx = std::max(mx, a.data()[i * c + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(a.data()[i * c + j] - mx);
      denom += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= denom;
  }
  return make_op(a.shape(), std::move(out), {a},
                 [a, r, c](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < r; ++i) {
                     double dot = 0.0;
                     for (std::size_t j = 0; j < c; ++j)
                       dot += self.grad[i * c + j] * self.data[i * c + j];
                     for (std::size_t j = 0; j < c; ++j)
                       a.node()->grad[i * c + j] +=
                           self.data[i * c + j] *
                           (self.grad[i * c + j] - dot);
                   }
                 });
}

Tensor layernorm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias,
                      double eps) {
  const std::size_t r = a.rows(), c = a.cols();
  require(gain.size() == c && bias.size() == c,
          "layernorm: gain/bias width mismatch");
  std::vector<double> out(a.size());
  std::vector<double> mu(r), sig(r);
  for (std::size_t i = 0; i < r; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < c; ++j) m += a.data()[i * c + j];
    m /= static_cast<double>(c);
    double v = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = a.data()[i * c + j] - m;
      v += d * d;
    }
    v /= static_cast<double>(c);
    mu[i] = m;
    sig[i] = std::sqrt(v + eps);
    for (std::size_t j = 0; j < c; ++j) {
      const double xhat = (a.data()[i * c + j] - m) / sig[i];
      out[i * c + j] = gain.data()[j] * xhat + bias.data()[j];
    }
  }
  return make_op(
      a.shape(), std::move(out), {a, gain, bias},
      [a, gain, bias, r, c, mu, sig](detail::TensorNode& self) {
        for (std::size_t i = 0; i < r; ++i) {
          const double s = sig[i];
          // xhat recomputed from inputs
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          std::vector<double> dxhat(c), xhat(c);
          for (std::size_t j = 0; j < c; ++j) {
            xhat[j] = (a.data()[i * c + j] - mu[i]) / s;
            dxhat[j] = self.grad[i * c + j] * gain.data()[j];
            sum_dxhat += dxhat[j];
            sum_dxhat_xhat += dxhat[j] * xhat[j];
          }
          if (a.requires_grad()) {
            a.node()->ensure_grad();
            const double n = static_cast<double>(c);
            for (std::size_t j = 0; j < c; ++j)
              a.node()->grad[i * c + j] +=
                  (dxhat[j] - sum_dxhat / n - xhat[j] * sum_dxhat_xhat / n) /
                  s;
          }
          if (gain.requires_grad()) {
            gain.node()->ensure_grad();
            for (std::size_t j = 0; j < c; ++j)
              gain.node()->grad[j] += self.grad[i * c + j] * xhat[j];
          }
          if (bias.requires_grad()) {
            bias.node()->ensure_grad();
            for (std::size_t j = 0; j < c; ++j)
              bias.node()->grad[j] += self.grad[i * c + j];
          }
        }
      });
}

Tensor l2_normalize_rows(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    double n2 = 0.0;
    for (std::size_t j = 0; j < c; ++j)
      n2 += a.data()[i * c + j] * a.data()[i * c + j];
    const double n = std::sqrt(n2);
    if (n <= 1e-12)
      throw std::runtime_error("degenerate projection feature");
    norms[i] = n;
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = a.data()[i * c + j] / n;
  }
  return make_op(a.shape(), std::move(out), {a},
                 [a, r, c, norms](detail::TensorNode& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t i = 0; i < r; ++i) {
                     double dot = 0.0;
                     for (std::size_t j = 0; j < c; ++j)
                       dot += self.grad[i * c + j] * self.data[i * c + j];
                     for (std::size_t j = 0; j < c; ++j)
                       a.node()->grad[i * c + j] +=
                           (self.grad[i * c + j] -
                            self.data[i * c + j] * dot) /
                           norms[i];
                   }
                 });
}

Tensor sum(const Tensor& a) {
  double acc = std::accumulate(a.data().begin(), a.data().end(), 0.0);
  return make_op({1}, {acc}, {a}, [a](detail::TensorNode& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    for (auto& g : a.node()->grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  require(a.size() > 0, "mean: empty tensor");
  const double n = static_cast<double>(a.size());
  double acc = std::accumulate(a.data().begin(), a.data().end(), 0.0) / n;
  return make_op({1}, {acc}, {a}, [a, n](detail::TensorNode& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    for (auto& g : a.node()->grad) g += self.grad[0] / n;
  });
}

// ---- plain helpers -------------------------------------------------------

std::vector<double> softmax_values(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("softmax: empty input");
  check_finite(v, "softmax input");
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    denom += out[i];
  }
  for (auto& x : out) x /= denom;
  return out;
}

std::vector<double> l2_normalize_values(const std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double n = std::sqrt(n2);
  if (n <= 1e-12) throw std::runtime_error("degenerate projection feature");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

}  // namespace iclip
