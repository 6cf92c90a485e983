#include <doctest.h>

#include <cmath>
#include <random>

#include "iclip/gradcheck.hpp"
#include "iclip/tensor.hpp"

using namespace iclip;

namespace {

Tensor random_tensor(std::mt19937_64& rng, Shape shape, bool rg = true) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> vals(n);
  for (auto& v : vals) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(vals), rg);
}

double gradcheck_max_err(const std::function<Tensor()>& fn,
                         std::vector<Tensor> params) {
  std::vector<NamedParam> named;
  for (std::size_t i = 0; i < params.size(); ++i)
    named.push_back({"p" + std::to_string(i), params[i]});
  return finite_diff_check(fn, named).max_rel_err;
}

}  // namespace

TEST_CASE("softmax basics") {
  auto p = softmax_values({0.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

  auto q = softmax_values({std::log(2.0), 0.0});
  CHECK(q[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS(softmax_values({}));
  CHECK_THROWS(softmax_values({std::nan("")}));
}

TEST_CASE("softmax properties: sums to one, shift invariant") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist(0.0, 3.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(5);
    for (auto& x : v) x = dist(rng);
    auto p = softmax_values(v);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x > 0.0);
      sum += x;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
    const double c = shift(rng);
    auto w = v;
    for (auto& x : w) x += c;
    auto q = softmax_values(w);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-9));
  }
}

TEST_CASE("l2 normalize") {
  auto u = l2_normalize_values({3.0, 4.0});
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  auto again = l2_normalize_values(u);
  CHECK(again[0] == doctest::Approx(u[0]).epsilon(1e-12));
  CHECK_THROWS_WITH(l2_normalize_values({0.0, 0.0}),
                    "degenerate projection feature");
}

TEST_CASE("backward: x^2 at x=3") {
  Tensor x = Tensor::scalar(3.0, true);
  Tensor y = mul(x, x);
  x.zero_grad();
  backward(y);
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("backward: sum(A x) gives column sums of A") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor x = Tensor::from({3, 1}, {0.5, -1.0, 2.0}, true);
  x.zero_grad();
  backward(sum(matmul(a, x)));
  CHECK(x.grad()[0] == doctest::Approx(5.0));
  CHECK(x.grad()[1] == doctest::Approx(7.0));
  CHECK(x.grad()[2] == doctest::Approx(9.0));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tensor x = Tensor::from({2}, {1.0, 2.0}, true);
  CHECK_THROWS(backward(x));
}

TEST_CASE("finite_diff_check: quadratic sanity") {
  Tensor x = Tensor::scalar(1.0, true);
  auto err = gradcheck_max_err([&]() { return mul(x, x); }, {x});
  CHECK(err < 1e-8);
}

TEST_CASE("finite_diff_check: frozen params excluded") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor frozen = Tensor::scalar(3.0, false);
  std::vector<NamedParam> named = {{"x", x}, {"frozen", frozen}};
  auto report = finite_diff_check(
      [&]() { return mul(x, scale(x, frozen.value())); }, named);
  CHECK(report.max_rel_err < 1e-8);
  CHECK(report.worst_param != "frozen");
}

TEST_CASE("finite_diff_check: negative control fails") {
  Tensor x = Tensor::scalar(1.0, true);
  auto report = finite_diff_check([&]() { return mul(x, x); },
                                  {{"x", x}}, 1e-5, /*corrupt_delta=*/1.0);
  CHECK(report.max_rel_err > 1e-2);
}

TEST_CASE("gradient correctness per op, randomized") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = random_tensor(rng, {3, 4});
    Tensor b = random_tensor(rng, {4, 2});
    Tensor c = random_tensor(rng, {3, 4});
    Tensor g = random_tensor(rng, {4});
    Tensor bias = random_tensor(rng, {4});
    Tensor s = random_tensor(rng, {1});

    CHECK(gradcheck_max_err([&]() { return sum(matmul(a, b)); }, {a, b}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(matmul(a, c, true, false)); }, {a, c}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(matmul(a, c, false, true)); }, {a, c}) < 1e-4);
    CHECK(gradcheck_max_err([&]() { return mean(mul(a, c)); }, {a, c}) < 1e-4);
    CHECK(gradcheck_max_err([&]() { return sum(add(a, c)); }, {a, c}) < 1e-4);
    CHECK(gradcheck_max_err([&]() { return sum(add(a, g)); }, {a, g}) < 1e-4);
    CHECK(gradcheck_max_err([&]() { return sum(tanh_op(a)); }, {a}) < 1e-4);
    CHECK(gradcheck_max_err([&]() { return sum(gelu(a)); }, {a}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(mul(softmax_rows(a), c)); }, {a}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(layernorm_rows(a, g, bias)); },
              {a, g, bias}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(mul(layernorm_rows(a, g, bias), c)); },
              {a, g, bias}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(mul(l2_normalize_rows(a), c)); }, {a}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(slice_rows(concat_rows(a, c), 1, 4)); },
              {a, c}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return sum(slice_cols(concat_cols(a, c), 2, 6)); },
              {a, c}) < 1e-4);
    CHECK(gradcheck_max_err([&]() { return sum(scale_by(a, s)); }, {a, s}) <
          1e-4);
    CHECK(gradcheck_max_err(
              [&]() {
                return sum(log_op(clamp(softmax_rows(a), 1e-7, 1.0 - 1e-7)));
              },
              {a}) < 1e-4);
    CHECK(gradcheck_max_err(
              [&]() { return mean(gather_rows(a, {0, 2, 0})); }, {a}) < 1e-4);
  }
}

TEST_CASE("randomized composite graph matches finite differences") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor w1 = random_tensor(rng, {4, 4});
    Tensor w2 = random_tensor(rng, {4, 4});
    Tensor g = random_tensor(rng, {4});
    Tensor b = random_tensor(rng, {4});
    Tensor x = random_tensor(rng, {3, 4}, false);
    auto fn = [&]() {
      Tensor h = tanh_op(matmul(x, w1));
      Tensor n = layernorm_rows(h, g, b);
      Tensor s = softmax_rows(matmul(n, w2, false, true));
      Tensor joined = concat_rows(slice_rows(s, 0, 2), slice_rows(n, 1, 3));
      return mean(mul(joined, joined));
    };
    CHECK(gradcheck_max_err(fn, {w1, w2, g, b}) < 1e-4);
  }
}

TEST_CASE("non-finite values are rejected") {
  CHECK_THROWS(Tensor::from({2}, {1.0, std::nan("")}));
  Tensor big = Tensor::from({1}, {1e308}, true);
  CHECK_THROWS(mul(big, big));  // overflow to inf inside an op
}

TEST_CASE("unreachable trainables keep zero grad after backward") {
  Tensor used = Tensor::scalar(2.0, true);
  Tensor unused = Tensor::scalar(5.0, true);
  used.zero_grad();
  unused.zero_grad();
  backward(mul(used, used));
  CHECK(used.grad()[0] == doctest::Approx(4.0));
  CHECK(unused.grad()[0] == 0.0);
}
