#include <doctest.h>

#include <cmath>
#include <vector>

#include "iclip/optim.hpp"

using namespace iclip;

TEST_CASE("schedule: warmup endpoints and decay floor") {
  LrSchedule sched{5e-4, 100, 0.2, 0.01};
  CHECK(sched.at(0) == 0.0);
  CHECK(sched.at(10) == doctest::Approx(2.5e-4).epsilon(1e-12));
  CHECK(sched.at(20) == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(sched.at(100) == doctest::Approx(5e-6).epsilon(1e-9));
  // halfway through decay the cosine sits at its midpoint
  CHECK(sched.at(60) ==
        doctest::Approx(5e-6 + (5e-4 - 5e-6) * 0.5).epsilon(1e-12));
}

TEST_CASE("schedule: continuous across the warmup boundary, then decreasing") {
  LrSchedule sched{1e-3, 1000, 0.2, 0.01};
  CHECK(std::fabs(sched.at(200) - sched.at(199)) < 2e-5);
  CHECK(std::fabs(sched.at(201) - sched.at(200)) < 2e-5);
  double prev = sched.at(200);
  for (long s = 201; s <= 1000; s += 7) {
    const double cur = sched.at(s);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("schedule: rejects out-of-range steps and bad parameters") {
  LrSchedule sched{5e-4, 100};
  CHECK_THROWS_AS(sched.at(-1), std::out_of_range);
  CHECK_THROWS_AS(sched.at(101), std::out_of_range);
  CHECK_THROWS_AS((LrSchedule{0.0, 100}.at(0)), std::invalid_argument);
  CHECK_THROWS_AS((LrSchedule{5e-4, 0}.at(0)), std::invalid_argument);
}

TEST_CASE("adamw: two steps match a hand-rolled scalar recurrence") {
  AdamWOptions opts;  // beta 0.9/0.999, eps 1e-8, wd 0.01
  const double lr = 0.1;
  const std::vector<double> grads = {0.5, -0.25};

  Tensor x = Tensor::scalar(1.0, true);
  AdamW opt({{{x}, lr}}, opts);

  // independent recurrence, written out rather than shared with the optimizer
  double ref = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    const double g = grads[t - 1];
    x.zero_grad();
    x.grad()[0] = g;
    opt.step(std::vector<double>{lr});

    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    ref -= lr * 0.01 * ref;
    ref -= lr * mhat / (std::sqrt(vhat) + 1e-8);

    CHECK(x.data()[0] == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK(opt.step_count() == 2);
}

TEST_CASE("adamw: first step moves by ~lr in the gradient direction") {
  AdamWOptions opts;
  opts.weight_decay = 0.0;
  Tensor x = Tensor::from({2}, {3.0, -2.0}, true);
  AdamW opt({{{x}, 0.05}}, opts);
  x.zero_grad();
  x.grad() = {0.7, -0.4};
  opt.step(std::vector<double>{0.05});
  CHECK(x.data()[0] == doctest::Approx(3.0 - 0.05).epsilon(1e-6));
  CHECK(x.data()[1] == doctest::Approx(-2.0 + 0.05).epsilon(1e-6));
}

TEST_CASE("adamw: zero gradient leaves only the decay term") {
  Tensor x = Tensor::scalar(4.0, true);
  AdamW opt({{{x}, 0.1}});
  for (int t = 0; t < 2; ++t) {
    x.zero_grad();
    opt.step(std::vector<double>{0.1});
  }
  CHECK(x.data()[0] ==
        doctest::Approx(4.0 * (1.0 - 0.1 * 0.01) * (1.0 - 0.1 * 0.01))
            .epsilon(1e-14));
}

TEST_CASE("adamw: lr = 0 is the identity") {
  Tensor x = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
  AdamW opt({{{x}, 0.0}});
  x.zero_grad();
  x.grad() = {10.0, -3.0, 0.1};
  opt.step(std::vector<double>{0.0});
  CHECK(x.data()[0] == 1.0);
  CHECK(x.data()[1] == -2.0);
  CHECK(x.data()[2] == 0.5);
}

TEST_CASE("adamw: per-group learning rates apply independently") {
  AdamWOptions opts;
  opts.weight_decay = 0.0;
  Tensor a = Tensor::scalar(0.0, true);
  Tensor b = Tensor::scalar(0.0, true);
  AdamW opt({{{a}, 5e-4}, {{b}, 1e-4}}, opts);
  a.zero_grad();
  b.zero_grad();
  a.grad()[0] = 1.0;
  b.grad()[0] = 1.0;
  opt.step(std::vector<double>{5e-4, 1e-4});
  CHECK(a.data()[0] == doctest::Approx(-5e-4).epsilon(1e-6));
  CHECK(b.data()[0] == doctest::Approx(-1e-4).epsilon(1e-6));
}

TEST_CASE("adamw: zero_grad clears every group") {
  Tensor a = Tensor::from({2}, {1.0, 2.0}, true);
  Tensor b = Tensor::scalar(3.0, true);
  AdamW opt({{{a}, 1e-3}, {{b}, 1e-3}});
  a.grad() = {5.0, 6.0};
  b.grad()[0] = 7.0;
  opt.zero_grad();
  CHECK(a.grad()[0] == 0.0);
  CHECK(a.grad()[1] == 0.0);
  CHECK(b.grad()[0] == 0.0);
}

TEST_CASE("adamw: step validates its inputs") {
  Tensor x = Tensor::scalar(1.0, true);
  AdamW opt({{{x}, 1e-3}});
  x.zero_grad();
  CHECK_THROWS_AS(opt.step(std::vector<double>{1e-3, 1e-3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(opt.step(std::vector<double>{-1e-3}), std::invalid_argument);
}
