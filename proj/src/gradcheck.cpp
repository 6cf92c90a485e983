#include "iclip/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iclip {

GradCheckReport finite_diff_check(const std::function<Tensor()>& loss_fn,
                                  const std::vector<NamedParam>& params,
                                  double eps, double corrupt_delta) {
  if (eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps <= 0");

  // Frozen parameters are excluded from the report.
  std::vector<NamedParam> checked;
  for (const auto& p : params)
    if (p.tensor.requires_grad()) checked.push_back(p);

  for (const auto& p : checked)
    p.tensor.node()->grad.assign(p.tensor.size(), 0.0);
  Tensor loss = loss_fn();
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(checked.size());
  for (const auto& p : checked) analytic.push_back(p.tensor.grad());
  if (corrupt_delta != 0.0 && !analytic.empty() && !analytic[0].empty())
    analytic[0][0] += corrupt_delta;

  GradCheckReport report;
  for (std::size_t pi = 0; pi < checked.size(); ++pi) {
    auto& data = checked[pi].tensor.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + eps;
      const double up = loss_fn().value();
      data[i] = saved - eps;
      const double down = loss_fn().value();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi][i];
      // The floor makes this a mixed relative/absolute comparison: central
      // differences in float64 carry ~1e-11 absolute noise, so a pure ratio
      // is meaningless for near-zero gradients.
      const double denom =
          std::max({std::fabs(a), std::fabs(numeric), 1e-6});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = checked[pi].name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace iclip
