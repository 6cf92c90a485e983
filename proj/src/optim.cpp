#include "iclip/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace iclip {

double LrSchedule::at(long step) const {
  if (base_lr <= 0.0) throw std::invalid_argument("LrSchedule: base_lr <= 0");
  if (total_steps <= 0)
    throw std::invalid_argument("LrSchedule: total_steps <= 0");
  if (step < 0 || step > total_steps)
    throw std::out_of_range("LrSchedule: step out of [0, total_steps]");
  const double warmup = warmup_fraction * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  if (s <= warmup) return base_lr * (warmup > 0.0 ? s / warmup : 1.0);
  const double min_lr = min_lr_fraction * base_lr;
  const double progress =
      (s - warmup) / (static_cast<double>(total_steps) - warmup);
  return min_lr + (base_lr - min_lr) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

AdamW::AdamW(std::vector<ParamGroup> groups, AdamWOptions opts)
    : groups_(std::move(groups)), opts_(opts) {
  m_.resize(groups_.size());
  v_.resize(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    m_[g].resize(groups_[g].params.size());
    v_[g].resize(groups_[g].params.size());
    for (std::size_t p = 0; p < groups_[g].params.size(); ++p) {
      m_[g][p].assign(groups_[g].params[p].size(), 0.0);
      v_[g][p].assign(groups_[g].params[p].size(), 0.0);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& g : groups_)
    for (auto& p : g.params) p.zero_grad();
}

void AdamW::step(std::span<const double> group_lrs) {
  if (group_lrs.size() != groups_.size())
    throw std::invalid_argument("AdamW::step: one lr per group required");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(opts_.beta2, step_count_);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const double lr = group_lrs[g];
    if (lr < 0.0) throw std::invalid_argument("AdamW::step: negative lr");
    for (std::size_t p = 0; p < groups_[g].params.size(); ++p) {
      Tensor& param = groups_[g].params[p];
      const std::vector<double>& grad = param.grad();
      if (grad.size() != param.size())
        throw std::invalid_argument("AdamW::step: grad/param size mismatch");
      auto& m = m_[g][p];
      auto& v = v_[g][p];
      auto& data = param.data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * grad[i];
        v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        data[i] -= lr * opts_.weight_decay * data[i];  // decoupled decay
        data[i] -= lr * mhat / (std::sqrt(vhat) + opts_.eps);
      }
    }
  }
}

}  // namespace iclip
