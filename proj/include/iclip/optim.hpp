#ifndef ICLIP_OPTIM_HPP
#define ICLIP_OPTIM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iclip/tensor.hpp"

namespace iclip {

/// Cosine-annealing schedule with a linear warmup ramp. The warmup covers the
/// first warmup_fraction of total_steps, starting from lr = 0; decay ends at
/// min_lr_fraction * base_lr.
struct LrSchedule {
  double base_lr = 5e-4;
  long total_steps = 1;
  double warmup_fraction = 0.2;
  double min_lr_fraction = 0.01;

  double at(long step) const;
};

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct ParamGroup {
  std::vector<Tensor> params;
  double base_lr = 5e-4;
};

/// AdamW with decoupled weight decay and bias-corrected moments. Learning
/// rates are supplied per step as one value per group (the shared schedule
/// shape applied to each group's base rate).
class AdamW {
 public:
  AdamW(std::vector<ParamGroup> groups, AdamWOptions opts = {});

  void zero_grad();
  void step(std::span<const double> group_lrs);
  long step_count() const { return step_count_; }
  const std::vector<ParamGroup>& groups() const { return groups_; }

 private:
  std::vector<ParamGroup> groups_;
  AdamWOptions opts_;
  long step_count_ = 0;
  // first/second moments, flattened per group then per parameter
  std::vector<std::vector<std::vector<double>>> m_, v_;
};

}  // namespace iclip

#endif  // ICLIP_OPTIM_HPP
