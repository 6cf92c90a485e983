#ifndef ICLIP_GRADCHECK_HPP
#define ICLIP_GRADCHECK_HPP

#include <functional>
#include <string>
#include <vector>

#include "iclip/tensor.hpp"

namespace iclip {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

/// Compares reverse-mode gradients of loss_fn against central finite
/// differences over every entry of every listed parameter. loss_fn must be
/// deterministic and rebuild its graph on each call. Relative error uses
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
///
/// corrupt_delta, when nonzero, is added to the first analytic gradient entry
/// after backward; it exists as a negative-control hook for the checker
/// itself.
GradCheckReport finite_diff_check(const std::function<Tensor()>& loss_fn,
                                  const std::vector<NamedParam>& params,
                                  double eps = 1e-5,
                                  double corrupt_delta = 0.0);

}  // namespace iclip

#endif  // ICLIP_GRADCHECK_HPP
