#ifndef ICLIP_CHECKPOINT_HPP
#define ICLIP_CHECKPOINT_HPP

#include <memory>
#include <string>

#include "iclip/model.hpp"

namespace iclip {

/// Checkpoint layout: <dir>/manifest.json (config, flags, parameter table
/// with byte offsets) plus <dir>/params.bin, little-endian float32 values in
/// manifest order.
void save_checkpoint(const std::string& dir, const InterClipModel& model);

std::unique_ptr<InterClipModel> load_checkpoint(const std::string& dir);

}  // namespace iclip

#endif  // ICLIP_CHECKPOINT_HPP
