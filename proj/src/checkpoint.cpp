#include "iclip/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace iclip {

namespace {

// params.bin is little-endian float32; memcpy is fine on this target.
static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

}  // namespace

void save_checkpoint(const std::string& dir, const InterClipModel& model) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "iclip-ckpt-v1";
  manifest["config"] = nlohmann::json::parse(model_config_to_json(model.config()));
  manifest["with_projection"] = model.with_projection();

  std::ofstream blob(dir + "/params.bin", std::ios::binary);
  if (!blob) throw std::runtime_error("cannot write " + dir + "/params.bin");
  nlohmann::json table = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : model.params()) {
    nlohmann::json entry;
    entry["name"] = p.name;
    entry["shape"] = p.tensor.shape();
    entry["dtype"] = "f32";
    entry["offset"] = offset;
    table.push_back(std::move(entry));
    std::vector<float> values(p.tensor.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = static_cast<float>(p.tensor.data()[i]);
    blob.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(float)));
    offset += values.size() * sizeof(float);
  }
  manifest["params"] = std::move(table);

  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot write " + dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';
}

std::unique_ptr<InterClipModel> load_checkpoint(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot open checkpoint manifest in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.at("format").get<std::string>() != "iclip-ckpt-v1")
    throw std::runtime_error("unsupported checkpoint format");
  ModelConfig cfg = model_config_from_json(manifest.at("config").dump());
  const bool with_projection = manifest.at("with_projection").get<bool>();

  auto model = std::make_unique<InterClipModel>(cfg, /*seed=*/0, with_projection);

  std::ifstream blob(dir + "/params.bin", std::ios::binary);
  if (!blob) throw std::runtime_error("cannot open " + dir + "/params.bin");

  const auto& table = manifest.at("params");
  if (table.size() != model.get()->params().size())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& entry = table[i];
    const auto& p = model->params()[i];
    if (entry.at("name").get<std::string>() != p.name)
      throw std::runtime_error("checkpoint parameter order mismatch at " +
                               p.name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape != p.tensor.shape())
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    blob.seekg(static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    std::vector<float> values(p.tensor.size());
    blob.read(reinterpret_cast<char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!blob) throw std::runtime_error("truncated checkpoint blob");
    Tensor t = p.tensor;
    for (std::size_t k = 0; k < values.size(); ++k)
      t.data()[k] = static_cast<double>(values[k]);
  }
  return model;
}

}  // namespace iclip
