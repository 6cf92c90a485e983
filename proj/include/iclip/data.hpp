#ifndef ICLIP_DATA_HPP
#define ICLIP_DATA_HPP

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace iclip {

struct Vocab {
  std::vector<std::string> tokens;  // index = id
  std::unordered_map<std::string, int> index;

  static constexpr const char* kBos = "<bos>";
  static constexpr const char* kEos = "<eos>";
  static constexpr const char* kUnk = "<unk>";

  int bos() const { return index.at(kBos); }
  int eos() const { return index.at(kEos); }
  int unk() const { return index.at(kUnk); }
  int size() const { return static_cast<int>(tokens.size()); }

  static Vocab with_specials();
  void add(const std::string& token);
  int lookup(const std::string& token) const;  // unk for OOV
};

/// One text-image pair; image is image_side x image_side row-major values
/// in [0, 1]. label is meaningful only when has_label is set.
struct SamplePair {
  std::string id;
  std::string text;
  std::vector<double> image;
  int label = 0;
  bool has_label = false;
};

struct Dataset {
  std::vector<SamplePair> samples;
  Vocab vocab;
  int image_side = 0;
  std::string provenance;

  std::size_t size() const { return samples.size(); }
};

/// Whitespace tokenization with bos/eos and truncation to max_len (eos kept
/// terminal). Empty text yields [bos, eos].
std::vector<int> tokenize(const std::string& text, const Vocab& vocab,
                          int max_len);

struct SynthSpec {
  int n_samples = 2000;
  std::uint64_t seed = 0;
  double text_noise = 0.0;   // probability of injecting a distractor word
  double image_noise = 0.0;  // per-pixel flip probability
  int image_side = 32;
  int patch_size = 8;
  bool unimodal_shortcut = false;  // leaks a weak text-only cue when set
};

/// Synthetic incongruity dataset: hidden text bit (positive vs negative
/// lexicon) and hidden image bit (bright vs dark), label = XOR of the bits.
/// Fully determined by the seed.
Dataset gen_synthetic(const SynthSpec& spec);

Dataset load_jsonl(const std::string& path, const Vocab& vocab, int image_side);
void save_jsonl(const std::string& path, const Dataset& dataset);

Vocab load_vocab(const std::string& path);
void save_vocab(const std::string& path, const Vocab& vocab);

struct SplitResult {
  Dataset train, validation, test;
};

SplitResult split(const Dataset& dataset, const std::array<double, 3>& fractions,
                  std::uint64_t seed);

/// Batch index lists; a seeded permutation per epoch when shuffling, and the
/// final partial batch is emitted.
std::vector<std::vector<std::size_t>> batches(std::size_t n_samples,
                                              std::size_t batch_size,
                                              std::uint64_t seed,
                                              std::uint64_t epoch,
                                              bool shuffle);

/// Hand-crafted unimodal summary used by the probe checks: the signed
/// lexicon-word balance of the text, or the mean image brightness.
double text_bit_feature(const std::string& text);
double image_bit_feature(const std::vector<double>& image);

}  // namespace iclip

#endif  // ICLIP_DATA_HPP
