#ifndef ICLIP_MEP_HPP
#define ICLIP_MEP_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace iclip {

/// Shannon entropy of a binary probability pair (natural log). Probabilities
/// are clamped to [1e-7, 1 - 1e-7] before the log; the pair must sum to 1
/// within 1e-6.
double prediction_entropy(const std::array<double, 2>& probs);

struct MepSample {
  std::array<double, 2> probs;   // classifier probabilities
  std::vector<double> feature;   // unit-normalized, length d_f
};

struct MepPrediction {
  int pseudo_label = 0;
  double entropy = 0.0;
  std::array<double, 2> classifier_probs{};
  std::array<double, 2> final_probs{};
  int final_label = 0;
};

/// Dual-channel fixed-capacity memory. Channel 0 holds features
/// pseudo-labeled non-sarcastic, channel 1 sarcastic.
class MemoryState {
 public:
  MemoryState(int capacity, int d_f);

  int capacity() const { return capacity_; }
  int feature_dim() const { return d_f_; }
  std::size_t fill(int channel) const { return entries_[channel].size(); }
  long samples_seen() const { return samples_seen_; }
  const std::vector<double>& stored_feature(int channel, std::size_t i) const {
    return entries_[channel][i].feature;
  }
  double stored_entropy(int channel, std::size_t i) const {
    return entries_[channel][i].entropy;
  }
  std::vector<double> channel_entropies(int channel) const;

  /// One step of the streaming predictor: curate memory with the sample
  /// (insert, or replace the highest-entropy row on a strict improvement),
  /// then vote with summed cosine similarities. The sample's own feature
  /// participates in its own vote. normalized_vote divides each channel
  /// logit by its fill count; it is a study variant, off by default.
  MepPrediction step(const MepSample& sample, bool normalized_vote = false);

 private:
  struct Entry {
    std::vector<double> feature;
    double entropy;
  };
  int capacity_;
  int d_f_;
  long samples_seen_ = 0;
  std::array<std::vector<Entry>, 2> entries_;
};

std::vector<MepPrediction> mep_run(const std::vector<MepSample>& stream,
                                   int capacity, int d_f,
                                   bool normalized_vote = false);

/// Independent re-derivation of mep_run: every step rebuilds both channels
/// from the stream prefix (sort-verified lowest-entropy retention plus a
/// literal slot replay) before voting. Structured differently from the
/// incremental MemoryState on purpose.
std::vector<MepPrediction> mep_oracle(const std::vector<MepSample>& stream,
                                      int capacity, int d_f);

/// Brute-force reference for the retention property: the min(L, count)
/// smallest entropies among prefix samples pseudo-labeled `channel`, ties
/// resolved in favor of earlier arrivals.
std::vector<double> retained_entropies_bruteforce(
    const std::vector<MepSample>& stream, std::size_t prefix_len, int channel,
    int capacity);

}  // namespace iclip

#endif  // ICLIP_MEP_HPP
