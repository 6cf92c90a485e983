#include "iclip/mep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "iclip/tensor.hpp"

namespace iclip {

namespace {

constexpr double kProbFloor = 1e-7;

double clamp_prob(double p) {
  return std::min(1.0 - kProbFloor, std::max(kProbFloor, p));
}

void validate_sample(const MepSample& s, int d_f) {
  if (!std::isfinite(s.probs[0]) || !std::isfinite(s.probs[1]))
    throw std::invalid_argument("mep: non-finite probability");
  if (std::fabs(s.probs[0] + s.probs[1] - 1.0) > 1e-6)
    throw std::invalid_argument("mep: probability pair does not sum to 1");
  if (s.feature.size() != static_cast<std::size_t>(d_f))
    throw std::invalid_argument("mep: feature dimension mismatch");
  double n2 = 0.0;
  for (double x : s.feature) n2 += x * x;
  if (std::fabs(std::sqrt(n2) - 1.0) > 1e-5)
    throw std::invalid_argument("mep: feature must be unit-norm");
}

// argmax with ties broken toward label 0
int pseudo_label_of(const std::array<double, 2>& probs) {
  return probs[1] > probs[0] ? 1 : 0;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

double prediction_entropy(const std::array<double, 2>& probs) {
  if (!std::isfinite(probs[0]) || !std::isfinite(probs[1]) ||
      probs[0] < -1e-6 || probs[1] < -1e-6 ||
      std::fabs(probs[0] + probs[1] - 1.0) > 1e-6)
    throw std::invalid_argument("entropy: invalid probability pair");
  const double p0 = clamp_prob(probs[0]);
  const double p1 = clamp_prob(probs[1]);
  return -p0 * std::log(p0) - p1 * std::log(p1);
}

MemoryState::MemoryState(int capacity, int d_f)
    : capacity_(capacity), d_f_(d_f) {
  if (capacity <= 0) throw std::invalid_argument("memory capacity must be >= 1");
  if (d_f <= 0) throw std::invalid_argument("feature dimension must be >= 1");
}

std::vector<double> MemoryState::channel_entropies(int channel) const {
  std::vector<double> out;
  out.reserve(entries_[channel].size());
  for (const auto& e : entries_[channel]) out.push_back(e.entropy);
  return out;
}

MepPrediction MemoryState::step(const MepSample& sample, bool normalized_vote) {
  validate_sample(sample, d_f_);
  ++samples_seen_;

  MepPrediction pred;
  pred.classifier_probs = sample.probs;
  pred.pseudo_label = pseudo_label_of(sample.probs);
  pred.entropy = prediction_entropy(sample.probs);

  auto& channel = entries_[pred.pseudo_label];
  if (channel.size() < static_cast<std::size_t>(capacity_)) {
    channel.push_back({sample.feature, pred.entropy});
  } else {
    // replace the highest-entropy row, smallest index on ties, only on a
    // strict improvement
    std::size_t worst = 0;
    for (std::size_t i = 1; i < channel.size(); ++i)
      if (channel[i].entropy > channel[worst].entropy) worst = i;
    if (pred.entropy < channel[worst].entropy)
      channel[worst] = {sample.feature, pred.entropy};
  }

  std::vector<double> logits(2, 0.0);
  for (int c = 0; c < 2; ++c) {
    for (const auto& e : entries_[c]) logits[c] += dot(sample.feature, e.feature);
    if (normalized_vote && !entries_[c].empty())
      logits[c] /= static_cast<double>(entries_[c].size());
  }
  auto probs = softmax_values(logits);
  pred.final_probs = {probs[0], probs[1]};
  pred.final_label = probs[1] > probs[0] ? 1 : 0;
  return pred;
}

std::vector<MepPrediction> mep_run(const std::vector<MepSample>& stream,
                                   int capacity, int d_f,
                                   bool normalized_vote) {
  MemoryState state(capacity, d_f);
  std::vector<MepPrediction> out;
  out.reserve(stream.size());
  for (const auto& s : stream) out.push_back(state.step(s, normalized_vote));
  return out;
}

std::vector<double> retained_entropies_bruteforce(
    const std::vector<MepSample>& stream, std::size_t prefix_len, int channel,
    int capacity) {
  // (entropy, arrival index) for every prefix sample routed to the channel
  std::vector<std::pair<double, std::size_t>> routed;
  for (std::size_t i = 0; i < prefix_len; ++i)
    if (pseudo_label_of(stream[i].probs) == channel)
      routed.emplace_back(prediction_entropy(stream[i].probs), i);
  std::stable_sort(routed.begin(), routed.end(),
                   [](const auto& a, const auto& b) {
                     return a.first < b.first ||
                            (a.first == b.first && a.second < b.second);
                   });
  if (routed.size() > static_cast<std::size_t>(capacity))
    routed.resize(static_cast<std::size_t>(capacity));
  std::vector<double> out;
  out.reserve(routed.size());
  for (const auto& [e, idx] : routed) out.push_back(e);
  return out;
}

std::vector<MepPrediction> mep_oracle(const std::vector<MepSample>& stream,
                                      int capacity, int d_f) {
  if (capacity <= 0) throw std::invalid_argument("memory capacity must be >= 1");
  std::vector<MepPrediction> out;
  out.reserve(stream.size());

  std::vector<int> labels(stream.size());
  std::vector<double> entropies(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    validate_sample(stream[i], d_f);
    labels[i] = pseudo_label_of(stream[i].probs);
    entropies[i] = prediction_entropy(stream[i].probs);
  }

  const std::size_t cap = static_cast<std::size_t>(capacity);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    // Rebuild both channels from scratch for the prefix [0, i]: a literal
    // transcription of the update rule over fixed slot arrays.
    std::array<std::vector<std::size_t>, 2> slots;  // sample index per slot
    for (std::size_t t = 0; t <= i; ++t) {
      auto& ch = slots[labels[t]];
      if (ch.size() < cap) {
        ch.push_back(t);
      } else {
        std::size_t worst = 0;
        for (std::size_t k = 1; k < ch.size(); ++k)
          if (entropies[ch[k]] > entropies[ch[worst]]) worst = k;
        if (entropies[t] < entropies[ch[worst]]) ch[worst] = t;
      }
    }

    // Cross-check slot contents against the sort-based retained set.
    for (int c = 0; c < 2; ++c) {
      std::vector<double> have;
      for (std::size_t idx : slots[c]) have.push_back(entropies[idx]);
      std::sort(have.begin(), have.end());
      auto want = retained_entropies_bruteforce(stream, i + 1, c, capacity);
      std::sort(want.begin(), want.end());
      if (have != want)
        throw std::runtime_error(
            "mep_oracle: slot replay disagrees with sorted retention");
    }

    MepPrediction pred;
    pred.classifier_probs = stream[i].probs;
    pred.pseudo_label = labels[i];
    pred.entropy = entropies[i];
    std::vector<double> logits(2, 0.0);
    for (int c = 0; c < 2; ++c)
      for (std::size_t idx : slots[c])
        logits[c] += dot(stream[i].feature, stream[idx].feature);
    auto probs = softmax_values(logits);
    pred.final_probs = {probs[0], probs[1]};
    pred.final_label = probs[1] > probs[0] ? 1 : 0;
    out.push_back(pred);
  }
  return out;
}

}  // namespace iclip
