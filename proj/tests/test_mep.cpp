#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "iclip/mep.hpp"

using namespace iclip;

namespace {

MepSample sample2(double p1, double fx, double fy) {
  const double n = std::sqrt(fx * fx + fy * fy);
  return {{1.0 - p1, p1}, {fx / n, fy / n}};
}

std::vector<MepSample> random_stream(std::mt19937_64& rng, std::size_t n,
                                     int d_f) {
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<MepSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    MepSample s;
    const double p1 = prob(rng);
    s.probs = {1.0 - p1, p1};
    s.feature.resize(d_f);
    double norm2 = 0.0;
    for (auto& x : s.feature) {
      x = gauss(rng);
      norm2 += x * x;
    }
    for (auto& x : s.feature) x /= std::sqrt(norm2);
    out.push_back(std::move(s));
  }
  return out;
}

bool bit_identical(const std::vector<MepPrediction>& a,
                   const std::vector<MepPrediction>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].pseudo_label != b[i].pseudo_label) return false;
    if (a[i].entropy != b[i].entropy) return false;
    if (a[i].classifier_probs != b[i].classifier_probs) return false;
    if (a[i].final_probs != b[i].final_probs) return false;
    if (a[i].final_label != b[i].final_label) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("entropy hand values and clamping") {
  CHECK(prediction_entropy({0.5, 0.5}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(prediction_entropy({0.9, 0.1}) ==
        doctest::Approx(-0.9 * std::log(0.9) - 0.1 * std::log(0.1))
            .epsilon(1e-12));  // ~0.325083
  // degenerate pairs are clamped, not logged at zero
  const double h = prediction_entropy({1.0, 0.0});
  CHECK(h > 0.0);
  CHECK(h < 2e-6);
  CHECK(prediction_entropy({0.0, 1.0}) == h);

  CHECK_THROWS(prediction_entropy({0.7, 0.7}));
  CHECK_THROWS(prediction_entropy({std::nan(""), 0.5}));
}

TEST_CASE("two-sample trace with L = 1, d_f = 2") {
  MemoryState mem(1, 2);
  const double e1 = std::exp(1.0);

  auto p1 = mem.step(sample2(0.1, 1.0, 0.0));  // pseudo-label 0
  CHECK(p1.pseudo_label == 0);
  CHECK(p1.entropy == doctest::Approx(0.3250829733914482).epsilon(1e-12));
  // memory now holds its own feature: logits (1, 0)
  CHECK(p1.final_probs[0] == doctest::Approx(e1 / (e1 + 1.0)).epsilon(1e-12));
  CHECK(p1.final_probs[1] == doctest::Approx(1.0 / (e1 + 1.0)).epsilon(1e-12));
  CHECK(p1.final_label == 0);

  auto p2 = mem.step(sample2(0.8, 0.0, 1.0));  // pseudo-label 1
  CHECK(p2.pseudo_label == 1);
  CHECK(p2.entropy ==
        doctest::Approx(-0.2 * std::log(0.2) - 0.8 * std::log(0.8))
            .epsilon(1e-12));
  // orthogonal to channel 0, aligned with itself in channel 1: logits (0, 1)
  CHECK(p2.final_probs[0] == doctest::Approx(1.0 / (e1 + 1.0)).epsilon(1e-12));
  CHECK(p2.final_probs[1] == doctest::Approx(e1 / (e1 + 1.0)).epsilon(1e-12));
  CHECK(p2.final_label == 1);

  CHECK(mem.fill(0) == 1);
  CHECK(mem.fill(1) == 1);
  CHECK(mem.samples_seen() == 2);
}

TEST_CASE("exact ties route to the non-sarcastic channel") {
  MemoryState mem(4, 2);
  auto p = mem.step(sample2(0.5, 1.0, 0.0));
  CHECK(p.pseudo_label == 0);
  CHECK(mem.fill(0) == 1);
  CHECK(mem.fill(1) == 0);
}

TEST_CASE("replacement requires a strict entropy improvement") {
  MemoryState mem(1, 2);
  mem.step(sample2(0.2, 1.0, 0.0));
  CHECK(mem.stored_feature(0, 0)[0] == doctest::Approx(1.0));

  // equal entropy: the incumbent stays
  mem.step(sample2(0.2, 0.0, 1.0));
  CHECK(mem.stored_feature(0, 0)[0] == doctest::Approx(1.0));
  CHECK(mem.stored_feature(0, 0)[1] == doctest::Approx(0.0));

  // lower entropy: replaced
  mem.step(sample2(0.05, 0.0, 1.0));
  CHECK(mem.stored_feature(0, 0)[1] == doctest::Approx(1.0));
  CHECK(mem.stored_entropy(0, 0) ==
        doctest::Approx(prediction_entropy({0.95, 0.05})).epsilon(1e-12));
}

TEST_CASE("replacement targets the smallest-index worst slot on ties") {
  MemoryState mem(2, 2);
  mem.step(sample2(0.3, 1.0, 0.0));   // slot 0
  mem.step(sample2(0.3, 0.0, 1.0));   // slot 1, equal entropy
  mem.step(sample2(0.1, 1.0, 1.0));   // strictly better: replaces slot 0
  CHECK(mem.stored_entropy(0, 0) ==
        doctest::Approx(prediction_entropy({0.9, 0.1})).epsilon(1e-12));
  CHECK(mem.stored_feature(0, 1)[1] == doctest::Approx(1.0));
}

TEST_CASE("channels are isolated") {
  MemoryState mem(2, 2);
  mem.step(sample2(0.2, 1.0, 0.0));  // channel 0
  auto before = mem.channel_entropies(0);
  mem.step(sample2(0.9, 0.0, 1.0));  // channel 1
  mem.step(sample2(0.95, 1.0, 1.0));
  CHECK(mem.channel_entropies(0) == before);
  CHECK(mem.fill(1) == 2);
}

TEST_CASE("normalized vote divides by channel fill") {
  MemoryState mem(2, 2);
  mem.step(sample2(0.2, 1.0, 0.0));
  mem.step(sample2(0.3, 1.0, 0.0));
  // channel 0 holds (1,0) twice; the tied query is not inserted (no strict
  // improvement), so raw logits would be (2, 0) -- normalized (1, 0)
  auto p = mem.step({{0.5, 0.5}, {1.0, 0.0}}, /*normalized_vote=*/true);
  const double e1 = std::exp(1.0);
  CHECK(p.final_probs[0] == doctest::Approx(e1 / (e1 + 1.0)).epsilon(1e-12));
}

TEST_CASE("memory update happens before the vote") {
  // a lone first sample must already see itself in memory
  MemoryState mem(8, 2);
  auto p = mem.step(sample2(0.9, 0.0, 1.0));
  CHECK(p.final_probs[1] > p.final_probs[0]);  // its channel got logit 1
}

TEST_CASE("streaming predictions are prefix-stable") {
  std::mt19937_64 rng(5);
  auto stream = random_stream(rng, 60, 3);
  auto full = mep_run(stream, 4, 3);
  auto prefix = mep_run(
      std::vector<MepSample>(stream.begin(), stream.begin() + 25), 4, 3);
  CHECK(bit_identical(
      std::vector<MepPrediction>(full.begin(), full.begin() + 25), prefix));
}

TEST_CASE("mep_run and mep_oracle agree bit-for-bit") {
  std::mt19937_64 rng(9);
  for (int capacity : {1, 3, 8}) {
    auto stream = random_stream(rng, 200, 4);
    CHECK(bit_identical(mep_run(stream, capacity, 4),
                        mep_oracle(stream, capacity, 4)));
  }

  // all-tie stream: every entropy equal, every sample routed to channel 0
  std::vector<MepSample> ties;
  for (int i = 0; i < 40; ++i) {
    auto s = random_stream(rng, 1, 4)[0];
    s.probs = {0.5, 0.5};
    ties.push_back(std::move(s));
  }
  CHECK(bit_identical(mep_run(ties, 4, 4), mep_oracle(ties, 4, 4)));
}

TEST_CASE("retained entropies match the brute-force reference") {
  std::mt19937_64 rng(13);
  auto stream = random_stream(rng, 120, 3);
  MemoryState mem(5, 3);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    mem.step(stream[i]);
    if (i % 17 != 0) continue;
    for (int c = 0; c < 2; ++c) {
      auto have = mem.channel_entropies(c);
      std::sort(have.begin(), have.end());
      auto want = retained_entropies_bruteforce(stream, i + 1, c, 5);
      std::sort(want.begin(), want.end());
      REQUIRE(have.size() == want.size());
      for (std::size_t k = 0; k < have.size(); ++k)
        CHECK(have[k] == want[k]);
    }
  }
}

TEST_CASE("mep input validation") {
  CHECK_THROWS(MemoryState(0, 2));
  CHECK_THROWS(MemoryState(4, 0));
  MemoryState mem(4, 2);
  CHECK_THROWS(mem.step({{0.7, 0.7}, {1.0, 0.0}}));      // bad probs
  CHECK_THROWS(mem.step({{0.5, 0.5}, {0.5, 0.5}}));      // not unit norm
  CHECK_THROWS(mem.step({{0.5, 0.5}, {1.0, 0.0, 0.0}})); // wrong d_f
}
