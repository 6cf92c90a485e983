#include "iclip/data.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace iclip {

namespace {

// fixed in-source lexicons
const std::vector<std::string> kPositive = {
    "great",  "lovely",   "awesome", "wonderful", "perfect", "fantastic",
    "sunny",  "charming", "superb",  "delight",   "bliss",   "brilliant",
    "cozy",   "fresh",    "golden",  "cheerful"};
const std::vector<std::string> kNegative = {
    "awful",  "dreadful", "miserable", "terrible", "gloomy", "horrid",
    "rotten", "dismal",   "bleak",     "sour",     "grim",   "dull",
    "nasty",  "broken",   "rainy",     "tired"};
const std::vector<std::string> kFiller = {
    "the",   "a",     "this",  "that",   "today",  "morning", "evening",
    "again", "very",  "just",  "really", "quite",  "still",   "here",
    "there", "now",   "day",   "time",   "thing",  "moment",  "weather",
    "city",  "street","coffee","train",  "office", "window",  "light",
    "work",  "week",  "people","photo"};
const std::string kShortcutPos = "shortcutpos";
const std::string kShortcutNeg = "shortcutneg";

bool in_lexicon(const std::vector<std::string>& lex, const std::string& w) {
  return std::find(lex.begin(), lex.end(), w) != lex.end();
}

std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream iss(text);
  std::vector<std::string> out;
  std::string w;
  while (iss >> w) out.push_back(w);
  return out;
}

}  // namespace

Vocab Vocab::with_specials() {
  Vocab v;
  v.add(kBos);
  v.add(kEos);
  v.add(kUnk);
  return v;
}

void Vocab::add(const std::string& token) {
  if (index.count(token)) return;
  index[token] = static_cast<int>(tokens.size());
  tokens.push_back(token);
}

int Vocab::lookup(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? unk() : it->second;
}

std::vector<int> tokenize(const std::string& text, const Vocab& vocab,
                          int max_len) {
  if (max_len < 2)
    throw std::invalid_argument("tokenize: max_len must allow bos and eos");
  std::vector<int> ids;
  ids.push_back(vocab.bos());
  for (const auto& w : split_ws(text)) ids.push_back(vocab.lookup(w));
  ids.push_back(vocab.eos());
  if (ids.size() > static_cast<std::size_t>(max_len)) {
    ids.resize(static_cast<std::size_t>(max_len));
    ids.back() = vocab.eos();
  }
  return ids;
}

Dataset gen_synthetic(const SynthSpec& spec) {
  if (spec.n_samples <= 0) throw std::invalid_argument("empty dataset");
  if (spec.text_noise < 0.0 || spec.text_noise >= 1.0 ||
      spec.image_noise < 0.0 || spec.image_noise >= 1.0)
    throw std::invalid_argument("noise probabilities must be in [0, 1)");
  if (spec.image_side <= 0 || spec.patch_size <= 0 ||
      spec.image_side % spec.patch_size != 0)
    throw std::invalid_argument("patch_size must divide image_side");

  Dataset ds;
  ds.image_side = spec.image_side;
  ds.provenance = "synthetic(seed=" + std::to_string(spec.seed) + ")";
  ds.vocab = Vocab::with_specials();
  for (const auto& w : kPositive) ds.vocab.add(w);
  for (const auto& w : kNegative) ds.vocab.add(w);
  for (const auto& w : kFiller) ds.vocab.add(w);
  ds.vocab.add(kShortcutPos);
  ds.vocab.add(kShortcutNeg);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);

  const std::size_t side = static_cast<std::size_t>(spec.image_side);
  for (int i = 0; i < spec.n_samples; ++i) {
    const int b_t = bit(rng);
    const int b_v = bit(rng);
    const int label = b_t ^ b_v;

    const auto& lex = b_t == 1 ? kPositive : kNegative;
    const auto& other = b_t == 1 ? kNegative : kPositive;
    std::uniform_int_distribution<std::size_t> lex_pick(0, lex.size() - 1);
    std::uniform_int_distribution<std::size_t> fill_pick(0, kFiller.size() - 1);
    std::vector<std::string> words;
    for (int k = 0; k < 3; ++k) words.push_back(lex[lex_pick(rng)]);
    for (int k = 0; k < 4; ++k) words.push_back(kFiller[fill_pick(rng)]);
    std::shuffle(words.begin(), words.end(), rng);
    if (unit(rng) < spec.text_noise) {
      std::uniform_int_distribution<std::size_t> other_pick(0, other.size() - 1);
      std::uniform_int_distribution<std::size_t> pos_pick(0, words.size());
      words.insert(words.begin() + pos_pick(rng), other[other_pick(rng)]);
    }
    if (spec.unimodal_shortcut)
      words.push_back(label == 1 ? kShortcutPos : kShortcutNeg);

    std::string text;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) text += ' ';
      text += words[w];
    }

    const double base = b_v == 1 ? 0.8 : 0.2;
    std::vector<double> image(side * side);
    for (auto& px : image) {
      px = std::clamp(base + (unit(rng) - 0.5) * 0.2, 0.0, 1.0);
      if (spec.image_noise > 0.0 && unit(rng) < spec.image_noise)
        px = 1.0 - px;
    }

    SamplePair s;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth-%06d", i);
    s.id = buf;
    s.text = std::move(text);
    s.image = std::move(image);
    s.label = label;
    s.has_label = true;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_jsonl(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  const std::size_t side = static_cast<std::size_t>(dataset.image_side);
  for (const auto& s : dataset.samples) {
    nlohmann::json j;
    j["id"] = s.id;
    j["text"] = s.text;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < side; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < side; ++c) row.push_back(s.image[r * side + c]);
      rows.push_back(std::move(row));
    }
    j["image"] = std::move(rows);
    if (s.has_label) j["label"] = s.label;
    out << j.dump() << '\n';
  }
}

Dataset load_jsonl(const std::string& path, const Vocab& vocab,
                   int image_side) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Dataset ds;
  ds.vocab = vocab;
  ds.image_side = image_side;
  ds.provenance = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      SamplePair s;
      s.id = j.at("id").get<std::string>();
      s.text = j.at("text").get<std::string>();
      const auto& rows = j.at("image");
      if (!rows.is_array() ||
          rows.size() != static_cast<std::size_t>(image_side))
        throw std::runtime_error("image row count mismatch");
      for (const auto& r : rows) {
        if (!r.is_array() || r.size() != static_cast<std::size_t>(image_side))
          throw std::runtime_error("image column count mismatch");
        for (const auto& px : r) {
          const double v = px.get<double>();
          if (v < 0.0 || v > 1.0)
            throw std::runtime_error("image value outside [0, 1]");
          s.image.push_back(v);
        }
      }
      if (j.contains("label")) {
        s.label = j.at("label").get<int>();
        if (s.label != 0 && s.label != 1)
          throw std::runtime_error("label must be 0 or 1");
        s.has_label = true;
      }
      ds.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return ds;
}

Vocab load_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Vocab v;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) v.add(line);
  for (const char* special : {Vocab::kBos, Vocab::kEos, Vocab::kUnk})
    if (!v.index.count(special))
      throw std::runtime_error("vocab missing special token: " +
                               std::string(special));
  return v;
}

void save_vocab(const std::string& path, const Vocab& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& t : vocab.tokens) out << t << '\n';
}

SplitResult split(const Dataset& dataset, const std::array<double, 3>& fractions,
                  std::uint64_t seed) {
  double sum = fractions[0] + fractions[1] + fractions[2];
  for (double f : fractions)
    if (f < 0.0) throw std::invalid_argument("split: negative fraction");
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n = dataset.size();
  const std::size_t n_train = static_cast<std::size_t>(
      std::llround(fractions[0] * static_cast<double>(n)));
  const std::size_t n_val = std::min(
      n - n_train, static_cast<std::size_t>(
                       std::llround(fractions[1] * static_cast<double>(n))));

  SplitResult result;
  for (Dataset* part : {&result.train, &result.validation, &result.test}) {
    part->vocab = dataset.vocab;
    part->image_side = dataset.image_side;
  }
  result.train.provenance = dataset.provenance + "/train";
  result.validation.provenance = dataset.provenance + "/validation";
  result.test.provenance = dataset.provenance + "/test";
  for (std::size_t i = 0; i < n; ++i) {
    Dataset* part = i < n_train              ? &result.train
                    : i < n_train + n_val    ? &result.validation
                                             : &result.test;
    part->samples.push_back(dataset.samples[order[i]]);
  }
  return result;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n_samples,
                                              std::size_t batch_size,
                                              std::uint64_t seed,
                                              std::uint64_t epoch,
                                              bool shuffle) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + epoch);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n_samples; i += batch_size) {
    const std::size_t end = std::min(n_samples, i + batch_size);
    out.emplace_back(order.begin() + i, order.begin() + end);
  }
  return out;
}

double text_bit_feature(const std::string& text) {
  const auto words = split_ws(text);
  if (words.empty()) return 0.0;
  int balance = 0;
  for (const auto& w : words) {
    if (in_lexicon(kPositive, w)) ++balance;
    else if (in_lexicon(kNegative, w)) --balance;
  }
  return static_cast<double>(balance) / static_cast<double>(words.size());
}

double image_bit_feature(const std::vector<double>& image) {
  if (image.empty()) return 0.0;
  return std::accumulate(image.begin(), image.end(), 0.0) /
         static_cast<double>(image.size());
}

}  // namespace iclip
