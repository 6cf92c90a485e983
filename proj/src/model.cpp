#include "iclip/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace iclip {

namespace {

constexpr double kMaskedScore = -1e9;

const std::set<std::string> kLoraTargetNames = {"q", "k", "v", "o"};

std::vector<double> normal_init(std::mt19937_64& rng, std::size_t n,
                                double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(rng);
  return out;
}

}  // namespace

std::string to_string(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::None: return "none";
    case InteractionMode::T2V: return "t2v";
    case InteractionMode::V2T: return "v2t";
    case InteractionMode::TW: return "tw";
  }
  throw std::logic_error("unreachable interaction mode");
}

InteractionMode interaction_mode_from_string(const std::string& s) {
  if (s == "none") return InteractionMode::None;
  if (s == "t2v") return InteractionMode::T2V;
  if (s == "v2t") return InteractionMode::V2T;
  if (s == "tw") return InteractionMode::TW;
  throw std::invalid_argument("unknown interaction mode: " + s);
}

std::vector<std::string> ModelConfig::validate() const {
  std::vector<std::string> errors;
  auto positive = [&](int v, const char* name) {
    if (v <= 0) errors.push_back(std::string(name) + " must be positive");
  };
  positive(d_t, "d_t");
  positive(d_v, "d_v");
  positive(n_layers_text, "n_layers_text");
  positive(n_layers_vision, "n_layers_vision");
  positive(n_heads, "n_heads");
  positive(d_f, "d_f");
  positive(max_text_len, "max_text_len");
  positive(image_side, "image_side");
  positive(patch_size, "patch_size");
  if (n_heads > 0) {
    if (d_t % n_heads != 0) errors.push_back("n_heads must divide d_t");
    if (d_v % n_heads != 0) errors.push_back("n_heads must divide d_v");
  }
  if (top_n < 0) errors.push_back("top_n must be non-negative");
  if (top_n > std::min(n_layers_text, n_layers_vision))
    errors.push_back("top_n exceeds min(n_layers_text, n_layers_vision)");
  if (patch_size > 0 && image_side % patch_size != 0)
    errors.push_back("patch_size must divide image_side");
  if (lora_rank < 0) errors.push_back("lora_rank must be non-negative");
  if (lora_rank == 0 && !lora_targets.empty())
    errors.push_back("lora_targets must be empty when lora_rank is 0");
  for (const auto& t : lora_targets)
    if (!kLoraTargetNames.count(t))
      errors.push_back("unknown lora target: " + t);
  if (lora_alpha == 0.0)
    errors.push_back("lora_alpha must be positive (negative selects rank)");
  if (vocab_size <= 0) errors.push_back("vocab_size must be positive");
  return errors;
}

void ModelConfig::validate_or_throw() const {
  auto errors = validate();
  if (errors.empty()) return;
  std::ostringstream oss;
  oss << "invalid model config:";
  for (const auto& e : errors) oss << "\n  - " << e;
  throw std::invalid_argument(oss.str());
}

ModelConfig toy_config() { return ModelConfig{}; }

ModelConfig paper_config() {
  ModelConfig cfg;
  cfg.d_t = 512;
  cfg.d_v = 768;
  cfg.n_layers_text = 12;
  cfg.n_layers_vision = 12;
  cfg.n_heads = 8;
  cfg.top_n = 4;
  cfg.interaction_mode = InteractionMode::T2V;
  cfg.lora_rank = 8;
  cfg.lora_targets = {"k", "v", "o"};
  cfg.d_f = 1024;
  cfg.max_text_len = 77;
  cfg.image_side = 224;
  cfg.patch_size = 32;
  return cfg;
}

std::string model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["d_t"] = cfg.d_t;
  j["d_v"] = cfg.d_v;
  j["n_layers_text"] = cfg.n_layers_text;
  j["n_layers_vision"] = cfg.n_layers_vision;
  j["n_heads"] = cfg.n_heads;
  j["top_n"] = cfg.top_n;
  j["interaction_mode"] = to_string(cfg.interaction_mode);
  j["lora_rank"] = cfg.lora_rank;
  j["lora_targets"] = cfg.lora_targets;
  j["lora_alpha"] = cfg.lora_alpha;
  j["d_f"] = cfg.d_f;
  j["vocab_size"] = cfg.vocab_size;
  j["max_text_len"] = cfg.max_text_len;
  j["image_side"] = cfg.image_side;
  j["patch_size"] = cfg.patch_size;
  j["freeze_backbone"] = cfg.freeze_backbone;
  return j.dump(2);
}

ModelConfig model_config_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  static const std::set<std::string> known = {
      "d_t", "d_v", "n_layers_text", "n_layers_vision", "n_heads",
      "top_n", "interaction_mode", "lora_rank", "lora_targets", "lora_alpha",
      "d_f", "vocab_size", "max_text_len", "image_side", "patch_size",
      "freeze_backbone"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown config key: " + it.key());
  ModelConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("d_t", cfg.d_t);
  get("d_v", cfg.d_v);
  get("n_layers_text", cfg.n_layers_text);
  get("n_layers_vision", cfg.n_layers_vision);
  get("n_heads", cfg.n_heads);
  get("top_n", cfg.top_n);
  if (j.contains("interaction_mode"))
    cfg.interaction_mode =
        interaction_mode_from_string(j.at("interaction_mode").get<std::string>());
  get("lora_rank", cfg.lora_rank);
  get("lora_targets", cfg.lora_targets);
  get("lora_alpha", cfg.lora_alpha);
  get("d_f", cfg.d_f);
  get("vocab_size", cfg.vocab_size);
  get("max_text_len", cfg.max_text_len);
  get("image_side", cfg.image_side);
  get("patch_size", cfg.patch_size);
  get("freeze_backbone", cfg.freeze_backbone);
  return cfg;
}

// ---- building blocks -----------------------------------------------------

Tensor lora_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                    const LoraPair* lora, double alpha, int r) {
  Tensor y = add(matmul(x, w, false, true), bias);
  if (lora == nullptr) return y;
  if (r <= 0)
    throw std::invalid_argument("lora_forward: rank 0 with non-empty factors");
  Tensor low = matmul(matmul(x, lora->a, false, true), lora->b, false, true);
  return add(y, scale(low, alpha / static_cast<double>(r)));
}

Tensor loss_bce(const Tensor& probs, const std::vector<int>& labels) {
  const std::size_t n = probs.rows();
  if (n == 0) throw std::invalid_argument("loss_bce: empty batch");
  if (labels.size() != n)
    throw std::invalid_argument("loss_bce: label count mismatch");
  if (probs.cols() != 2)
    throw std::invalid_argument("loss_bce: expected N x 2 probabilities");
  std::vector<double> mask(n * 2, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("loss_bce: labels must be 0 or 1");
    mask[i * 2 + labels[i]] = 1.0;
  }
  Tensor clamped = clamp(probs, 1e-7, 1.0 - 1e-7);
  Tensor picked = mul(log_op(clamped), Tensor::from({n, 2}, std::move(mask)));
  return scale(sum(picked), -1.0 / static_cast<double>(n));
}

Tensor loss_proj(const Tensor& features, const std::vector<int>& labels) {
  if (features.rows() != labels.size())
    throw std::invalid_argument("loss_proj: label count mismatch");
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? pos : neg).push_back(static_cast<int>(i));

  Tensor total = Tensor::scalar(0.0);
  if (!pos.empty() && !neg.empty()) {
    Tensor p = gather_rows(features, pos);
    Tensor q = gather_rows(features, neg);
    total = add(total, mean(matmul(p, q, false, true)));
  }
  // within-class terms: mean(1 - H . H^T), empty sets contribute 0
  for (const auto* idx : {&pos, &neg}) {
    if (idx->empty()) continue;
    Tensor h = gather_rows(features, *idx);
    total = add(total, mean(affine(matmul(h, h, false, true), -1.0, 1.0)));
  }
  return total;
}

Tensor loss_joint(const Tensor& loss_c, const Tensor& loss_p) {
  return add(loss_c, loss_p);
}

// ---- model ---------------------------------------------------------------

InterClipModel::InterClipModel(const ModelConfig& cfg, std::uint64_t seed,
                               bool with_projection)
    : cfg_(cfg), with_projection_(with_projection) {
  cfg_.validate_or_throw();
  std::mt19937_64 rng(seed);
  const double w_std = 0.02;

  auto dense = [&](const std::string& name, int rows, int cols, bool backbone,
                   double stddev) {
    return add_param(name, {static_cast<std::size_t>(rows),
                            static_cast<std::size_t>(cols)},
                     normal_init(rng, static_cast<std::size_t>(rows) * cols,
                                 stddev),
                     backbone, false);
  };
  auto bias = [&](const std::string& name, int n, bool backbone) {
    return add_param(name, {static_cast<std::size_t>(n)},
                     std::vector<double>(n, 0.0), backbone, false);
  };
  auto ones = [&](const std::string& name, int n, bool backbone) {
    return add_param(name, {static_cast<std::size_t>(n)},
                     std::vector<double>(n, 1.0), backbone, false);
  };

  tok_emb_ = dense("text.tok_emb", cfg_.vocab_size, cfg_.d_t, true, w_std);
  text_pos_emb_ = dense("text.pos_emb", cfg_.max_text_len, cfg_.d_t, true, w_std);

  const int patch_px = cfg_.patch_size * cfg_.patch_size;
  patch_w_ = dense("vision.patch_w", cfg_.d_v, patch_px, true, w_std);
  patch_b_ = bias("vision.patch_b", cfg_.d_v, true);
  cls_emb_ = dense("vision.cls_emb", 1, cfg_.d_v, true, w_std);
  vis_pos_emb_ =
      dense("vision.pos_emb", cfg_.patch_count() + 1, cfg_.d_v, true, w_std);

  auto has_target = [&](const char* t) {
    return std::find(cfg_.lora_targets.begin(), cfg_.lora_targets.end(), t) !=
           cfg_.lora_targets.end();
  };

  auto build_encoder = [&](const std::string& prefix, int n_layers, int d,
                           int d_other, bool causal) {
    Encoder enc;
    enc.causal = causal;
    enc.width = d;
    const int mlp_hidden = 4 * d;
    for (int l = 0; l < n_layers; ++l) {
      const std::string lp = prefix + ".layer" + std::to_string(l) + ".";
      EncoderLayer layer;
      layer.ln1_g = ones(lp + "ln1_g", d, true);
      layer.ln1_b = bias(lp + "ln1_b", d, true);
      layer.ln2_g = ones(lp + "ln2_g", d, true);
      layer.ln2_b = bias(lp + "ln2_b", d, true);
      layer.attn.wq = dense(lp + "attn.wq", d, d, true, w_std);
      layer.attn.bq = bias(lp + "attn.bq", d, true);
      layer.attn.wk = dense(lp + "attn.wk", d, d, true, w_std);
      layer.attn.bk = bias(lp + "attn.bk", d, true);
      layer.attn.wv = dense(lp + "attn.wv", d, d, true, w_std);
      layer.attn.bv = bias(lp + "attn.bv", d, true);
      layer.attn.wo = dense(lp + "attn.wo", d, d, true, w_std);
      layer.attn.bo = bias(lp + "attn.bo", d, true);
      layer.mlp_w1 = dense(lp + "mlp.w1", mlp_hidden, d, true, w_std);
      layer.mlp_b1 = bias(lp + "mlp.b1", mlp_hidden, true);
      layer.mlp_w2 = dense(lp + "mlp.w2", d, mlp_hidden, true, w_std);
      layer.mlp_b2 = bias(lp + "mlp.b2", d, true);

      if (cfg_.lora_rank > 0) {
        auto make_lora = [&](const char* t) -> std::optional<LoraPair> {
          if (!has_target(t)) return std::nullopt;
          LoraPair pair;
          pair.a = add_param(
              lp + "attn.lora_" + t + ".a",
              {static_cast<std::size_t>(cfg_.lora_rank),
               static_cast<std::size_t>(d)},
              normal_init(rng, static_cast<std::size_t>(cfg_.lora_rank) * d,
                          w_std),
              false, true);
          pair.b = add_param(lp + "attn.lora_" + t + ".b",
                             {static_cast<std::size_t>(d),
                              static_cast<std::size_t>(cfg_.lora_rank)},
                             std::vector<double>(
                                 static_cast<std::size_t>(d) * cfg_.lora_rank,
                                 0.0),
                             false, true);
          return pair;
        };
        layer.attn.lora_q = make_lora("q");
        layer.attn.lora_k = make_lora("k");
        layer.attn.lora_v = make_lora("v");
        layer.attn.lora_o = make_lora("o");
      }

      if (l >= n_layers - cfg_.top_n) {
        ConditionalParams cp;
        cp.adapt_w = dense(lp + "cond.adapt_w", d, d_other, false, w_std);
        cp.adapt_b = bias(lp + "cond.adapt_b", d, false);
        cp.gate_w = dense(lp + "cond.gate_w", d, d, false, w_std);
        cp.gate_b = bias(lp + "cond.gate_b", d, false);
        cp.gate_beta =
            add_param(lp + "cond.gate_beta", {1}, {0.0}, false, false);
        layer.cond = std::move(cp);
      }
      enc.layers.push_back(std::move(layer));
    }
    enc.ln_final_g = ones(prefix + ".ln_final_g", d, true);
    enc.ln_final_b = bias(prefix + ".ln_final_b", d, true);
    return enc;
  };

  text_enc_ = build_encoder("text", cfg_.n_layers_text, cfg_.d_t, cfg_.d_v, true);
  vision_enc_ =
      build_encoder("vision", cfg_.n_layers_vision, cfg_.d_v, cfg_.d_t, false);

  const int d_fused = cfg_.d_t + cfg_.d_v;
  const double head_std = std::sqrt(2.0 / static_cast<double>(d_fused));
  cls_w1_ = dense("head.cls.w1", d_fused, d_fused, false, head_std);
  cls_b1_ = bias("head.cls.b1", d_fused, false);
  // zero-initialized final layer: every input classifies to [0.5, 0.5]
  cls_w2_ = add_param("head.cls.w2",
                      {2, static_cast<std::size_t>(d_fused)},
                      std::vector<double>(2 * d_fused, 0.0), false, false);
  cls_b2_ = bias("head.cls.b2", 2, false);

  if (with_projection_) {
    proj_w1_ = dense("head.proj.w1", d_fused, d_fused, false, head_std);
    proj_b1_ = bias("head.proj.b1", d_fused, false);
    proj_w2_ = dense("head.proj.w2", cfg_.d_f, d_fused, false, head_std);
    proj_b2_ = bias("head.proj.b2", cfg_.d_f, false);
  }
}

Tensor InterClipModel::add_param(const std::string& name, Shape shape,
                                 std::vector<double> values, bool backbone,
                                 bool lora) {
  const bool trainable = lora || !backbone || !cfg_.freeze_backbone;
  Tensor t = Tensor::from(std::move(shape), std::move(values), trainable);
  params_.push_back({name, t, lora, backbone});
  return t;
}

std::vector<ParamEntry> InterClipModel::trainable_params() const {
  std::vector<ParamEntry> out;
  for (const auto& p : params_)
    if (p.tensor.requires_grad()) out.push_back(p);
  return out;
}

std::vector<Tensor> InterClipModel::lora_tensors() const {
  std::vector<Tensor> out;
  for (const auto& p : params_)
    if (p.is_lora) out.push_back(p.tensor);
  return out;
}

std::vector<Tensor> InterClipModel::non_lora_trainable_tensors() const {
  std::vector<Tensor> out;
  for (const auto& p : params_)
    if (p.tensor.requires_grad() && !p.is_lora) out.push_back(p.tensor);
  return out;
}

Tensor InterClipModel::param_by_name(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.tensor;
  throw std::invalid_argument("unknown parameter: " + name);
}

Tensor InterClipModel::text_input(const std::vector<int>& token_ids) const {
  if (token_ids.empty())
    throw std::invalid_argument("encode_text: empty token sequence");
  if (token_ids.size() > static_cast<std::size_t>(cfg_.max_text_len))
    throw std::invalid_argument("encode_text: sequence exceeds max_text_len");
  Tensor e = gather_rows(tok_emb_, token_ids);
  Tensor p = slice_rows(text_pos_emb_, 0, token_ids.size());
  return add(e, p);
}

Tensor InterClipModel::vision_input(const std::vector<double>& image) const {
  const std::size_t side = static_cast<std::size_t>(cfg_.image_side);
  if (image.size() != side * side)
    throw std::invalid_argument("encode_image: image size mismatch");
  const std::size_t ps = static_cast<std::size_t>(cfg_.patch_size);
  const std::size_t per_side = side / ps;
  const std::size_t m = per_side * per_side;
  std::vector<double> patches(m * ps * ps);
  for (std::size_t pr = 0; pr < per_side; ++pr)
    for (std::size_t pc = 0; pc < per_side; ++pc) {
      const std::size_t pi = pr * per_side + pc;
      for (std::size_t r = 0; r < ps; ++r)
        for (std::size_t c = 0; c < ps; ++c)
          patches[pi * ps * ps + r * ps + c] =
              image[(pr * ps + r) * side + (pc * ps + c)];
    }
  Tensor patch_mat = Tensor::from({m, ps * ps}, std::move(patches));
  Tensor embedded = add(matmul(patch_mat, patch_w_, false, true), patch_b_);
  Tensor x = concat_rows(cls_emb_, embedded);
  return add(x, slice_rows(vis_pos_emb_, 0, m + 1));
}

namespace {

/// Attention mask for a causal sequence of n_seq rows followed by m_cond
/// condition rows that every query may attend to.
Tensor causal_mask(std::size_t n_seq, std::size_t m_cond) {
  const std::size_t s = n_seq + m_cond;
  std::vector<double> mask(s * s, 0.0);
  for (std::size_t i = 0; i < n_seq; ++i)
    for (std::size_t j = i + 1; j < n_seq; ++j)
      mask[i * s + j] = kMaskedScore;
  return Tensor::from({s, s}, std::move(mask));
}

}  // namespace

Tensor InterClipModel::attention_sublayer(const EncoderLayer& layer,
                                          const Tensor& h,
                                          const Tensor* condition,
                                          bool causal) const {
  const std::size_t n_seq = h.rows();
  const std::size_t d = h.cols();
  const int n_heads = cfg_.n_heads;
  const std::size_t dh = d / static_cast<std::size_t>(n_heads);
  const double alpha = cfg_.effective_lora_alpha();
  const int r = cfg_.lora_rank;

  const bool conditioned = condition != nullptr && layer.cond.has_value();
  Tensor x = h;
  if (conditioned) {
    if (condition->rows() > 0 &&
        condition->cols() != layer.cond->adapt_w.cols())
      throw std::invalid_argument("condition width mismatch");
    Tensor projected = add(matmul(*condition, layer.cond->adapt_w, false, true),
                           layer.cond->adapt_b);
    if (condition->rows() > 0) x = concat_rows(h, projected);
  }
  const std::size_t s = x.rows();
  const std::size_t m_cond = s - n_seq;

  Tensor q = lora_forward(x, layer.attn.wq, layer.attn.bq,
                          layer.attn.lora_q ? &*layer.attn.lora_q : nullptr,
                          alpha, r);
  Tensor k = lora_forward(x, layer.attn.wk, layer.attn.bk,
                          layer.attn.lora_k ? &*layer.attn.lora_k : nullptr,
                          alpha, r);
  Tensor v = lora_forward(x, layer.attn.wv, layer.attn.bv,
                          layer.attn.lora_v ? &*layer.attn.lora_v : nullptr,
                          alpha, r);

  Tensor mask;
  if (causal) mask = causal_mask(n_seq, m_cond);

  Tensor ctx;
  for (int head = 0; head < n_heads; ++head) {
    const std::size_t c0 = static_cast<std::size_t>(head) * dh;
    Tensor qh = slice_cols(q, c0, c0 + dh);
    Tensor kh = slice_cols(k, c0, c0 + dh);
    Tensor vh = slice_cols(v, c0, c0 + dh);
    Tensor scores =
        scale(matmul(qh, kh, false, true), 1.0 / std::sqrt(double(dh)));
    if (mask.defined()) scores = add(scores, mask);
    Tensor weights = softmax_rows(scores);
    Tensor head_out = matmul(weights, vh);
    ctx = head == 0 ? head_out : concat_cols(ctx, head_out);
  }

  Tensor h_prime = m_cond > 0 ? slice_rows(ctx, 0, n_seq) : ctx;
  Tensor out = lora_forward(h_prime, layer.attn.wo, layer.attn.bo,
                            layer.attn.lora_o ? &*layer.attn.lora_o : nullptr,
                            alpha, r);
  if (conditioned) {
    Tensor gate = add(matmul(h_prime, layer.cond->gate_w, false, true),
                      layer.cond->gate_b);
    out = add(out, scale_by(gate, tanh_op(layer.cond->gate_beta)));
  }
  return out;
}

Tensor InterClipModel::encoder_forward(const Encoder& enc, Tensor x,
                                       const Tensor* condition) const {
  for (const auto& layer : enc.layers) {
    const Tensor* cond = (condition && layer.cond) ? condition : nullptr;
    Tensor h = layernorm_rows(x, layer.ln1_g, layer.ln1_b);
    x = add(x, attention_sublayer(layer, h, cond, enc.causal));
    Tensor h2 = layernorm_rows(x, layer.ln2_g, layer.ln2_b);
    Tensor hidden = gelu(add(matmul(h2, layer.mlp_w1, false, true),
                             layer.mlp_b1));
    x = add(x, add(matmul(hidden, layer.mlp_w2, false, true), layer.mlp_b2));
  }
  return layernorm_rows(x, enc.ln_final_g, enc.ln_final_b);
}

Tensor InterClipModel::encode_text(const std::vector<int>& token_ids,
                                   const Tensor* condition) const {
  if (condition && condition->rows() > 0 &&
      condition->cols() != static_cast<std::size_t>(cfg_.d_v))
    throw std::invalid_argument("encode_text: condition width must be d_v");
  const Tensor* cond =
      (condition && condition->rows() > 0) ? condition : nullptr;
  return encoder_forward(text_enc_, text_input(token_ids), cond);
}

Tensor InterClipModel::encode_image(const std::vector<double>& image,
                                    const Tensor* condition) const {
  if (condition && condition->rows() > 0 &&
      condition->cols() != static_cast<std::size_t>(cfg_.d_t))
    throw std::invalid_argument("encode_image: condition width must be d_t");
  const Tensor* cond =
      (condition && condition->rows() > 0) ? condition : nullptr;
  return encoder_forward(vision_enc_, vision_input(image), cond);
}

Tensor InterClipModel::fused_feature(const std::vector<int>& token_ids,
                                     const std::vector<double>& image) const {
  auto eos_of = [&](const Tensor& f_t) { return row(f_t, f_t.rows() - 1); };
  auto cls_of = [&](const Tensor& f_v) { return row(f_v, 0); };

  switch (cfg_.interaction_mode) {
    case InteractionMode::None: {
      Tensor ft = encode_text(token_ids);
      Tensor fv = encode_image(image);
      return concat_cols(eos_of(ft), cls_of(fv));
    }
    case InteractionMode::T2V: {
      Tensor ft = encode_text(token_ids);
      Tensor fv_tilde = encode_image(image, &ft);
      return concat_cols(eos_of(ft), cls_of(fv_tilde));
    }
    case InteractionMode::V2T: {
      Tensor fv = encode_image(image);
      Tensor ft_tilde = encode_text(token_ids, &fv);
      return concat_cols(eos_of(ft_tilde), cls_of(fv));
    }
    case InteractionMode::TW: {
      // both conditioning passes use the other encoder's vanilla output
      Tensor ft = encode_text(token_ids);
      Tensor fv = encode_image(image);
      Tensor ft_tilde = encode_text(token_ids, &fv);
      Tensor fv_tilde = encode_image(image, &ft);
      return concat_cols(eos_of(ft_tilde), cls_of(fv_tilde));
    }
  }
  throw std::logic_error("unreachable interaction mode");
}

Tensor InterClipModel::mlp_head(const Tensor& x, const Tensor& w1,
                                const Tensor& b1, const Tensor& w2,
                                const Tensor& b2) const {
  Tensor hidden = gelu(add(matmul(x, w1, false, true), b1));
  return add(matmul(hidden, w2, false, true), b2);
}

Tensor InterClipModel::classify(const Tensor& fused_batch) const {
  if (fused_batch.cols() != static_cast<std::size_t>(cfg_.d_t + cfg_.d_v))
    throw std::invalid_argument("classify: input width must be d_t + d_v");
  return softmax_rows(mlp_head(fused_batch, cls_w1_, cls_b1_, cls_w2_, cls_b2_));
}

Tensor InterClipModel::project(const Tensor& fused_batch) const {
  if (!with_projection_)
    throw std::runtime_error("project: model built without projection head");
  if (fused_batch.cols() != static_cast<std::size_t>(cfg_.d_t + cfg_.d_v))
    throw std::invalid_argument("project: input width must be d_t + d_v");
  return l2_normalize_rows(
      mlp_head(fused_batch, proj_w1_, proj_b1_, proj_w2_, proj_b2_));
}

}  // namespace iclip
