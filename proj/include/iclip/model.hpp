#ifndef ICLIP_MODEL_HPP
#define ICLIP_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iclip/tensor.hpp"

namespace iclip {

enum class InteractionMode { None, T2V, V2T, TW };

std::string to_string(InteractionMode mode);
InteractionMode interaction_mode_from_string(const std::string& s);

/// Architecture hyperparameters for the dual-encoder model.
struct ModelConfig {
  int d_t = 64;
  int d_v = 64;
  int n_layers_text = 4;
  int n_layers_vision = 4;
  int n_heads = 4;
  int top_n = 2;  // number of conditioned top layers per encoder
  InteractionMode interaction_mode = InteractionMode::None;
  int lora_rank = 4;
  std::vector<std::string> lora_targets = {"k", "v", "o"};  // subset of q,k,v,o
  double lora_alpha = -1.0;  // < 0 means "equal to lora_rank"
  int d_f = 64;
  int vocab_size = 0;  // filled from the vocabulary before model construction
  int max_text_len = 16;
  int image_side = 32;
  int patch_size = 8;
  bool freeze_backbone = true;

  int patch_count() const {
    const int side = image_side / patch_size;
    return side * side;
  }
  double effective_lora_alpha() const {
    return lora_alpha < 0.0 ? static_cast<double>(lora_rank) : lora_alpha;
  }

  /// Returns every validation failure; empty means valid.
  std::vector<std::string> validate() const;
  void validate_or_throw() const;
};

ModelConfig toy_config();
ModelConfig paper_config();

std::string model_config_to_json(const ModelConfig& cfg);
/// Strict parse: unknown keys are an error.
ModelConfig model_config_from_json(const std::string& json_text);

struct LoraPair {
  Tensor a;  // r x d_in
  Tensor b;  // d_out x r, zero-initialized
};

struct AttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  std::optional<LoraPair> lora_q, lora_k, lora_v, lora_o;
};

/// Extra parameters of a conditioned self-attention layer: the adapting
/// projection into the host width, the gated projection, and the gate scalar.
struct ConditionalParams {
  Tensor adapt_w, adapt_b;  // d_other -> d
  Tensor gate_w, gate_b;    // d -> d
  Tensor gate_beta;         // scalar, initialized to 0
};

struct EncoderLayer {
  Tensor ln1_g, ln1_b, ln2_g, ln2_b;
  AttentionParams attn;
  Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
  std::optional<ConditionalParams> cond;  // present on the top-n layers
};

struct Encoder {
  std::vector<EncoderLayer> layers;
  Tensor ln_final_g, ln_final_b;
  bool causal = false;
  int width = 0;
};

struct ParamEntry {
  std::string name;
  Tensor tensor;
  bool is_lora = false;
  bool is_backbone = false;
};

/// y = x (W + (alpha/r) B A)^T + bias. With lora == nullptr this is the plain
/// projection; B = 0 reproduces it exactly.
Tensor lora_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                    const LoraPair* lora, double alpha, int r);

Tensor loss_bce(const Tensor& probs, const std::vector<int>& labels);
Tensor loss_proj(const Tensor& features, const std::vector<int>& labels);
Tensor loss_joint(const Tensor& loss_c, const Tensor& loss_p);

class InterClipModel {
 public:
  InterClipModel(const ModelConfig& cfg, std::uint64_t seed,
                 bool with_projection = true);

  const ModelConfig& config() const { return cfg_; }
  bool with_projection() const { return with_projection_; }

  /// Vanilla or conditioned text pass; condition rows are the other
  /// encoder's final-layer output ((m+1) x d_v).
  Tensor encode_text(const std::vector<int>& token_ids,
                     const Tensor* condition = nullptr) const;
  /// Vision pass over a raw image grid (image_side^2 values in [0,1]).
  Tensor encode_image(const std::vector<double>& image,
                      const Tensor* condition = nullptr) const;

  /// One attention sublayer on already-normalized input; applies the
  /// adapting projection, concatenation, gate, and truncation when the
  /// layer is conditional and a condition is supplied.
  Tensor attention_sublayer(const EncoderLayer& layer, const Tensor& h,
                            const Tensor* condition, bool causal) const;

  /// Runs the passes required by the configured interaction mode and
  /// returns the fused vector (1 x (d_t + d_v)).
  Tensor fused_feature(const std::vector<int>& token_ids,
                       const std::vector<double>& image) const;

  Tensor classify(const Tensor& fused_batch) const;   // N x 2 probabilities
  Tensor project(const Tensor& fused_batch) const;    // N x d_f, unit rows

  const std::vector<ParamEntry>& params() const { return params_; }
  std::vector<ParamEntry> trainable_params() const;
  std::vector<Tensor> lora_tensors() const;
  std::vector<Tensor> non_lora_trainable_tensors() const;

  Tensor param_by_name(const std::string& name) const;

  const Encoder& text_encoder() const { return text_enc_; }
  const Encoder& vision_encoder() const { return vision_enc_; }

 private:
  Tensor add_param(const std::string& name, Shape shape,
                   std::vector<double> values, bool backbone, bool lora);
  Tensor text_input(const std::vector<int>& token_ids) const;
  Tensor vision_input(const std::vector<double>& image) const;
  Tensor encoder_forward(const Encoder& enc, Tensor x,
                         const Tensor* condition) const;
  Tensor mlp_head(const Tensor& x, const Tensor& w1, const Tensor& b1,
                  const Tensor& w2, const Tensor& b2) const;

  ModelConfig cfg_;
  bool with_projection_;
  std::vector<ParamEntry> params_;

  Tensor tok_emb_, text_pos_emb_;
  Tensor patch_w_, patch_b_, cls_emb_, vis_pos_emb_;
  Encoder text_enc_, vision_enc_;
  Tensor cls_w1_, cls_b1_, cls_w2_, cls_b2_;
  Tensor proj_w1_, proj_b1_, proj_w2_, proj_b2_;
};

}  // namespace iclip

#endif  // ICLIP_MODEL_HPP
