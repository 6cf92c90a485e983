// Command-line front end: data generation, training, evaluation, gradient
// checking, and MEP stream replay.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "iclip/checkpoint.hpp"
#include "iclip/data.hpp"
#include "iclip/gradcheck.hpp"
#include "iclip/harness.hpp"
#include "iclip/mep.hpp"
#include "iclip/metrics.hpp"
#include "iclip/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<std::string> parse_str_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Flat run-config file; every key mirrors a flag. Unknown keys are an error.
// Values apply only where the flag was not given on the command line.
json load_config_file(const std::string& explicit_path) {
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* env = std::getenv("INTERCLIP_MEP_CONFIG")) path = env;
  }
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CliError("config file not found: " + path);
  json j = json::parse(in);
  static const std::set<std::string> known = {
      "seed", "mode", "top_n", "lora_rank", "lora_targets", "lora_alpha",
      "d_f", "d_t", "d_v", "n_layers_text", "n_layers_vision", "n_heads",
      "max_text_len", "image_side", "patch_size", "freeze_backbone",
      "epochs", "batch_size", "lr", "lora_lr", "weight_decay",
      "warmup_fraction", "min_lr_fraction", "variant", "memory_size",
      "n", "text_noise", "image_noise", "fractions", "out"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw CliError("unknown config key: " + it.key());
  return j;
}

template <typename T>
void apply_config(const json& cfg, const CLI::Option* opt, const char* key,
                  T& value) {
  if (opt != nullptr && opt->count() > 0) return;  // flags win
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

struct DatasetStats {
  long sarcastic = 0, non_sarcastic = 0;
};

DatasetStats stats_of(const iclip::Dataset& ds) {
  DatasetStats s;
  for (const auto& sample : ds.samples)
    (sample.label == 1 ? s.sarcastic : s.non_sarcastic)++;
  return s;
}

iclip::Dataset load_split(const std::string& dir, const std::string& name,
                          const iclip::Vocab& vocab, int image_side) {
  return iclip::load_jsonl(dir + "/" + name + ".jsonl", vocab, image_side);
}

// ---- gen-data ------------------------------------------------------------

int cmd_gen_data(const iclip::SynthSpec& spec,
                 const std::array<double, 3>& fractions,
                 const std::string& out_dir) {
  auto dataset = iclip::gen_synthetic(spec);
  auto splits = iclip::split(dataset, fractions, spec.seed);
  fs::create_directories(out_dir);
  iclip::save_jsonl(out_dir + "/train.jsonl", splits.train);
  iclip::save_jsonl(out_dir + "/val.jsonl", splits.validation);
  iclip::save_jsonl(out_dir + "/test.jsonl", splits.test);
  iclip::save_vocab(out_dir + "/vocab.txt", dataset.vocab);

  auto print_row = [](const std::string& name, const DatasetStats& s) {
    std::cout << name << "\t" << s.sarcastic << "\t" << s.non_sarcastic << "\t"
              << (s.sarcastic + s.non_sarcastic) << "\n";
  };
  std::cout << "Split\tSarcastic\tNon-sarcastic\tAll\n";
  print_row("Train", stats_of(splits.train));
  print_row("Validation", stats_of(splits.validation));
  print_row("Test", stats_of(splits.test));
  return 0;
}

// ---- train ---------------------------------------------------------------

int cmd_train(const iclip::TrainOptions& options, const std::string& data_dir,
              const std::string& out_dir) {
  auto vocab = iclip::load_vocab(data_dir + "/vocab.txt");
  auto train_set =
      load_split(data_dir, "train", vocab, options.model.image_side);
  std::optional<iclip::Dataset> val_set;
  if (fs::exists(data_dir + "/val.jsonl"))
    val_set = load_split(data_dir, "val", vocab, options.model.image_side);

  auto run = iclip::train(options, train_set,
                          val_set ? &*val_set : nullptr);
  fs::create_directories(out_dir);
  iclip::save_checkpoint(out_dir + "/checkpoint", *run.model);
  write_file(out_dir + "/run_manifest.json",
             iclip::run_manifest_json(run, train_set.provenance, {}) + "\n");
  if (!run.epoch_loss.empty()) {
    std::cout << "epoch\tloss";
    if (!run.val_accuracy.empty()) std::cout << "\tval_acc";
    std::cout << "\n";
    for (std::size_t e = 0; e < run.epoch_loss.size(); ++e) {
      std::cout << e << "\t" << run.epoch_loss[e];
      if (e < run.val_accuracy.size()) std::cout << "\t" << run.val_accuracy[e];
      std::cout << "\n";
    }
  }
  std::cout << "checkpoint written to " << out_dir << "/checkpoint\n";
  return 0;
}

// ---- eval ----------------------------------------------------------------

int cmd_eval(const std::string& ckpt_dir, const std::string& data_path,
             std::string vocab_path, bool use_mep, int memory_size,
             const std::vector<int>& sweep, bool normalized_vote,
             const std::string& out_path) {
  auto model = iclip::load_checkpoint(ckpt_dir);
  if (vocab_path.empty())
    vocab_path = (fs::path(data_path).parent_path() / "vocab.txt").string();
  auto vocab = iclip::load_vocab(vocab_path);
  auto eval_set =
      iclip::load_jsonl(data_path, vocab, model->config().image_side);

  std::vector<iclip::MetricsReport> reports;
  if (!sweep.empty()) {
    auto result = iclip::sweep_memory(*model, eval_set, sweep);
    for (const auto& row : result.rows) reports.push_back(row.report);
    std::cout << iclip::metrics_table(reports);
    std::cout << "best: L=" << result.best_memory_size << "\n";
  } else {
    if (use_mep && memory_size < 1)
      throw CliError("--memory-size must be >= 1 for MEP evaluation");
    reports.push_back(iclip::evaluate(*model, eval_set, use_mep, memory_size,
                                      normalized_vote));
    std::cout << iclip::metrics_table(reports);
  }
  if (!out_path.empty()) {
    json j = json::array();
    for (const auto& r : reports)
      j.push_back(json::parse(iclip::metrics_to_json(r)));
    write_file(out_path, j.dump(2) + "\n");
  }
  return 0;
}

// ---- gradcheck -----------------------------------------------------------

int cmd_gradcheck(bool corrupt) {
  iclip::ModelConfig cfg;
  cfg.d_t = cfg.d_v = 8;
  cfg.n_layers_text = cfg.n_layers_vision = 1;
  cfg.n_heads = 2;
  cfg.top_n = 1;
  cfg.lora_rank = 2;
  cfg.lora_targets = {"q", "k", "v", "o"};
  cfg.d_f = 8;
  cfg.vocab_size = 8;
  cfg.max_text_len = 6;
  cfg.image_side = 8;
  cfg.patch_size = 4;

  bool all_pass = true;
  for (auto mode : {iclip::InteractionMode::None, iclip::InteractionMode::T2V,
                    iclip::InteractionMode::V2T, iclip::InteractionMode::TW}) {
    cfg.interaction_mode = mode;
    iclip::InterClipModel model(cfg, /*seed=*/42);

    // fixed micro batch, both labels present
    std::vector<std::vector<int>> token_seqs = {
        {0, 3, 4, 1}, {0, 5, 1}, {0, 6, 7, 3, 1}};
    std::vector<std::vector<double>> images;
    for (int s = 0; s < 3; ++s) {
      std::vector<double> img(64);
      for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = 0.5 + 0.4 * std::sin(0.7 * double(i + 11 * s));
      images.push_back(std::move(img));
    }
    std::vector<int> labels = {1, 0, 1};

    auto loss_fn = [&]() {
      std::vector<iclip::Tensor> rows;
      for (std::size_t i = 0; i < labels.size(); ++i)
        rows.push_back(model.fused_feature(token_seqs[i], images[i]));
      iclip::Tensor fused = iclip::stack_rows(rows);
      iclip::Tensor lc = iclip::loss_bce(model.classify(fused), labels);
      iclip::Tensor lp = iclip::loss_proj(model.project(fused), labels);
      return iclip::loss_joint(lc, lp);
    };

    std::vector<iclip::NamedParam> params;
    for (const auto& p : model.trainable_params())
      params.push_back({p.name, p.tensor});
    auto report = iclip::finite_diff_check(loss_fn, params, 1e-5,
                                           corrupt ? 1.0 : 0.0);
    const bool pass = report.max_rel_err < 1e-4;
    all_pass = all_pass && pass;
    std::cout << "mode=" << iclip::to_string(mode)
              << " max_rel_err=" << report.max_rel_err
              << (pass ? " PASS" : " FAIL (worst: " + report.worst_param + ")")
              << "\n";
  }
  std::cout << (all_pass ? "gradcheck PASS" : "gradcheck FAIL") << "\n";
  return all_pass ? 0 : 2;
}

// ---- mep-replay ----------------------------------------------------------

int cmd_mep_replay(const std::string& stream_path, int memory_size,
                   bool normalized_vote, const std::string& out_path) {
  std::ifstream in(stream_path);
  if (!in) throw std::runtime_error("cannot open: " + stream_path);
  std::vector<iclip::MepSample> stream;
  std::vector<std::string> ids;
  std::vector<int> labels;
  bool all_labeled = true;
  std::string line;
  std::size_t line_no = 0;
  int d_f = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      iclip::MepSample s;
      auto probs = j.at("probs").get<std::vector<double>>();
      if (probs.size() != 2) throw std::runtime_error("probs must be a pair");
      s.probs = {probs[0], probs[1]};
      s.feature = j.at("feature").get<std::vector<double>>();
      if (d_f < 0) d_f = static_cast<int>(s.feature.size());
      ids.push_back(j.at("id").get<std::string>());
      if (j.contains("label"))
        labels.push_back(j.at("label").get<int>());
      else
        all_labeled = false;
      stream.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(stream_path + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  if (stream.empty()) {
    std::cout << "empty stream\n";
    return 0;
  }
  auto predictions =
      iclip::mep_run(stream, memory_size, d_f, normalized_vote);

  std::ostringstream out;
  std::vector<int> final_labels;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    json j;
    j["id"] = ids[i];
    j["pseudo_label"] = p.pseudo_label;
    j["entropy"] = p.entropy;
    j["final_probs"] = {p.final_probs[0], p.final_probs[1]};
    j["final_label"] = p.final_label;
    out << j.dump() << "\n";
    final_labels.push_back(p.final_label);
  }
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());

  if (all_labeled) {
    auto report = iclip::compute_metrics(final_labels, labels);
    report.mode_tag = "mep(L=" + std::to_string(memory_size) + ")";
    std::cout << iclip::metrics_table({report});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"InterCLIP-MEP: interactive dual-encoder sarcasm detection "
               "with a memory-enhanced predictor"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON run-config file (INTERCLIP_MEP_CONFIG as default)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  iclip::SynthSpec spec;
  std::string fractions_csv = "0.8,0.1,0.1";
  std::string gen_out = "data";
  auto* o_n = gen->add_option("--n", spec.n_samples, "number of samples")
                  ->capture_default_str();
  auto* o_gseed = gen->add_option("--seed", spec.seed, "generator seed")
                      ->capture_default_str();
  auto* o_tn = gen->add_option("--text-noise", spec.text_noise,
                               "distractor word probability")
                   ->capture_default_str();
  auto* o_in = gen->add_option("--image-noise", spec.image_noise,
                               "per-pixel flip probability")
                   ->capture_default_str();
  auto* o_side = gen->add_option("--image-side", spec.image_side, "image side")
                     ->capture_default_str();
  auto* o_patch =
      gen->add_option("--patch-size", spec.patch_size, "patch size")
          ->capture_default_str();
  gen->add_flag("--shortcut", spec.unimodal_shortcut,
                "inject a weak text-only label cue");
  auto* o_frac = gen->add_option("--fractions", fractions_csv,
                                 "train,val,test fractions")
                     ->capture_default_str();
  auto* o_gout = gen->add_option("--out", gen_out, "output directory")
                     ->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  iclip::TrainOptions topt;
  topt.model = iclip::toy_config();
  std::string data_dir = "data";
  std::string train_out = "run";
  std::string mode_str = "t2v";
  std::string targets_csv = "k,v,o";
  std::string variant_str = "baseline";
  bool no_freeze = false;
  auto* o_data = tr->add_option("--data", data_dir, "dataset directory")
                     ->capture_default_str();
  auto* o_tout = tr->add_option("--out", train_out, "output directory")
                     ->capture_default_str();
  auto* o_seed = tr->add_option("--seed", topt.seed, "training seed")
                     ->capture_default_str();
  auto* o_mode = tr->add_option("--mode", mode_str,
                                "interaction mode: none|t2v|v2t|tw")
                     ->capture_default_str();
  auto* o_topn = tr->add_option("--top-n", topt.model.top_n,
                                "conditioned top layers")
                     ->capture_default_str();
  auto* o_rank = tr->add_option("--lora-rank", topt.model.lora_rank,
                                "LoRA rank (0 disables)")
                     ->capture_default_str();
  auto* o_targets = tr->add_option("--lora-targets", targets_csv,
                                   "subset of q,k,v,o")
                        ->capture_default_str();
  auto* o_alpha = tr->add_option("--lora-alpha", topt.model.lora_alpha,
                                 "LoRA alpha (negative selects rank)")
                        ->capture_default_str();
  auto* o_df = tr->add_option("--d-f", topt.model.d_f, "projection dimension")
                   ->capture_default_str();
  auto* o_dt = tr->add_option("--d-t", topt.model.d_t, "text width")
                   ->capture_default_str();
  auto* o_dv = tr->add_option("--d-v", topt.model.d_v, "vision width")
                   ->capture_default_str();
  auto* o_lt = tr->add_option("--layers-text", topt.model.n_layers_text,
                              "text encoder layers")
                   ->capture_default_str();
  auto* o_lv = tr->add_option("--layers-vision", topt.model.n_layers_vision,
                              "vision encoder layers")
                   ->capture_default_str();
  auto* o_heads = tr->add_option("--heads", topt.model.n_heads,
                                 "attention heads")
                      ->capture_default_str();
  auto* o_mtl = tr->add_option("--max-text-len", topt.model.max_text_len,
                               "max token sequence length")
                    ->capture_default_str();
  auto* o_iside = tr->add_option("--image-side", topt.model.image_side,
                                 "image side")
                      ->capture_default_str();
  auto* o_ipatch = tr->add_option("--patch-size", topt.model.patch_size,
                                  "patch size")
                       ->capture_default_str();
  auto* o_epochs = tr->add_option("--epochs", topt.epochs, "training epochs")
                       ->capture_default_str();
  auto* o_bs = tr->add_option("--batch-size", topt.batch_size, "batch size")
                   ->capture_default_str();
  auto* o_lr = tr->add_option("--lr", topt.lr, "base learning rate")
                   ->capture_default_str();
  auto* o_llr = tr->add_option("--lora-lr", topt.lora_lr, "LoRA learning rate")
                    ->capture_default_str();
  auto* o_wd = tr->add_option("--weight-decay", topt.adamw.weight_decay,
                              "AdamW weight decay")
                   ->capture_default_str();
  auto* o_variant = tr->add_option("--variant", variant_str,
                                   "baseline|wo_proj|wo_mep|wo_lora")
                        ->capture_default_str();
  tr->add_flag("--no-freeze-backbone", no_freeze,
               "train backbone weights as well");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt_dir, eval_data, vocab_path, sweep_csv, eval_out;
  bool use_mep = true;
  int memory_size = 32;
  bool normalized_vote = false;
  ev->add_option("--checkpoint", ckpt_dir, "checkpoint directory")->required();
  ev->add_option("--data", eval_data, "evaluation JSONL file")->required();
  ev->add_option("--vocab", vocab_path,
                 "vocab file (default: vocab.txt next to --data)");
  ev->add_flag("--mep,!--no-mep", use_mep, "use the memory-enhanced predictor")
      ->capture_default_str();
  auto* o_msize = ev->add_option("--memory-size", memory_size,
                                 "memory capacity per channel")
                      ->capture_default_str();
  ev->add_option("--sweep", sweep_csv, "comma-separated candidate memory sizes");
  ev->add_flag("--normalized-vote", normalized_vote,
               "mean instead of summed similarity vote (study variant)");
  ev->add_option("--out", eval_out, "write metrics JSON here");

  // gradcheck
  auto* gc = app.add_subcommand(
      "gradcheck", "finite-difference gradient check on a micro model");
  bool corrupt = false;
  gc->add_flag("--corrupt", corrupt,
               "negative control: tamper with one analytic gradient");

  // mep-replay
  auto* mr = app.add_subcommand("mep-replay",
                                "run the MEP over a recorded embedding stream");
  std::string stream_path, replay_out;
  int replay_L = 32;
  bool replay_norm = false;
  mr->add_option("--stream", stream_path, "stream JSONL file")->required();
  auto* o_rl = mr->add_option("--memory-size", replay_L,
                              "memory capacity per channel")
                   ->capture_default_str();
  mr->add_flag("--normalized-vote", replay_norm,
               "mean instead of summed similarity vote");
  mr->add_option("--out", replay_out, "write predictions JSONL here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const json cfg = load_config_file(config_path);

    if (gen->parsed()) {
      apply_config(cfg, o_n, "n", spec.n_samples);
      apply_config(cfg, o_gseed, "seed", spec.seed);
      apply_config(cfg, o_tn, "text_noise", spec.text_noise);
      apply_config(cfg, o_in, "image_noise", spec.image_noise);
      apply_config(cfg, o_side, "image_side", spec.image_side);
      apply_config(cfg, o_patch, "patch_size", spec.patch_size);
      apply_config(cfg, o_frac, "fractions", fractions_csv);
      apply_config(cfg, o_gout, "out", gen_out);
      auto fracs = parse_str_list(fractions_csv);
      if (fracs.size() != 3) throw CliError("--fractions needs three values");
      return cmd_gen_data(spec,
                          {std::stod(fracs[0]), std::stod(fracs[1]),
                           std::stod(fracs[2])},
                          gen_out);
    }
    if (tr->parsed()) {
      apply_config(cfg, o_seed, "seed", topt.seed);
      apply_config(cfg, o_mode, "mode", mode_str);
      apply_config(cfg, o_topn, "top_n", topt.model.top_n);
      apply_config(cfg, o_rank, "lora_rank", topt.model.lora_rank);
      apply_config(cfg, o_targets, "lora_targets", targets_csv);
      apply_config(cfg, o_alpha, "lora_alpha", topt.model.lora_alpha);
      apply_config(cfg, o_df, "d_f", topt.model.d_f);
      apply_config(cfg, o_dt, "d_t", topt.model.d_t);
      apply_config(cfg, o_dv, "d_v", topt.model.d_v);
      apply_config(cfg, o_lt, "n_layers_text", topt.model.n_layers_text);
      apply_config(cfg, o_lv, "n_layers_vision", topt.model.n_layers_vision);
      apply_config(cfg, o_heads, "n_heads", topt.model.n_heads);
      apply_config(cfg, o_mtl, "max_text_len", topt.model.max_text_len);
      apply_config(cfg, o_iside, "image_side", topt.model.image_side);
      apply_config(cfg, o_ipatch, "patch_size", topt.model.patch_size);
      apply_config(cfg, o_epochs, "epochs", topt.epochs);
      apply_config(cfg, o_bs, "batch_size", topt.batch_size);
      apply_config(cfg, o_lr, "lr", topt.lr);
      apply_config(cfg, o_llr, "lora_lr", topt.lora_lr);
      apply_config(cfg, o_wd, "weight_decay", topt.adamw.weight_decay);
      apply_config(cfg, o_variant, "variant", variant_str);
      topt.model.interaction_mode =
          iclip::interaction_mode_from_string(mode_str);
      topt.model.lora_targets = parse_str_list(targets_csv);
      if (topt.model.lora_rank == 0) topt.model.lora_targets.clear();
      topt.model.freeze_backbone = !no_freeze;
      topt.variant = iclip::variant_from_string(variant_str);
      if (topt.variant == iclip::Variant::WoLora) {
        topt.model.lora_rank = 0;
        topt.model.lora_targets.clear();
      }
      if (topt.epochs < 0) throw CliError("--epochs must be >= 0");
      return cmd_train(topt, data_dir, train_out);
    }
    if (ev->parsed()) {
      apply_config(cfg, o_msize, "memory_size", memory_size);
      return cmd_eval(ckpt_dir, eval_data, vocab_path, use_mep, memory_size,
                      parse_int_list(sweep_csv), normalized_vote, eval_out);
    }
    if (gc->parsed()) return cmd_gradcheck(corrupt);
    if (mr->parsed()) {
      apply_config(cfg, o_rl, "memory_size", replay_L);
      if (replay_L < 1) throw CliError("--memory-size must be >= 1");
      return cmd_mep_replay(stream_path, replay_L, replay_norm, replay_out);
    }
    return 1;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
