#include "avvp/config.hpp"

#include <cstdio>

namespace avvp {

using nlohmann::json;

namespace {

// Reads key into v when present; unknown keys are rejected by the caller.
template <class T>
void read_opt(const json& j, const char* key, T& v) {
  if (auto it = j.find(key); it != j.end()) v = it->get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw InvalidArgument(std::string("unknown ") + what + " setting '" + it.key() + "'");
  }
}

}  // namespace

void to_json(json& j, const ModelConfig& c) {
  j = json{{"d_audio", c.d_audio},
           {"d_visual", c.d_visual},
           {"width", c.width},
           {"classes", c.classes},
           {"temporal", temporal_mode_name(c.temporal)},
           {"pool", pool_mode_name(c.pool)},
           {"learned_qk", c.learned_qk}};
}

void from_json(const json& j, ModelConfig& c) {
  reject_unknown(j, {"d_audio", "d_visual", "width", "classes", "temporal", "pool", "learned_qk"},
                 "model");
  read_opt(j, "d_audio", c.d_audio);
  read_opt(j, "d_visual", c.d_visual);
  read_opt(j, "width", c.width);
  read_opt(j, "classes", c.classes);
  if (j.contains("temporal")) c.temporal = parse_temporal_mode(j.at("temporal").get<std::string>());
  if (j.contains("pool")) c.pool = parse_pool_mode(j.at("pool").get<std::string>());
  read_opt(j, "learned_qk", c.learned_qk);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"lr0", c.lr0},
           {"lr_decay", c.lr_decay},
           {"lr_step_epochs", c.lr_step_epochs},
           {"seed", c.seed},
           {"loss", loss_mode_name(c.loss.mode)},
           {"smooth_eps_a", c.loss.smoothing.eps_audio},
           {"smooth_eps_v", c.loss.smoothing.eps_visual},
           {"smooth_k", c.loss.smoothing.k},
           {"label_smoothing", c.loss.smoothing.enabled},
           {"wsl_positive_only", c.loss.wsl_positive_only},
           {"clip_norm", c.clip_norm},
           {"eval_interval", c.eval_interval},
           {"threshold", c.threshold}};
}

void from_json(const json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"batch_size", "epochs", "lr0", "lr_decay", "lr_step_epochs", "seed", "loss",
                  "smooth_eps_a", "smooth_eps_v", "smooth_k", "label_smoothing", "wsl_positive_only",
                  "clip_norm", "eval_interval", "threshold"},
                 "train");
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "lr0", c.lr0);
  read_opt(j, "lr_decay", c.lr_decay);
  read_opt(j, "lr_step_epochs", c.lr_step_epochs);
  read_opt(j, "seed", c.seed);
  if (j.contains("loss")) c.loss.mode = parse_loss_mode(j.at("loss").get<std::string>());
  read_opt(j, "smooth_eps_a", c.loss.smoothing.eps_audio);
  read_opt(j, "smooth_eps_v", c.loss.smoothing.eps_visual);
  read_opt(j, "smooth_k", c.loss.smoothing.k);
  read_opt(j, "label_smoothing", c.loss.smoothing.enabled);
  read_opt(j, "wsl_positive_only", c.loss.wsl_positive_only);
  read_opt(j, "clip_norm", c.clip_norm);
  read_opt(j, "eval_interval", c.eval_interval);
  read_opt(j, "threshold", c.threshold);
}

void to_json(json& j, const SynthConfig& c) {
  j = json{{"n_videos", c.n_videos},
           {"steps", c.steps},
           {"d_audio", c.d_audio},
           {"d_visual", c.d_visual},
           {"classes", c.classes},
           {"noise_sigma", c.noise_sigma},
           {"modality_bias", c.modality_bias},
           {"signal_gain", c.signal_gain},
           {"max_classes_per_video", c.max_classes_per_video},
           {"p_audio_only", c.p_audio_only},
           {"p_visual_only", c.p_visual_only},
           {"seed", c.seed}};
}

void from_json(const json& j, SynthConfig& c) {
  reject_unknown(j,
                 {"n_videos", "steps", "d_audio", "d_visual", "classes", "noise_sigma",
                  "modality_bias", "signal_gain", "max_classes_per_video", "p_audio_only",
                  "p_visual_only", "seed"},
                 "synth");
  read_opt(j, "n_videos", c.n_videos);
  read_opt(j, "steps", c.steps);
  read_opt(j, "d_audio", c.d_audio);
  read_opt(j, "d_visual", c.d_visual);
  read_opt(j, "classes", c.classes);
  read_opt(j, "noise_sigma", c.noise_sigma);
  read_opt(j, "modality_bias", c.modality_bias);
  read_opt(j, "signal_gain", c.signal_gain);
  read_opt(j, "max_classes_per_video", c.max_classes_per_video);
  read_opt(j, "p_audio_only", c.p_audio_only);
  read_opt(j, "p_visual_only", c.p_visual_only);
  read_opt(j, "seed", c.seed);
}

std::string config_digest(const json& j) {
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const ModelConfig& model, const TrainConfig& train) {
  return config_digest(json{{"model", model}, {"train", train}});
}

json RunConfig::to_json() const {
  return json{{"model", model}, {"train", train}, {"data", data_dir}, {"val", val_dir}};
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, {"model", "train", "data", "val"}, "run");
  RunConfig r;
  if (j.contains("model")) r.model = j.at("model").get<ModelConfig>();
  if (j.contains("train")) r.train = j.at("train").get<TrainConfig>();
  read_opt(j, "data", r.data_dir);
  read_opt(j, "val", r.val_dir);
  return r;
}

}  // namespace avvp
