#include "avvp/model.hpp"

#include <cmath>
#include <cstring>

namespace avvp {

std::string_view temporal_mode_name(TemporalMode m) noexcept {
  return m == TemporalMode::Han ? "han" : "none";
}

TemporalMode parse_temporal_mode(std::string_view s) {
  if (s == "han") return TemporalMode::Han;
  if (s == "none") return TemporalMode::None;
  throw InvalidArgument("unknown temporal mode '" + std::string(s) + "'");
}

ModelParams ModelParams::create(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.d_audio == 0 || cfg.d_visual == 0 || cfg.width == 0 || cfg.classes == 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  Rng rng(mix_seed(seed, 7));
  ModelParams p;
  p.config = cfg;
  p.han = HanParams::create(cfg.d_audio, cfg.d_visual, cfg.width,
                            cfg.learned_qk && cfg.temporal == TemporalMode::Han, rng);
  p.mmil = MmilParams::create(cfg.width, cfg.classes, rng);
  return p;
}

ModelParams ModelParams::zeros_like() const {
  return {config, han.zeros_like(), mmil.zeros_like()};
}

std::vector<ParamSlot> ModelParams::slots() {
  std::vector<ParamSlot> out;
  han.append_slots(out, "han.");
  mmil.append_slots(out, "mmil.");
  return out;
}

std::size_t ModelParams::parameter_count() const {
  auto count = [](const LinearLayer& l) { return l.weight.size() + l.bias.size(); };
  std::size_t n = count(han.audio_proj) + count(han.visual_proj) + count(mmil.classifier) +
                  count(mmil.temporal_head) + count(mmil.modality_head);
  for (std::size_t s = 0; s < 4; ++s) n += count(han.query[s]) + count(han.key[s]);
  return n;
}

void zero(ModelParams& grads) {
  for (auto& s : grads.slots()) std::fill(s.value.begin(), s.value.end(), 0.0);
}

void accumulate(ModelParams& dst, ModelParams& src) {
  auto d = dst.slots();
  auto s = src.slots();
  if (d.size() != s.size()) throw ShapeError("accumulate: slot count mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = 0; k < d[i].value.size(); ++k) d[i].value[k] += s[i].value[k];
  }
}

void scale(ModelParams& grads, double factor) {
  for (auto& s : grads.slots()) {
    for (double& v : s.value) v *= factor;
  }
}

double global_norm(ModelParams& grads) {
  double sum = 0.0;
  for (auto& s : grads.slots()) {
    for (double v : s.value) sum += v * v;
  }
  return std::sqrt(sum);
}

std::uint64_t checksum(ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto& s : params.slots()) {
    for (double v : s.value) {
      unsigned char b[8];
      std::memcpy(b, &v, 8);
      for (unsigned char x : b) {
        h ^= x;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

namespace {

struct ForwardState {
  ProjectedInputs in;
  HanCache han;
  Matrix h_audio, h_visual;
  SnippetProbs probs;
  PoolOutput pool;
  std::array<AttentionMap, 4> maps;
};

ForwardState forward(const ModelParams& params, const VideoBag& bag) {
  ForwardState s;
  s.in = project_inputs(bag, params.han);
  if (params.config.temporal == TemporalMode::Han) {
    HanOutput h = han_forward(s.in.audio, s.in.visual, params.han, &s.han);
    s.h_audio = std::move(h.audio);
    s.h_visual = std::move(h.visual);
    s.maps = std::move(h.maps);
  } else {
    s.h_audio = s.in.audio;
    s.h_visual = s.in.visual;
  }
  s.probs = classify_snippets(s.h_audio, s.h_visual, params.mmil);
  switch (params.config.pool) {
    case PoolMode::Attentive:
      s.pool = attentive_pool(s.h_audio, s.h_visual, s.probs, params.mmil);
      break;
    case PoolMode::Max: s.pool = max_pool(s.probs); break;
    case PoolMode::Mean: s.pool = mean_pool(s.probs); break;
  }
  return s;
}

}  // namespace

VideoPrediction predict(const ModelParams& params, const VideoBag& bag) {
  ForwardState s = forward(params, bag);
  return {std::move(s.probs), std::move(s.pool), std::move(s.maps)};
}

LossBreakdown video_loss(const ModelParams& params, const VideoBag& bag,
                         std::span<const double> weak, const LossConfig& loss,
                         ModelParams* grads) {
  if (weak.size() != params.config.classes) {
    throw ShapeError("video " + bag.video_id + ": weak label has " + std::to_string(weak.size()) +
                     " classes, model has " + std::to_string(params.config.classes));
  }
  ForwardState s = forward(params, bag);
  const LossBreakdown b = total_loss(s.pool, weak, loss);
  if (!grads) return b;

  const PoolGrads g = total_loss_grad(s.pool, weak, loss);
  PoolBackward pb = pool_backward(s.h_audio, s.h_visual, s.probs, s.pool, g, params.config.pool,
                                  params.mmil, grads->mmil);
  Features2 dh = classify_snippets_backward(s.h_audio, s.h_visual, s.probs, pb.p_audio,
                                            pb.p_visual, params.mmil, grads->mmil);
  if (params.config.pool == PoolMode::Attentive) {
    dh.audio += pb.h_audio;
    dh.visual += pb.h_visual;
  }
  ProjectedInputs df{std::move(dh.audio), std::move(dh.visual)};
  if (params.config.temporal == TemporalMode::Han) {
    df = han_backward(s.han, df.audio, df.visual, params.han, grads->han);
  }
  project_inputs_backward(bag, df, params.han, grads->han);
  return b;
}

}  // namespace avvp
