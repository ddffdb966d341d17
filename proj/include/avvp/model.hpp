#pragma once

#include <array>
#include <string>

#include "avvp/datamodel.hpp"
#include "avvp/han.hpp"
#include "avvp/losses.hpp"
#include "avvp/mmil.hpp"

namespace avvp {

enum class TemporalMode { None, Han };

std::string_view temporal_mode_name(TemporalMode m) noexcept;  // none | han
TemporalMode parse_temporal_mode(std::string_view s);

struct ModelConfig {
  std::size_t d_audio = 128;
  std::size_t d_visual = 512;
  std::size_t width = 512;
  std::size_t classes = 25;
  TemporalMode temporal = TemporalMode::Han;
  PoolMode pool = PoolMode::Attentive;
  bool learned_qk = false;

  bool operator==(const ModelConfig&) const = default;
};

// Projections -> HAN -> shared classifier -> MMIL pooling.
struct ModelParams {
  ModelConfig config;
  HanParams han;
  MmilParams mmil;

  static ModelParams create(const ModelConfig& cfg, std::uint64_t seed);
  ModelParams zeros_like() const;

  // Flat views of every learnable tensor, in a fixed order.
  std::vector<ParamSlot> slots();
  std::size_t parameter_count() const;

  bool operator==(const ModelParams&) const = default;
};

void zero(ModelParams& grads);
// dst += src, slot by slot.
void accumulate(ModelParams& dst, ModelParams& src);
void scale(ModelParams& grads, double factor);
double global_norm(ModelParams& grads);
// FNV-1a over the raw parameter bytes.
std::uint64_t checksum(ModelParams& params);

struct VideoPrediction {
  SnippetProbs probs;
  PoolOutput pool;
  std::array<AttentionMap, 4> attention;  // empty when temporal = none
};

VideoPrediction predict(const ModelParams& params, const VideoBag& bag);

// Loss for one video; when grads is non-null the parameter gradients are
// accumulated into it.
LossBreakdown video_loss(const ModelParams& params, const VideoBag& bag,
                         std::span<const double> weak, const LossConfig& loss,
                         ModelParams* grads = nullptr);

}  // namespace avvp
