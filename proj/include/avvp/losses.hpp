#pragma once

#include "avvp/mmil.hpp"
#include "avvp/numeric.hpp"

namespace avvp {

enum class LossMode { WslOnly, GuidedOnly, Both };

std::string_view loss_mode_name(LossMode m) noexcept;  // wsl | g | both
LossMode parse_loss_mode(std::string_view s);

struct SmoothingConfig {
  double eps_audio = 0.1;
  double eps_visual = 0.1;
  std::size_t k = 0;  // 0 means "number of classes"
  // When false the guided loss uses the hard weak labels directly.
  bool enabled = true;

  std::size_t resolved_k(std::size_t classes) const noexcept { return k == 0 ? classes : k; }
};

struct LossConfig {
  LossMode mode = LossMode::Both;
  SmoothingConfig smoothing;
  // Drop the (1-y)log(1-p) term of the weak-supervision loss.
  bool wsl_positive_only = false;
};

struct LossBreakdown {
  double l_wsl = 0.0;
  double l_g_audio = 0.0;
  double l_g_visual = 0.0;
  double total = 0.0;
};

// (1 - eps) * y + eps / K, elementwise.
Vector smooth_labels(std::span<const double> y, double eps, std::size_t k);

double wsl_loss(std::span<const double> video_probs, std::span<const double> weak,
                bool positive_only = false);

std::pair<double, double> guided_loss(std::span<const double> audio_probs,
                                      std::span<const double> visual_probs,
                                      std::span<const double> weak, const SmoothingConfig& cfg);

LossBreakdown total_loss(const PoolOutput& pool, std::span<const double> weak,
                         const LossConfig& cfg);

// dL/d(pool.video, pool.audio, pool.visual) for total_loss. Disabled terms
// contribute zero.
PoolGrads total_loss_grad(const PoolOutput& pool, std::span<const double> weak,
                          const LossConfig& cfg);

}  // namespace avvp
