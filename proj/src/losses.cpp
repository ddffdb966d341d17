#include "avvp/losses.hpp"

#include "exact_decimal.hpp"

namespace avvp {

std::string_view loss_mode_name(LossMode m) noexcept {
  switch (m) {
    case LossMode::WslOnly: return "wsl";
    case LossMode::GuidedOnly: return "g";
    case LossMode::Both: return "both";
  }
  return "unknown";
}

LossMode parse_loss_mode(std::string_view s) {
  if (s == "wsl") return LossMode::WslOnly;
  if (s == "g") return LossMode::GuidedOnly;
  if (s == "both") return LossMode::Both;
  throw InvalidArgument("unknown loss mode '" + std::string(s) + "'");
}

Vector smooth_labels(std::span<const double> y, double eps, std::size_t k) {
  if (k <= 1) throw InvalidArgument("label smoothing needs K > 1");
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("label smoothing eps must lie in [0, 1)");
  // For 0/1 labels the targets eps/K and 1 - eps + eps/K are formed exactly
  // from the decimal value of eps, so eps=0.2, K=10 gives 0.02 and 0.82.
  const auto [m, e] = detail::to_decimal(eps);
  detail::BigInt scale = 1;
  for (long i = 0; i < -e; ++i) scale *= 10;
  detail::BigInt eps_num = m;  // eps = eps_num / scale
  for (long i = 0; i < e; ++i) eps_num *= 10;
  const detail::BigInt kk = k;
  const double negative = detail::quotient_to_double(eps_num, scale * kk);
  const double positive = detail::quotient_to_double(scale * kk - eps_num * (kk - 1), scale * kk);

  Vector out(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (y[c] == 0.0) {
      out[c] = negative;
    } else if (y[c] == 1.0) {
      out[c] = positive;
    } else {
      out[c] = (1.0 - eps) * y[c] + eps / static_cast<double>(k);
    }
  }
  return out;
}

namespace {

Vector guided_targets(std::span<const double> weak, double eps, const SmoothingConfig& cfg) {
  if (!cfg.enabled) return Vector(weak.begin(), weak.end());
  return smooth_labels(weak, eps, cfg.resolved_k(weak.size()));
}

}  // namespace

double wsl_loss(std::span<const double> video_probs, std::span<const double> weak,
                bool positive_only) {
  return binary_cross_entropy(video_probs, weak, positive_only);
}

std::pair<double, double> guided_loss(std::span<const double> audio_probs,
                                      std::span<const double> visual_probs,
                                      std::span<const double> weak, const SmoothingConfig& cfg) {
  const Vector ya = guided_targets(weak, cfg.eps_audio, cfg);
  const Vector yv = guided_targets(weak, cfg.eps_visual, cfg);
  return {binary_cross_entropy(audio_probs, ya), binary_cross_entropy(visual_probs, yv)};
}

LossBreakdown total_loss(const PoolOutput& pool, std::span<const double> weak,
                         const LossConfig& cfg) {
  LossBreakdown b;
  if (cfg.mode != LossMode::GuidedOnly) {
    b.l_wsl = wsl_loss(pool.video, weak, cfg.wsl_positive_only);
  }
  if (cfg.mode != LossMode::WslOnly) {
    std::tie(b.l_g_audio, b.l_g_visual) = guided_loss(pool.audio, pool.visual, weak, cfg.smoothing);
  }
  // Grouped so that mode=both equals the sum of the other two modes exactly.
  b.total = b.l_wsl + (b.l_g_audio + b.l_g_visual);
  return b;
}

PoolGrads total_loss_grad(const PoolOutput& pool, std::span<const double> weak,
                          const LossConfig& cfg) {
  const std::size_t classes = weak.size();
  PoolGrads g{Vector(classes, 0.0), Vector(classes, 0.0), Vector(classes, 0.0)};
  if (cfg.mode != LossMode::GuidedOnly) {
    g.video = binary_cross_entropy_grad(pool.video, weak, cfg.wsl_positive_only);
  }
  if (cfg.mode != LossMode::WslOnly) {
    g.audio = binary_cross_entropy_grad(pool.audio,
                                        guided_targets(weak, cfg.smoothing.eps_audio, cfg.smoothing));
    g.visual = binary_cross_entropy_grad(
        pool.visual, guided_targets(weak, cfg.smoothing.eps_visual, cfg.smoothing));
  }
  return g;
}

}  // namespace avvp
