#include <gtest/gtest.h>

#include <cmath>

#include "avvp/losses.hpp"

using namespace avvp;

namespace {

PoolOutput make_pool(Vector video, Vector audio, Vector visual) {
  PoolOutput p;
  p.video_raw = video;
  p.video = video;
  p.audio = std::move(audio);
  p.visual = std::move(visual);
  p.clamped.assign(p.video.size(), 0);
  return p;
}

}  // namespace

TEST(Smoothing, PositiveAndNegativeTargets) {
  const Vector t = smooth_labels(std::vector<double>{1.0, 0.0}, 0.2, 10);
  EXPECT_EQ(t[0], 0.82);
  EXPECT_EQ(t[1], 0.02);
}

TEST(Smoothing, ExactForDecimalSettings) {
  const std::vector<double> y{1.0, 0.0};
  EXPECT_EQ(smooth_labels(y, 0.1, 25), (Vector{0.904, 0.004}));
  EXPECT_EQ(smooth_labels(y, 0.3, 4), (Vector{0.775, 0.075}));
  EXPECT_EQ(smooth_labels(y, 0.1, 3)[1], 0.1 / 3);
  EXPECT_EQ(smooth_labels(std::vector<double>{0.5}, 0.2, 10)[0], 0.8 * 0.5 + 0.02);
}

TEST(Smoothing, ZeroEpsIsIdentity) {
  const std::vector<double> y{1, 0, 0, 1, 1};
  const Vector t = smooth_labels(y, 0.0, 5);
  EXPECT_EQ(t, Vector(y.begin(), y.end()));
}

TEST(Smoothing, InvalidArguments) {
  const std::vector<double> y{1, 0};
  EXPECT_THROW(smooth_labels(y, 0.1, 1), InvalidArgument);
  EXPECT_THROW(smooth_labels(y, 1.0, 4), InvalidArgument);
  EXPECT_THROW(smooth_labels(y, -0.1, 4), InvalidArgument);
}

TEST(Smoothing, PositivesStayAboveNegatives) {
  for (double eps : {0.0, 0.3, 0.6, 0.99}) {
    for (std::size_t k : {2u, 3u, 25u}) {
      const Vector t = smooth_labels(std::vector<double>{1.0, 0.0}, eps, k);
      EXPECT_GT(t[0], t[1]);
    }
  }
}

TEST(WslLoss, KnownValues) {
  EXPECT_NEAR(wsl_loss(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}),
              1.38629436111989061883, 1e-15);
  EXPECT_LT(wsl_loss(std::vector<double>{1.0 - kProbClamp, kProbClamp},
                     std::vector<double>{1.0, 0.0}),
            1e-6);
}

TEST(WslLoss, NonNegativeOnRandomInputs) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p(6), y(6);
    for (double& x : p) x = rng.uniform();
    for (double& x : y) x = rng.uniform() < 0.5 ? 1.0 : 0.0;
    ASSERT_GE(wsl_loss(p, y), 0.0);
    ASSERT_GE(wsl_loss(p, y, true), 0.0);
  }
}

TEST(GuidedLoss, MinimumIsEntropyOfSmoothedTarget) {
  SmoothingConfig cfg{0.2, 0.2, 10};
  const std::vector<double> y{1.0};
  const std::vector<double> p{0.82};
  const auto [la, lv] = guided_loss(p, p, y, cfg);
  // H(0.82) = -0.82 ln 0.82 - 0.18 ln 0.18
  EXPECT_NEAR(la, 0.471393486810094170545716536728, 1e-15);
  EXPECT_EQ(la, lv);
  const auto [la2, lv2] = guided_loss(std::vector<double>{0.80}, std::vector<double>{0.84}, y, cfg);
  EXPECT_GT(la2, la);
  EXPECT_GT(lv2, la);
}

TEST(GuidedLoss, ZeroSmoothingUsesHardLabels) {
  SmoothingConfig cfg{0.0, 0.0, 0};
  const std::vector<double> y{1.0, 0.0, 1.0};
  const std::vector<double> pa{0.7, 0.2, 0.4}, pv{0.3, 0.1, 0.9};
  const auto [la, lv] = guided_loss(pa, pv, y, cfg);
  EXPECT_EQ(la, binary_cross_entropy(pa, y));
  EXPECT_EQ(lv, binary_cross_entropy(pv, y));
}

TEST(TotalLoss, ModesAreAdditive) {
  const PoolOutput pool = make_pool({0.6, 0.3, 0.8}, {0.5, 0.2, 0.7}, {0.4, 0.35, 0.9});
  const std::vector<double> y{1.0, 0.0, 1.0};
  LossConfig cfg;
  cfg.mode = LossMode::WslOnly;
  const LossBreakdown w = total_loss(pool, y, cfg);
  cfg.mode = LossMode::GuidedOnly;
  const LossBreakdown g = total_loss(pool, y, cfg);
  cfg.mode = LossMode::Both;
  const LossBreakdown b = total_loss(pool, y, cfg);
  EXPECT_EQ(w.l_g_audio, 0.0);
  EXPECT_EQ(w.l_g_visual, 0.0);
  EXPECT_EQ(w.total, w.l_wsl);
  EXPECT_EQ(g.l_wsl, 0.0);
  EXPECT_EQ(b.total, w.total + g.total);
  EXPECT_NEAR(b.total, b.l_wsl + b.l_g_audio + b.l_g_visual, 1e-14);
}

TEST(TotalLoss, GradientMatchesFiniteDifferences) {
  PoolOutput pool = make_pool({0.6, 0.3, 0.8}, {0.5, 0.2, 0.7}, {0.4, 0.35, 0.9});
  const std::vector<double> y{1.0, 0.0, 1.0};
  LossConfig cfg;
  cfg.smoothing = {0.1, 0.3, 0};
  PoolGrads g = total_loss_grad(pool, y, cfg);
  auto f = [&] {
    pool.video_raw = pool.video;
    return total_loss(pool, y, cfg).total;
  };
  std::vector<ParamSlot> p{{"video", pool.video}, {"audio", pool.audio}, {"visual", pool.visual}};
  std::vector<ParamSlot> a{{"video", g.video}, {"audio", g.audio}, {"visual", g.visual}};
  EXPECT_LT(grad_check(f, p, a, 1e-6).max_rel_error, 1e-6);
}

TEST(LossMode, NamesRoundTrip) {
  for (LossMode m : {LossMode::WslOnly, LossMode::GuidedOnly, LossMode::Both}) {
    EXPECT_EQ(parse_loss_mode(loss_mode_name(m)), m);
  }
  EXPECT_THROW(parse_loss_mode("l2"), InvalidArgument);
}
