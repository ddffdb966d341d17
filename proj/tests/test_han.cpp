#include <gtest/gtest.h>

#include <cmath>

#include "avvp/han.hpp"
#include "oracles.hpp"

using namespace avvp;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.values()) x = scale * rng.normal();
  return m;
}

HanParams identity_params(std::size_t d) {
  Rng rng(0);
  HanParams p = HanParams::create(d, d, d, false, rng);
  p.audio_proj.weight.fill(0.0);
  p.visual_proj.weight.fill(0.0);
  for (std::size_t i = 0; i < d; ++i) p.audio_proj.weight(i, i) = p.visual_proj.weight(i, i) = 1.0;
  return p;
}

}  // namespace

TEST(Attend, SingleStepIsIdentity) {
  Matrix q(1, 3, 0.7), kv(1, 3);
  kv(0, 0) = 1.0, kv(0, 1) = -2.0, kv(0, 2) = 0.5;
  const AttendResult r = attend(q, kv);
  EXPECT_EQ(r.map(0, 0), 1.0);
  EXPECT_EQ(r.out, kv);
}

TEST(Attend, IdenticalKeysGiveUniformRows) {
  Rng rng(2);
  Matrix q = random_matrix(4, 3, rng);
  Matrix kv(4, 3);
  for (std::size_t t = 0; t < 4; ++t) kv(t, 0) = 1.5, kv(t, 1) = -0.5, kv(t, 2) = 2.0;
  const AttendResult r = attend(q, kv);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t s = 0; s < 4; ++s) EXPECT_DOUBLE_EQ(r.map(t, s), 0.25);
    EXPECT_NEAR(r.out(t, 0), 1.5, 1e-15);
    EXPECT_NEAR(r.out(t, 2), 2.0, 1e-15);
  }
}

TEST(Attend, HandComputedTwoStepCase) {
  const Matrix seq(2, 1, std::vector<double>{1.0, 2.0});
  const AttendResult r = attend(seq, seq);
  EXPECT_NEAR(r.map(0, 0), 0.268941421369995121, 1e-15);
  EXPECT_NEAR(r.map(0, 1), 0.731058578630004879, 1e-15);
  EXPECT_NEAR(r.out(0, 0), 1.73105857863000488, 1e-15);
}

TEST(Attend, WidthMismatchThrows) {
  EXPECT_THROW(attend(Matrix(2, 3), Matrix(2, 4)), ShapeError);
}

TEST(Han, SingleStepClosedForm) {
  HanParams p = identity_params(3);
  const Matrix fa(1, 3, std::vector<double>{1.0, 2.0, 3.0});
  const Matrix fv(1, 3, std::vector<double>{-1.0, 0.5, 4.0});
  const HanOutput h = han_forward(fa, fv, p);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(h.audio(0, j), 2.0 * fa(0, j) + fv(0, j));
    EXPECT_EQ(h.visual(0, j), 2.0 * fv(0, j) + fa(0, j));
  }
}

TEST(Han, MatchesBruteForceEvaluation) {
  HanParams p = identity_params(4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Matrix fa = random_matrix(3, 4, rng), fv = random_matrix(3, 4, rng);
    const HanOutput h = han_forward(fa, fv, p);
    const Matrix ea = oracle::hybrid_attention(fa, fv), ev = oracle::hybrid_attention(fv, fa);
    for (std::size_t i = 0; i < ea.size(); ++i) {
      ASSERT_NEAR(h.audio.values()[i], ea.values()[i], 1e-10);
      ASSERT_NEAR(h.visual.values()[i], ev.values()[i], 1e-10);
    }
  }
}

TEST(Han, PermutationEquivariant) {
  HanParams p = identity_params(5);
  Rng rng(8);
  const Matrix fa = random_matrix(6, 5, rng), fv = random_matrix(6, 5, rng);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  Matrix pa(6, 5), pv(6, 5);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t j = 0; j < 5; ++j) pa(t, j) = fa(perm[t], j), pv(t, j) = fv(perm[t], j);
  }
  const HanOutput h = han_forward(fa, fv, p), hp = han_forward(pa, pv, p);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_NEAR(hp.audio(t, j), h.audio(perm[t], j), 1e-13);
      EXPECT_NEAR(hp.visual(t, j), h.visual(perm[t], j), 1e-13);
    }
  }
}

TEST(Han, AttentionRowsSumToOne) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = 1 + rng.below(16), d = 1 + rng.below(64);
    HanParams p = identity_params(d);
    const Matrix fa = random_matrix(T, d, rng, 3.0), fv = random_matrix(T, d, rng, 3.0);
    const HanOutput h = han_forward(fa, fv, p);
    for (const AttentionMap& m : h.maps) {
      for (std::size_t t = 0; t < T; ++t) {
        double s = 0.0;
        for (double w : m.row(t)) {
          ASSERT_GE(w, 0.0);
          s += w;
        }
        ASSERT_NEAR(s, 1.0, 1e-6);
      }
    }
  }
}

TEST(Han, SmallInputsApproachSkipPlusMeans) {
  HanParams p = identity_params(3);
  Rng rng(4);
  const Matrix fa = random_matrix(4, 3, rng, 1e-9), fv = random_matrix(4, 3, rng, 1e-9);
  const HanOutput h = han_forward(fa, fv, p);
  for (std::size_t j = 0; j < 3; ++j) {
    double ma = 0, mv = 0;
    for (std::size_t t = 0; t < 4; ++t) ma += fa(t, j) / 4, mv += fv(t, j) / 4;
    EXPECT_NEAR(h.audio(0, j), fa(0, j) + ma + mv, 1e-20);
    EXPECT_NE(h.audio(0, j), 0.0);
  }
}

TEST(Projection, IdentityAndBias) {
  HanParams p = identity_params(3);
  Rng rng(6);
  VideoBag bag{"v", random_matrix(2, 3, rng), random_matrix(2, 3, rng)};
  const ProjectedInputs in = project_inputs(bag, p);
  EXPECT_EQ(in.audio, bag.audio);
  EXPECT_EQ(in.visual, bag.visual);

  p.audio_proj.bias = {1.0, -2.0, 0.5};
  bag.audio.fill(0.0);
  const ProjectedInputs z = project_inputs(bag, p);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_EQ(z.audio(t, 0), 1.0);
    EXPECT_EQ(z.audio(t, 1), -2.0);
  }
  VideoBag wrong{"w", Matrix(2, 4), Matrix(2, 3)};
  EXPECT_THROW(project_inputs(wrong, p), ShapeError);
}

namespace {

double han_grad_check(bool learned_qk) {
  Rng rng(12);
  HanParams p = HanParams::create(5, 7, 4, learned_qk, rng);
  for (double& b : p.audio_proj.bias) b = rng.normal();
  VideoBag bag{"v", random_matrix(3, 5, rng), random_matrix(3, 7, rng)};
  const Matrix wa = random_matrix(3, 4, rng), wv = random_matrix(3, 4, rng);
  // Scalar loss: fixed random projection of both outputs.
  auto loss = [&] {
    const ProjectedInputs in = project_inputs(bag, p);
    const HanOutput h = han_forward(in.audio, in.visual, p);
    double s = 0.0;
    for (std::size_t i = 0; i < wa.size(); ++i) {
      s += wa.values()[i] * h.audio.values()[i] + wv.values()[i] * std::sin(h.visual.values()[i]);
    }
    return s;
  };
  HanParams g = p.zeros_like();
  HanCache cache;
  const ProjectedInputs in = project_inputs(bag, p);
  const HanOutput h = han_forward(in.audio, in.visual, p, &cache);
  Matrix gv = wv;
  for (std::size_t i = 0; i < gv.size(); ++i) gv.values()[i] *= std::cos(h.visual.values()[i]);
  const ProjectedInputs gin = han_backward(cache, wa, gv, p, g);
  project_inputs_backward(bag, gin, p, g);

  std::vector<ParamSlot> ps, gs;
  p.append_slots(ps, "han.");
  g.append_slots(gs, "han.");
  return grad_check(loss, ps, gs, 1e-5).max_rel_error;
}

}  // namespace

TEST(Han, GradientCheckRawAttention) { EXPECT_LT(han_grad_check(false), 1e-4); }

TEST(Han, GradientCheckLearnedQueryKey) { EXPECT_LT(han_grad_check(true), 1e-4); }
