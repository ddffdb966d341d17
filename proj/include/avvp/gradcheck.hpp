#pragma once

#include "avvp/model.hpp"

namespace avvp {

// A random instance of the full differentiable path: projections, HAN,
// shared classifier, pooling and the configured loss, averaged over a batch.
struct ModelGradCheckSpec {
  std::size_t steps = 4;
  std::size_t width = 8;
  std::size_t d_audio = 6;
  std::size_t d_visual = 10;
  std::size_t classes = 3;
  std::size_t batch = 2;
  std::uint64_t seed = 1;
  double epsilon = 1e-5;
  TemporalMode temporal = TemporalMode::Han;
  PoolMode pool = PoolMode::Attentive;
  bool learned_qk = false;
  LossConfig loss;
};

struct ModelGradCheckResult {
  GradCheckReport report;
  std::size_t parameters = 0;
  double loss = 0.0;
  double seconds = 0.0;
};

ModelGradCheckResult run_model_grad_check(const ModelGradCheckSpec& spec);

// The random dataset run_model_grad_check differentiates through.
Dataset grad_check_dataset(const ModelGradCheckSpec& spec);

}  // namespace avvp
