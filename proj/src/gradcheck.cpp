#include "avvp/gradcheck.hpp"

#include <chrono>
#include <numeric>

#include "avvp/kernels.hpp"

namespace avvp {

Dataset grad_check_dataset(const ModelGradCheckSpec& spec) {
  Rng rng(mix_seed(spec.seed, 3));
  Dataset data;
  data.taxonomy = Taxonomy::synthetic(spec.classes);
  for (std::size_t b = 0; b < spec.batch; ++b) {
    VideoBag bag{"gc_" + std::to_string(b), Matrix(spec.steps, spec.d_audio),
                 Matrix(spec.steps, spec.d_visual)};
    for (double& x : bag.audio.values()) x = rng.normal();
    for (double& x : bag.visual.values()) x = rng.normal();
    WeakLabel w{bag.video_id, std::vector<std::uint8_t>(spec.classes, 0)};
    for (auto& c : w.classes) c = rng.uniform() < 0.5;
    w.classes[rng.below(spec.classes)] = 1;
    data.bags.push_back(std::move(bag));
    data.weak.push_back(std::move(w));
  }
  return data;
}

ModelGradCheckResult run_model_grad_check(const ModelGradCheckSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset data = grad_check_dataset(spec);
  ModelConfig mc{spec.d_audio, spec.d_visual, spec.width, spec.classes,
                 spec.temporal, spec.pool,    spec.learned_qk};
  ModelParams params = ModelParams::create(mc, spec.seed);
  ModelParams grads = params.zeros_like();

  std::vector<std::size_t> batch(spec.batch);
  std::iota(batch.begin(), batch.end(), std::size_t{0});

  ModelGradCheckResult result;
  result.loss = kernels::batch_gradient_serial(params, data, batch, spec.loss, grads).total;
  result.parameters = params.parameter_count();

  auto loss = [&] {
    double sum = 0.0;
    for (std::size_t i : batch) {
      sum += video_loss(params, data.bags[i], data.weak[i].as_targets(), spec.loss).total;
    }
    return sum / static_cast<double>(batch.size());
  };
  auto param_slots = params.slots();
  auto grad_slots = grads.slots();
  result.report = grad_check(loss, param_slots, grad_slots, spec.epsilon);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace avvp
