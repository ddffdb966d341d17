#include "avvp/kernels.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace avvp::kernels {

namespace {

int g_default_threads = 0;

void add(LossBreakdown& acc, const LossBreakdown& b) {
  acc.l_wsl += b.l_wsl;
  acc.l_g_audio += b.l_g_audio;
  acc.l_g_visual += b.l_g_visual;
  acc.total += b.total;
}

LossBreakdown mean_of(LossBreakdown acc, std::size_t n) {
  const double inv = 1.0 / static_cast<double>(n);
  acc.l_wsl *= inv;
  acc.l_g_audio *= inv;
  acc.l_g_visual *= inv;
  acc.total *= inv;
  return acc;
}

void check_batch(const Dataset& data, std::span<const std::size_t> batch) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  for (std::size_t i : batch) {
    if (i >= data.size()) throw InvalidArgument("batch index out of range");
  }
}

}  // namespace

LossBreakdown batch_gradient_serial(const ModelParams& params, const Dataset& data,
                                    std::span<const std::size_t> batch, const LossConfig& loss,
                                    ModelParams& grads) {
  check_batch(data, batch);
  zero(grads);
  // Per-video gradients summed in batch order, as the parallel kernel does.
  ModelParams g = params.zeros_like();
  LossBreakdown acc;
  for (std::size_t i : batch) {
    zero(g);
    add(acc, video_loss(params, data.bags[i], data.weak[i].as_targets(), loss, &g));
    accumulate(grads, g);
  }
  scale(grads, 1.0 / static_cast<double>(batch.size()));
  return mean_of(acc, batch.size());
}

std::vector<ModelParams>& GradientWorkspace::buffers(const ModelParams& shape, std::size_t n) {
  const bool fits = !buffers_.empty() && buffers_.front().config == shape.config &&
                    buffers_.front().han.learned_qk == shape.han.learned_qk;
  if (!fits) buffers_.clear();
  while (buffers_.size() < n) buffers_.push_back(shape.zeros_like());
  return buffers_;
}

LossBreakdown batch_gradient_parallel(const ModelParams& params, const Dataset& data,
                                      std::span<const std::size_t> batch,
                                      const LossConfig& loss, ModelParams& grads,
                                      GradientWorkspace& workspace) {
  check_batch(data, batch);
  auto& buffers = workspace.buffers(params, batch.size());
  std::vector<LossBreakdown> losses(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
  const auto n = static_cast<long>(batch.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (long j = 0; j < n; ++j) {
    try {
      const std::size_t i = batch[static_cast<std::size_t>(j)];
      ModelParams& g = buffers[static_cast<std::size_t>(j)];
      zero(g);
      losses[static_cast<std::size_t>(j)] =
          video_loss(params, data.bags[i], data.weak[i].as_targets(), loss, &g);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  zero(grads);
  LossBreakdown acc;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    accumulate(grads, buffers[j]);
    add(acc, losses[j]);
  }
  scale(grads, 1.0 / static_cast<double>(batch.size()));
  return mean_of(acc, batch.size());
}

std::vector<VideoPrediction> predict_serial(const ModelParams& params,
                                            std::span<const VideoBag> bags) {
  std::vector<VideoPrediction> out;
  out.reserve(bags.size());
  for (const auto& bag : bags) out.push_back(predict(params, bag));
  return out;
}

std::vector<VideoPrediction> predict_parallel(const ModelParams& params,
                                              std::span<const VideoBag> bags) {
  std::vector<VideoPrediction> out(bags.size());
  std::vector<std::exception_ptr> errors(bags.size());
  const auto n = static_cast<long>(bags.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long j = 0; j < n; ++j) {
    try {
      out[static_cast<std::size_t>(j)] = predict(params, bags[static_cast<std::size_t>(j)]);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void set_thread_limit(int n) {
#ifdef _OPENMP
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : g_default_threads);
#else
  (void)n;
#endif
}

int thread_limit() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace avvp::kernels
