#pragma once

#include <vector>

#include "avvp/model.hpp"

// Batch-level kernels. Each has a straightforward serial reference and an
// OpenMP version that parallelises over videos. The OpenMP versions reduce
// per-video results in batch order, so their output does not depend on the
// thread count.
namespace avvp::kernels {

// Mean loss over the batch; grads receives the mean gradient (overwritten).
LossBreakdown batch_gradient_serial(const ModelParams& params, const Dataset& data,
                                    std::span<const std::size_t> batch, const LossConfig& loss,
                                    ModelParams& grads);

// Per-video gradient buffers, reused across steps.
class GradientWorkspace {
 public:
  std::vector<ModelParams>& buffers(const ModelParams& shape, std::size_t n);

 private:
  std::vector<ModelParams> buffers_;
};

LossBreakdown batch_gradient_parallel(const ModelParams& params, const Dataset& data,
                                      std::span<const std::size_t> batch,
                                      const LossConfig& loss, ModelParams& grads,
                                      GradientWorkspace& workspace);

std::vector<VideoPrediction> predict_serial(const ModelParams& params,
                                            std::span<const VideoBag> bags);
std::vector<VideoPrediction> predict_parallel(const ModelParams& params,
                                              std::span<const VideoBag> bags);

// Caps OpenMP parallelism; n <= 0 restores the runtime default.
void set_thread_limit(int n);
int thread_limit();

}  // namespace avvp::kernels
