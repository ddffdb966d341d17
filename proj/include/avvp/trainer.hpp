#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "avvp/kernels.hpp"
#include "avvp/metrics.hpp"
#include "avvp/model.hpp"

namespace avvp {

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t epochs = 40;
  double lr0 = 3e-4;
  double lr_decay = 0.1;
  std::size_t lr_step_epochs = 10;
  std::uint64_t seed = 0;
  LossConfig loss;
  // Global-norm gradient clipping; 0 disables.
  double clip_norm = 0.0;
  // Validate every N epochs; 0 disables.
  std::size_t eval_interval = 0;
  double threshold = 0.5;
  bool parallel = true;

  void validate() const;
};

/// Step decay: lr0 * lr_decay^floor(epoch / lr_step_epochs). The product is
/// formed in decimal from the shortest representations of lr0 and lr_decay
/// and rounded once, so 3e-4 decays to exactly 3e-5, 3e-6, ...
double lr_at(std::size_t epoch, const TrainConfig& cfg);

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  LossBreakdown loss;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  LossBreakdown mean_loss;
  std::optional<MetricReport> validation;
};

struct Checkpoint {
  ModelParams params;
  AdamState adam;
  std::size_t epochs_done = 0;
  std::string config_digest;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "AVCK", u32 version, model config, epoch, Adam step, digest, then per
// parameter slot: name, count, values, first and second moments. All
// integers and doubles little-endian; strings are u32-length-prefixed.
std::string serialize_checkpoint(Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TrainObserver {
  std::function<void(const StepRecord&)> on_step;
  // Called after each epoch with the live state.
  std::function<void(const EpochRecord&, Checkpoint&)> on_epoch;
};

struct TrainResult {
  Checkpoint final_state;
  std::vector<EpochRecord> history;
  std::vector<StepRecord> steps;
  // Best validation Type@AV (segment level) when validation ran.
  std::optional<Checkpoint> best;
  std::size_t best_epoch = 0;
};

// Deterministic in (data, configs): initialisation and per-epoch shuffles use
// separate seeded streams. With `resume`, training continues after
// resume->epochs_done and reproduces an uninterrupted run bit for bit.
TrainResult train(const Dataset& data, const ModelConfig& model, const TrainConfig& cfg,
                  const Dataset* validation = nullptr, const TrainObserver& observer = {},
                  const Checkpoint* resume = nullptr);

// Thresholded parses of every video in `data`.
std::vector<SnippetDecisions> decide_all(const ModelParams& params, const Dataset& data,
                                         double threshold, bool parallel = true);

// Scores params on an annotated dataset. Throws InvalidArgument naming the
// videos that lack annotations.
MetricReport evaluate_model(const ModelParams& params, const Dataset& data,
                            double threshold = 0.5, bool parallel = true);

}  // namespace avvp
