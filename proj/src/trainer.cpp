#include "avvp/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "avvp/config.hpp"
#include "exact_decimal.hpp"

namespace avvp {

void TrainConfig::validate() const {
  if (batch_size == 0 || epochs == 0 || lr_step_epochs == 0) {
    throw InvalidArgument("batch_size, epochs and lr_step_epochs must be positive");
  }
  if (!(lr0 > 0.0)) throw InvalidArgument("lr0 must be > 0");
  if (!(lr_decay >= 0.0)) throw InvalidArgument("lr_decay must be >= 0");
  if (!(clip_norm >= 0.0)) throw InvalidArgument("clip_norm must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  const std::size_t k = epoch / cfg.lr_step_epochs;
  if (k == 0 || cfg.lr_decay == 1.0) return cfg.lr0;
  if (cfg.lr_decay == 0.0) return 0.0;
  auto [m_lr, e_lr] = detail::to_decimal(cfg.lr0);
  auto [m_decay, e_decay] = detail::to_decimal(cfg.lr_decay);
  detail::BigInt m = m_lr;
  for (std::size_t i = 0; i < k; ++i) m *= m_decay;
  return detail::decimal_to_double(m, e_lr + static_cast<long>(k) * e_decay);
}

// ---- checkpoints --------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[4] = {'A', 'V', 'C', 'K'};

class Writer {
 public:
  template <class T>
  void put(T v) {
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>) {
      std::memcpy(&bits, &v, 8);
    } else {
      bits = static_cast<std::uint64_t>(v);
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>(bits >> (8 * i)));
  }
  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out.append(s);
  }
  void put_doubles(std::span<const double> v) {
    for (double x : v) put<double>(x);
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      double d;
      std::memcpy(&d, &bits, 8);
      return d;
    } else {
      return static_cast<T>(bits);
    }
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void get_doubles(std::span<double> v) {
    need(v.size() * 8);
    for (double& x : v) x = get<double>();
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }
  std::size_t pos() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("truncated_checkpoint",
                        "checkpoint truncated at offset " + std::to_string(pos_));
    }
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(Checkpoint& ckpt) {
  Writer w;
  w.out.append(kCheckpointMagic, 4);
  w.put<std::uint32_t>(kCheckpointVersion);
  const ModelConfig& mc = ckpt.params.config;
  w.put<std::uint64_t>(mc.d_audio);
  w.put<std::uint64_t>(mc.d_visual);
  w.put<std::uint64_t>(mc.width);
  w.put<std::uint64_t>(mc.classes);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(mc.temporal));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(mc.pool));
  w.put<std::uint8_t>(mc.learned_qk ? 1 : 0);
  w.put<std::uint64_t>(ckpt.epochs_done);
  w.put<std::uint64_t>(ckpt.adam.step);
  w.put_string(ckpt.config_digest);
  auto slots = ckpt.params.slots();
  if (ckpt.adam.first_moment.size() != slots.size()) {
    throw ShapeError("checkpoint: optimizer state does not match parameters");
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(slots.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    w.put_string(slots[i].name);
    w.put<std::uint64_t>(slots[i].value.size());
    w.put_doubles(slots[i].value);
    w.put_doubles(ckpt.adam.first_moment[i]);
    w.put_doubles(ckpt.adam.second_moment[i]);
  }
  return std::move(w.out);
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("bad_magic", "not a checkpoint: bad magic bytes at offset 0");
  }
  Reader r(bytes.substr(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("incompatible_checkpoint", "checkpoint version " + std::to_string(version) +
                                                     " is not supported (expected " +
                                                     std::to_string(kCheckpointVersion) + ")");
  }
  ModelConfig mc;
  mc.d_audio = r.get<std::uint64_t>();
  mc.d_visual = r.get<std::uint64_t>();
  mc.width = r.get<std::uint64_t>();
  mc.classes = r.get<std::uint64_t>();
  const auto temporal = r.get<std::uint8_t>();
  const auto pool = r.get<std::uint8_t>();
  const auto learned = r.get<std::uint8_t>();
  if (temporal > 1 || pool > 2 || learned > 1) {
    throw FormatError("bad_checkpoint", "checkpoint model config has invalid enum values");
  }
  mc.temporal = static_cast<TemporalMode>(temporal);
  mc.pool = static_cast<PoolMode>(pool);
  mc.learned_qk = learned != 0;

  Checkpoint ckpt;
  ckpt.epochs_done = r.get<std::uint64_t>();
  const auto step = r.get<std::uint64_t>();
  ckpt.config_digest = r.get_string();
  ckpt.params = ModelParams::create(mc, 0);
  auto slots = ckpt.params.slots();
  ckpt.adam = make_adam_state(slots);
  ckpt.adam.step = step;
  const auto n = r.get<std::uint32_t>();
  if (n != slots.size()) {
    throw FormatError("bad_checkpoint", "checkpoint has " + std::to_string(n) +
                                            " tensors, model expects " +
                                            std::to_string(slots.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = r.get_string();
    const auto count = r.get<std::uint64_t>();
    if (name != slots[i].name || count != slots[i].value.size()) {
      throw FormatError("bad_checkpoint", "checkpoint tensor '" + name + "' does not match '" +
                                              slots[i].name + "'");
    }
    r.get_doubles(slots[i].value);
    r.get_doubles(ckpt.adam.first_moment[i]);
    r.get_doubles(ckpt.adam.second_moment[i]);
  }
  if (!r.done()) {
    throw FormatError("bad_checkpoint",
                      "trailing bytes after offset " + std::to_string(r.pos() + 4));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, Checkpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

// ---- training ---------------------------------------------------------------------

std::vector<SnippetDecisions> decide_all(const ModelParams& params, const Dataset& data,
                                         double threshold, bool parallel) {
  const auto preds = parallel ? kernels::predict_parallel(params, data.bags)
                              : kernels::predict_serial(params, data.bags);
  std::vector<SnippetDecisions> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(threshold_probs(p.probs, threshold));
  return out;
}

MetricReport evaluate_model(const ModelParams& params, const Dataset& data, double threshold,
                            bool parallel) {
  if (data.dense.size() != data.bags.size()) {
    std::string ids;
    for (std::size_t i = data.dense.size(); i < data.bags.size(); ++i) {
      ids += (ids.empty() ? "" : ", ") + data.bags[i].video_id;
    }
    throw InvalidArgument("missing dense annotations for: " + ids);
  }
  const auto decisions = decide_all(params, data, threshold, parallel);
  return parallel ? evaluate_parallel(decisions, data.dense)
                  : evaluate_serial(decisions, data.dense);
}

TrainResult train(const Dataset& data, const ModelConfig& model, const TrainConfig& cfg,
                  const Dataset* validation, const TrainObserver& observer,
                  const Checkpoint* resume) {
  cfg.validate();
  validate_training_set(data);
  if (model.classes != data.taxonomy.size()) {
    throw ShapeError("model has " + std::to_string(model.classes) + " classes, dataset has " +
                     std::to_string(data.taxonomy.size()));
  }

  TrainResult result;
  Checkpoint& state = result.final_state;
  if (resume) {
    if (!(resume->params.config == model)) {
      throw InvalidArgument("resume checkpoint was trained with a different model config");
    }
    state = *resume;
  } else {
    state.params = ModelParams::create(model, cfg.seed);
    state.adam = make_adam_state(state.params.slots());
  }
  state.config_digest = config_digest(model, cfg);

  ModelParams grads = state.params.zeros_like();
  kernels::GradientWorkspace workspace;
  double best_score = -1.0;

  for (std::size_t epoch = state.epochs_done; epoch < cfg.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr_at(epoch, cfg);

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffler(mix_seed(cfg.seed, 0x5100 + epoch));
    shuffler.shuffle(order);

    std::size_t step = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const LossBreakdown loss =
          cfg.parallel ? kernels::batch_gradient_parallel(state.params, data, batch, cfg.loss,
                                                          grads, workspace)
                       : kernels::batch_gradient_serial(state.params, data, batch, cfg.loss, grads);
      if (!std::isfinite(loss.total)) {
        throw DivergedError("loss is not finite at epoch " + std::to_string(epoch) + " step " +
                            std::to_string(step));
      }
      if (cfg.clip_norm > 0.0) {
        const double norm = global_norm(grads);
        if (norm > cfg.clip_norm) scale(grads, cfg.clip_norm / norm);
      }
      adam_step(state.params.slots(), grads.slots(), state.adam, record.lr);

      const double w = static_cast<double>(batch.size()) / static_cast<double>(data.size());
      record.mean_loss.l_wsl += loss.l_wsl * w;
      record.mean_loss.l_g_audio += loss.l_g_audio * w;
      record.mean_loss.l_g_visual += loss.l_g_visual * w;
      record.mean_loss.total += loss.total * w;

      StepRecord sr{epoch, step, loss};
      if (observer.on_step) observer.on_step(sr);
      result.steps.push_back(sr);
    }
    state.epochs_done = epoch + 1;

    const bool last = epoch + 1 == cfg.epochs;
    if (validation && cfg.eval_interval > 0 && ((epoch + 1) % cfg.eval_interval == 0 || last)) {
      record.validation = evaluate_model(state.params, *validation, cfg.threshold, cfg.parallel);
      const double score = record.validation->segment_f[kRowTypeAV];
      if (score > best_score) {
        best_score = score;
        result.best = state;
        result.best_epoch = epoch;
      }
    }
    if (observer.on_epoch) observer.on_epoch(record, state);
    result.history.push_back(std::move(record));
  }
  return result;
}

}  // namespace avvp
