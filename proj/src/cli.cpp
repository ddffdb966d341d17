#include "avvp/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "avvp/config.hpp"
#include "avvp/gradcheck.hpp"
#include "avvp/kernels.hpp"
#include "avvp/metrics.hpp"
#include "avvp/trainer.hpp"

namespace avvp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : Error {
  explicit UsageError(const std::string& w) : Error("usage_error", w) {}
};

void require_fresh_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw UsageError(dir.string() + " exists and is not a directory");
  }
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw UsageError(dir.string() + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(dir);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
}

void apply_thread_cap() {
  if (const char* env = std::getenv("AVVP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) kernels::set_thread_limit(n);
  }
}

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// ---- synth ---------------------------------------------------------------------

struct SynthFlags {
  std::string out;
  std::string config;
  std::size_t test_videos = 0;
  bool force = false;
  SynthConfig cfg;
  CLI::App* cmd = nullptr;
};

void register_synth(CLI::App& app, SynthFlags& f) {
  auto* c = app.add_subcommand("synth", "Generate a synthetic planted-event dataset");
  f.cmd = c;
  c->add_option("--out", f.out, "Output dataset directory")->required();
  c->add_option("--config", f.config, "JSON file with synth settings (flags override)");
  c->add_option("--videos", f.cfg.n_videos, "Number of videos");
  c->add_option("--test-videos", f.test_videos,
                "Hold out this many extra videos; writes <out>/train and <out>/test");
  c->add_option("--snippets", f.cfg.steps, "Snippets (seconds) per video");
  c->add_option("--classes", f.cfg.classes, "Number of event classes");
  c->add_option("--d-audio", f.cfg.d_audio, "Audio feature width");
  c->add_option("--d-visual", f.cfg.d_visual, "Visual feature width");
  c->add_option("--noise", f.cfg.noise_sigma, "Gaussian noise sigma");
  c->add_option("--bias", f.cfg.modality_bias, "Modality bias in [0,1] toward audio");
  c->add_option("--gain", f.cfg.signal_gain, "Prototype signal gain");
  c->add_option("--max-classes", f.cfg.max_classes_per_video, "Max classes per video");
  c->add_option("--p-audio-only", f.cfg.p_audio_only, "Probability an event is audio-only");
  c->add_option("--p-visual-only", f.cfg.p_visual_only, "Probability an event is visual-only");
  c->add_option("--seed", f.cfg.seed, "Random seed");
  c->add_flag("--force", f.force, "Write into a non-empty directory");
}

SynthConfig resolve_synth(const SynthFlags& f) {
  SynthConfig cfg;
  if (!f.config.empty()) cfg = read_json_file(f.config).get<SynthConfig>();
  const SynthConfig& flags = f.cfg;
  auto given = [&](const char* name) { return f.cmd->count(name) > 0; };
  if (given("--videos")) cfg.n_videos = flags.n_videos;
  if (given("--snippets")) cfg.steps = flags.steps;
  if (given("--classes")) cfg.classes = flags.classes;
  if (given("--d-audio")) cfg.d_audio = flags.d_audio;
  if (given("--d-visual")) cfg.d_visual = flags.d_visual;
  if (given("--noise")) cfg.noise_sigma = flags.noise_sigma;
  if (given("--bias")) cfg.modality_bias = flags.modality_bias;
  if (given("--gain")) cfg.signal_gain = flags.signal_gain;
  if (given("--max-classes")) cfg.max_classes_per_video = flags.max_classes_per_video;
  if (given("--p-audio-only")) cfg.p_audio_only = flags.p_audio_only;
  if (given("--p-visual-only")) cfg.p_visual_only = flags.p_visual_only;
  if (given("--seed")) cfg.seed = flags.seed;
  return cfg;
}

int cmd_synth(const SynthFlags& f, std::ostream& out, std::ostream& err) {
  SynthConfig cfg = resolve_synth(f);
  const fs::path dir = f.out;
  require_fresh_dir(dir, f.force);
  SynthConfig gen = cfg;
  gen.n_videos = cfg.n_videos + f.test_videos;
  SynthResult r = synth_generate(gen);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";

  json snapshot = cfg;
  snapshot["test_videos"] = f.test_videos;
  write_file_atomic(dir / "synth_config.json", snapshot.dump(2) + "\n");
  if (f.test_videos > 0) {
    auto [train, test] = split_dataset(r.data, f.test_videos);
    save_dataset(dir / "train", train);
    save_dataset(dir / "test", test);
  } else {
    save_dataset(dir, r.data);
  }
  out << "wrote " << gen.n_videos << " videos (T=" << cfg.steps << ", C=" << cfg.classes
      << ", d_a=" << cfg.d_audio << ", d_v=" << cfg.d_visual << ") to " << dir.string() << "\n";
  return 0;
}

// ---- train ---------------------------------------------------------------------

struct TrainFlags {
  std::string data, val, out, config, resume, loss, pool, temporal;
  std::size_t epochs = 0, batch_size = 0, lr_step = 0, smooth_k = 0, width = 0;
  std::size_t eval_interval = 0, checkpoint_every = 10;
  double lr = 0, lr_decay = 0, eps_a = 0, eps_v = 0, clip_norm = 0, threshold = 0;
  std::uint64_t seed = 0;
  bool learned_qk = false, wsl_positive_only = false, serial = false, force = false;
  bool hard_labels = false;
  CLI::App* cmd = nullptr;
};

void register_train(CLI::App& app, TrainFlags& f) {
  auto* c = app.add_subcommand("train", "Train a parser on a dataset directory");
  f.cmd = c;
  c->add_option("--data", f.data, "Training dataset directory");
  c->add_option("--val", f.val, "Annotated validation dataset directory");
  c->add_option("--out", f.out, "Run directory")->required();
  c->add_option("--config", f.config, "JSON run config (e.g. a config.snapshot)");
  c->add_option("--resume", f.resume, "Continue from a checkpoint");
  c->add_option("--epochs", f.epochs, "Epochs (default 40)");
  c->add_option("--batch-size", f.batch_size, "Batch size (default 16)");
  c->add_option("--lr", f.lr, "Initial learning rate (default 3e-4)");
  c->add_option("--lr-decay", f.lr_decay, "Decay factor (default 0.1)");
  c->add_option("--lr-step", f.lr_step, "Epochs between decays (default 10)");
  c->add_option("--seed", f.seed, "Seed for initialisation and shuffling");
  c->add_option("--loss", f.loss, "wsl | g | both")->check(CLI::IsMember({"wsl", "g", "both"}));
  c->add_option("--pool", f.pool, "max | mean | attentive")
      ->check(CLI::IsMember({"max", "mean", "attentive"}));
  c->add_option("--temporal", f.temporal, "none | han")->check(CLI::IsMember({"none", "han"}));
  c->add_option("--smooth-eps-a", f.eps_a, "Audio label smoothing eps (default 0.1)");
  c->add_option("--smooth-eps-v", f.eps_v, "Visual label smoothing eps (default 0.1)");
  c->add_option("--smooth-k", f.smooth_k, "Smoothing K (default: number of classes)");
  c->add_flag("--hard-labels", f.hard_labels, "Guided loss on the unsmoothed weak labels");
  c->add_option("--width", f.width, "Shared feature width d (default 512)");
  c->add_flag("--learned-qk", f.learned_qk, "Learned query/key projections in HAN");
  c->add_flag("--wsl-positive-only", f.wsl_positive_only,
              "Weak-supervision loss without the (1-y)log(1-p) term");
  c->add_option("--clip-norm", f.clip_norm, "Global gradient-norm clip (0 = off)");
  c->add_option("--eval-interval", f.eval_interval, "Validate every N epochs (0 = off)");
  c->add_option("--threshold", f.threshold, "Snippet decision threshold (default 0.5)");
  c->add_option("--checkpoint-every", f.checkpoint_every,
                "Write ckpt_epoch_N every N epochs (final epoch always)");
  c->add_flag("--serial", f.serial, "Use the serial reference kernels");
  c->add_flag("--force", f.force, "Write into a non-empty run directory");
}

RunConfig resolve_train(const TrainFlags& f) {
  RunConfig rc;
  if (!f.config.empty()) rc = RunConfig::from_json(read_json_file(f.config));
  auto given = [&](const char* name) { return f.cmd->count(name) > 0; };
  TrainConfig& t = rc.train;
  if (given("--data")) rc.data_dir = f.data;
  if (given("--val")) rc.val_dir = f.val;
  if (given("--epochs")) t.epochs = f.epochs;
  if (given("--batch-size")) t.batch_size = f.batch_size;
  if (given("--lr")) t.lr0 = f.lr;
  if (given("--lr-decay")) t.lr_decay = f.lr_decay;
  if (given("--lr-step")) t.lr_step_epochs = f.lr_step;
  if (given("--seed")) t.seed = f.seed;
  if (given("--loss")) t.loss.mode = parse_loss_mode(f.loss);
  if (given("--pool")) rc.model.pool = parse_pool_mode(f.pool);
  if (given("--temporal")) rc.model.temporal = parse_temporal_mode(f.temporal);
  if (given("--smooth-eps-a")) t.loss.smoothing.eps_audio = f.eps_a;
  if (given("--smooth-eps-v")) t.loss.smoothing.eps_visual = f.eps_v;
  if (given("--smooth-k")) t.loss.smoothing.k = f.smooth_k;
  if (given("--hard-labels")) t.loss.smoothing.enabled = !f.hard_labels;
  if (given("--width")) rc.model.width = f.width;
  if (given("--learned-qk")) rc.model.learned_qk = f.learned_qk;
  if (given("--wsl-positive-only")) t.loss.wsl_positive_only = f.wsl_positive_only;
  if (given("--clip-norm")) t.clip_norm = f.clip_norm;
  if (given("--eval-interval")) t.eval_interval = f.eval_interval;
  if (given("--threshold")) t.threshold = f.threshold;
  if (rc.data_dir.empty()) throw UsageError("train needs --data (or a config naming it)");
  return rc;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,lr,l_wsl,l_g_a,l_g_v,total,val_segment_type_av,val_event_type_av\n";
  for (const auto& r : history) {
    os << r.epoch << ',' << fmt(r.lr) << ',' << fmt(r.mean_loss.l_wsl) << ','
       << fmt(r.mean_loss.l_g_audio) << ',' << fmt(r.mean_loss.l_g_visual) << ','
       << fmt(r.mean_loss.total) << ',';
    if (r.validation) {
      os << fmt(r.validation->segment_f[kRowTypeAV]) << ','
         << fmt(r.validation->event_f[kRowTypeAV]);
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string steps_csv(const std::vector<StepRecord>& steps) {
  std::ostringstream os;
  os << "epoch,step,l_wsl,l_g_a,l_g_v,total\n";
  for (const auto& s : steps) {
    os << s.epoch << ',' << s.step << ',' << fmt(s.loss.l_wsl) << ',' << fmt(s.loss.l_g_audio)
       << ',' << fmt(s.loss.l_g_visual) << ',' << fmt(s.loss.total) << '\n';
  }
  return os.str();
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  RunConfig rc = resolve_train(f);
  rc.train.parallel = !f.serial;
  const fs::path run = f.out;

  Dataset data = load_dataset(rc.data_dir);
  std::optional<Dataset> val;
  if (!rc.val_dir.empty()) val = load_dataset(rc.val_dir, true);
  if (data.bags.empty()) throw InvalidArgument("training set is empty");
  rc.model.d_audio = data.bags.front().audio.cols();
  rc.model.d_visual = data.bags.front().visual.cols();
  rc.model.classes = data.taxonomy.size();
  if (val && rc.train.eval_interval == 0) rc.train.eval_interval = rc.train.epochs;

  std::optional<Checkpoint> resume;
  if (!f.resume.empty()) resume = load_checkpoint(f.resume);

  require_fresh_dir(run, f.force);
  json snapshot = rc.to_json();
  snapshot["digest"] = rc.digest();
  write_file_atomic(run / "config.snapshot", snapshot.dump(2) + "\n");

  std::vector<EpochRecord> history;
  std::vector<StepRecord> steps;
  TrainObserver obs;
  obs.on_step = [&](const StepRecord& s) { steps.push_back(s); };
  obs.on_epoch = [&](const EpochRecord& r, Checkpoint& state) {
    history.push_back(r);
    write_file_atomic(run / "history.csv", history_csv(history));
    write_file_atomic(run / "steps.csv", steps_csv(steps));
    const bool last = state.epochs_done == rc.train.epochs;
    if (last || (f.checkpoint_every > 0 && state.epochs_done % f.checkpoint_every == 0)) {
      save_checkpoint(run / ("ckpt_epoch_" + std::to_string(state.epochs_done)), state);
    }
    out << "epoch " << r.epoch << " lr " << fmt(r.lr, 4) << " loss " << fmt(r.mean_loss.total, 6);
    if (r.validation) out << " val Type@AV " << fmt(r.validation->segment_f[kRowTypeAV], 4);
    out << "\n";
  };

  TrainResult result =
      train(data, rc.model, rc.train, val ? &*val : nullptr, obs, resume ? &*resume : nullptr);
  if (result.best) save_checkpoint(run / "ckpt_best", *result.best);

  const Dataset* scored = val ? &*val : (data.has_annotations() ? &data : nullptr);
  if (scored) {
    const MetricReport report = evaluate_model(result.final_state.params, *scored,
                                               rc.train.threshold, rc.train.parallel);
    write_metrics_csv(run / "final_metrics.csv", report);
    out << metrics_csv(report);
  }
  out << "run directory: " << run.string() << "\n";
  return 0;
}

// ---- parse / eval --------------------------------------------------------------

struct ParseFlags {
  std::string data, checkpoint, out;
  double threshold = 0.5;
};

void register_parse(CLI::App& app, ParseFlags& f) {
  auto* c = app.add_subcommand("parse", "Write event segments predicted by a checkpoint");
  c->add_option("--data", f.data, "Dataset directory")->required();
  c->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required();
  c->add_option("--out", f.out, "Segments CSV (default: stdout)");
  c->add_option("--threshold", f.threshold, "Snippet decision threshold");
}

int cmd_parse(const ParseFlags& f, std::ostream& out) {
  Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const Dataset data = load_dataset(f.data);
  const auto preds = kernels::predict_parallel(ckpt.params, data.bags);
  std::vector<ParsedSegment> segments;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto s = parse_with_confidence(data.bags[i].video_id, preds[i].probs, f.threshold);
    segments.insert(segments.end(), s.begin(), s.end());
  }
  const std::string csv = parse_csv(segments, data.taxonomy);
  if (f.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(f.out, csv);
    out << "wrote " << segments.size() << " segments to " << f.out << "\n";
  }
  return 0;
}

struct EvalFlags {
  std::string data, checkpoint, pred, out, per_video;
  double threshold = 0.5;
  CLI::App* cmd = nullptr;
};

void register_eval(CLI::App& app, EvalFlags& f) {
  auto* c = app.add_subcommand("eval", "Score predictions against dense annotations");
  f.cmd = c;
  c->add_option("--data", f.data, "Annotated dataset directory")->required();
  auto* ck = c->add_option("--checkpoint", f.checkpoint, "Score this checkpoint's parses");
  auto* pr = c->add_option("--pred", f.pred, "Score a segments CSV (parse output or annotations)");
  ck->excludes(pr);
  c->add_option("--out", f.out, "final_metrics.csv path (default: stdout)");
  c->add_option("--per-video", f.per_video, "Optional per-video breakdown CSV");
  c->add_option("--threshold", f.threshold, "Snippet decision threshold");
}

std::vector<SnippetDecisions> decisions_from_segments(const Dataset& data,
                                                      const std::vector<ParsedSegment>& segs) {
  std::map<std::string, std::size_t> index;
  std::vector<SnippetDecisions> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    index[data.bags[i].video_id] = i;
    const std::size_t t = data.bags[i].steps(), c = data.taxonomy.size();
    out.push_back({LabelGrid(t, c), LabelGrid(t, c), LabelGrid(t, c)});
  }
  bool has_av = false;
  for (const auto& s : segs) has_av = has_av || s.segment.modality == Modality::AudioVisual;
  for (const auto& s : segs) {
    auto it = index.find(s.video_id);
    if (it == index.end()) throw InvalidArgument("prediction for unknown video " + s.video_id);
    SnippetDecisions& d = out[it->second];
    LabelGrid& g = s.segment.modality == Modality::Audio    ? d.audio
                   : s.segment.modality == Modality::Visual ? d.visual
                                                            : d.audio_visual;
    if (static_cast<std::size_t>(s.segment.offset) > g.steps()) {
      throw InvalidArgument("segment of " + s.video_id + " ends past the video");
    }
    for (int t = s.segment.onset; t < s.segment.offset; ++t) {
      g.at(static_cast<std::size_t>(t), s.segment.cls) = 1;
    }
  }
  // Annotation-style input carries no audio-visual rows; derive them.
  if (!has_av) {
    for (auto& d : out) d.audio_visual = d.audio.intersect(d.visual);
  }
  return out;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  if (f.checkpoint.empty() && f.pred.empty()) throw UsageError("eval needs --checkpoint or --pred");
  const Dataset data = load_dataset(f.data, true);
  MetricReport report;
  if (!f.checkpoint.empty()) {
    Checkpoint ckpt = load_checkpoint(f.checkpoint);
    report = evaluate_model(ckpt.params, data, f.threshold, true);
  } else {
    const auto segs = load_parse_csv(f.pred, data.taxonomy);
    report = evaluate_parallel(decisions_from_segments(data, segs), data.dense);
  }
  if (f.out.empty()) {
    out << metrics_csv(report);
  } else {
    write_metrics_csv(f.out, report);
    out << metrics_csv(report);
  }
  if (!f.per_video.empty()) {
    std::ostringstream os;
    os << "video_id,audio_seg,visual_seg,av_seg,audio_evt,visual_evt,av_evt,event_av_seg,"
          "event_av_evt\n";
    for (const auto& v : report.per_video) {
      os << v.video_id;
      for (double x : v.segment_f) os << ',' << fmt(x, 6);
      for (double x : v.event_f) os << ',' << fmt(x, 6);
      os << ',' << fmt(v.event_av_segment, 6) << ',' << fmt(v.event_av_event, 6) << '\n';
    }
    write_file_atomic(f.per_video, os.str());
  }
  return 0;
}

// ---- gradcheck -----------------------------------------------------------------

struct GradCheckFlags {
  ModelGradCheckSpec spec;
  std::string loss = "both", pool = "attentive", temporal = "han";
  double tolerance = 1e-4;
};

void register_gradcheck(CLI::App& app, GradCheckFlags& f) {
  auto* c = app.add_subcommand("gradcheck", "Finite-difference check of the full model");
  c->add_option("--seed", f.spec.seed, "Seed for the random instance");
  c->add_option("--t", f.spec.steps, "Snippets per video");
  c->add_option("--d", f.spec.width, "Shared width");
  c->add_option("--d-a", f.spec.d_audio, "Audio feature width");
  c->add_option("--d-v", f.spec.d_visual, "Visual feature width");
  c->add_option("--classes", f.spec.classes, "Classes");
  c->add_option("--batch", f.spec.batch, "Videos per batch");
  c->add_option("--eps", f.spec.epsilon, "Finite-difference step");
  c->add_option("--loss", f.loss, "wsl | g | both")->check(CLI::IsMember({"wsl", "g", "both"}));
  c->add_option("--pool", f.pool, "max | mean | attentive")
      ->check(CLI::IsMember({"max", "mean", "attentive"}));
  c->add_option("--temporal", f.temporal, "none | han")->check(CLI::IsMember({"none", "han"}));
  c->add_flag("--learned-qk", f.spec.learned_qk, "Learned query/key projections");
  c->add_option("--smooth-eps-a", f.spec.loss.smoothing.eps_audio, "Audio smoothing eps");
  c->add_option("--smooth-eps-v", f.spec.loss.smoothing.eps_visual, "Visual smoothing eps");
  c->add_option("--smooth-k", f.spec.loss.smoothing.k, "Smoothing K");
  c->add_option("--tolerance", f.tolerance, "Maximum allowed relative error");
}

int cmd_gradcheck(GradCheckFlags f, std::ostream& out, std::ostream& err) {
  f.spec.loss.mode = parse_loss_mode(f.loss);
  f.spec.pool = parse_pool_mode(f.pool);
  f.spec.temporal = parse_temporal_mode(f.temporal);
  const ModelGradCheckResult r = run_model_grad_check(f.spec);
  const bool pass = r.report.max_rel_error < f.tolerance;
  out << "gradcheck T=" << f.spec.steps << " d=" << f.spec.width << " d_a=" << f.spec.d_audio
      << " d_v=" << f.spec.d_visual << " C=" << f.spec.classes << " batch=" << f.spec.batch
      << "\n"
      << "parameters " << r.parameters << ", coordinates " << r.report.coordinates << ", loss "
      << fmt(r.loss) << "\n"
      << "max relative error " << fmt(r.report.max_rel_error, 4) << " at "
      << r.report.worst_param << "[" << r.report.worst_index << "] (analytic "
      << fmt(r.report.worst_analytic) << ", numeric " << fmt(r.report.worst_numeric) << ")\n"
      << "elapsed " << fmt(r.seconds, 3) << " s\n"
      << (pass ? "PASS" : "FAIL") << "\n";
  if (!pass) {
    err << json{{"error", "gradcheck_failed"},
                {"message", "max relative error " + fmt(r.report.max_rel_error, 4) +
                                " exceeds " + fmt(f.tolerance, 4)}}
               .dump()
        << "\n";
    return 1;
  }
  return 0;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly-supervised audio-visual video parsing", "avvp"};
  app.require_subcommand(1);
  SynthFlags synth;
  TrainFlags train_flags;
  ParseFlags parse_flags;
  EvalFlags eval_flags;
  GradCheckFlags gc;
  register_synth(app, synth);
  register_train(app, train_flags);
  register_parse(app, parse_flags);
  register_eval(app, eval_flags);
  register_gradcheck(app, gc);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage_error", e.what());
    return 2;
  }

  try {
    apply_thread_cap();
    if (synth.cmd->parsed()) return cmd_synth(synth, out, err);
    if (train_flags.cmd->parsed()) return cmd_train(train_flags, out);
    if (eval_flags.cmd->parsed()) return cmd_eval(eval_flags, out);
    if (app.got_subcommand("parse")) return cmd_parse(parse_flags, out);
    if (app.got_subcommand("gradcheck")) return cmd_gradcheck(gc, out, err);
  } catch (const UsageError& e) {
    emit_error(err, e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    emit_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, "internal_error", e.what());
    return 1;
  }
  return 2;
}

}  // namespace avvp
