#include "avvp/mmil.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace avvp {

std::string_view pool_mode_name(PoolMode m) noexcept {
  switch (m) {
    case PoolMode::Max: return "max";
    case PoolMode::Mean: return "mean";
    case PoolMode::Attentive: return "attentive";
  }
  return "unknown";
}

PoolMode parse_pool_mode(std::string_view s) {
  if (s == "max") return PoolMode::Max;
  if (s == "mean") return PoolMode::Mean;
  if (s == "attentive") return PoolMode::Attentive;
  throw InvalidArgument("unknown pooling mode '" + std::string(s) + "'");
}

MmilParams MmilParams::create(std::size_t width, std::size_t classes, Rng& rng) {
  MmilParams p{LinearLayer(width, classes), LinearLayer(width, classes),
               LinearLayer(width, classes)};
  p.classifier.init_uniform(rng);
  p.temporal_head.init_uniform(rng);
  p.modality_head.init_uniform(rng);
  return p;
}

MmilParams MmilParams::zeros_like() const {
  const auto w = classifier.in_features();
  const auto c = classifier.out_features();
  return {LinearLayer(w, c), LinearLayer(w, c), LinearLayer(w, c)};
}

void MmilParams::append_slots(std::vector<ParamSlot>& out, const std::string& prefix) {
  for (auto [layer, name] : {std::pair{&classifier, "classifier"},
                             std::pair{&temporal_head, "temporal_head"},
                             std::pair{&modality_head, "modality_head"}}) {
    out.push_back({prefix + name + ".weight", layer->weight.values()});
    out.push_back({prefix + name + ".bias", layer->bias});
  }
}

namespace {

void check_pair(const Matrix& a, const Matrix& v, const char* what) {
  if (a.rows() != v.rows() || a.cols() != v.cols()) {
    throw ShapeError(std::string(what) + ": audio and visual shapes differ");
  }
}

Matrix sigmoid_of(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < p.size(); ++i) p.values()[i] = sigmoid(logits.values()[i]);
  return p;
}

const Matrix& modality_probs(const SnippetProbs& probs, std::size_t m) {
  return m == 0 ? probs.audio : probs.visual;
}

}  // namespace

SnippetProbs classify_snippets(const Matrix& h_audio, const Matrix& h_visual,
                               const MmilParams& params) {
  check_pair(h_audio, h_visual, "classify_snippets");
  SnippetProbs p;
  p.audio = sigmoid_of(params.classifier.forward(h_audio));
  p.visual = sigmoid_of(params.classifier.forward(h_visual));
  p.audio_visual = Matrix(p.audio.rows(), p.audio.cols());
  for (std::size_t i = 0; i < p.audio.size(); ++i) {
    p.audio_visual.values()[i] = p.audio.values()[i] * p.visual.values()[i];
  }
  return p;
}

Features2 classify_snippets_backward(const Matrix& h_audio, const Matrix& h_visual,
                                     const SnippetProbs& probs, const Matrix& grad_p_audio,
                                     const Matrix& grad_p_visual, const MmilParams& params,
                                     MmilParams& grads) {
  auto logit_grad = [](const Matrix& p, const Matrix& gp) {
    Matrix g(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double v = p.values()[i];
      g.values()[i] = gp.values()[i] * v * (1.0 - v);
    }
    return g;
  };
  Features2 out;
  out.audio = params.classifier.backward(h_audio, logit_grad(probs.audio, grad_p_audio),
                                         grads.classifier);
  out.visual = params.classifier.backward(h_visual, logit_grad(probs.visual, grad_p_visual),
                                          grads.classifier);
  return out;
}

PoolOutput combine_pool(const Tensor3& w_tp, const Tensor3& w_av, const SnippetProbs& probs) {
  const std::size_t steps = probs.audio.rows();
  const std::size_t classes = probs.audio.cols();
  PoolOutput out;
  out.video_raw.assign(classes, 0.0);
  out.audio.assign(classes, 0.0);
  out.visual.assign(classes, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t m = 0; m < 2; ++m) {
      const Matrix& p = modality_probs(probs, m);
      Vector& per_modality = m == 0 ? out.audio : out.visual;
      for (std::size_t c = 0; c < classes; ++c) {
        const double wp = w_tp(t, m, c) * p(t, c);
        per_modality[c] += wp;
        out.video_raw[c] += wp * w_av(t, m, c);
      }
    }
  }
  out.video.resize(classes);
  out.clamped.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    out.video[c] = clamp_prob(out.video_raw[c]);
    out.clamped[c] = out.video[c] != out.video_raw[c];
  }
  out.temporal_weights = w_tp;
  out.modality_weights = w_av;
  return out;
}

PoolOutput attentive_pool(const Matrix& h_audio, const Matrix& h_visual,
                          const SnippetProbs& probs, const MmilParams& params) {
  check_pair(h_audio, h_visual, "attentive_pool");
  check_pair(probs.audio, probs.visual, "attentive_pool");
  if (h_audio.rows() != probs.audio.rows() || probs.audio.cols() != params.classes()) {
    throw ShapeError("attentive_pool: features and probabilities disagree on T or C");
  }
  const std::size_t steps = h_audio.rows();
  const std::size_t classes = params.classes();
  const Matrix tp[2] = {params.temporal_head.forward(h_audio),
                        params.temporal_head.forward(h_visual)};
  const Matrix av[2] = {params.modality_head.forward(h_audio),
                        params.modality_head.forward(h_visual)};

  Tensor3 w_tp(steps, 2, classes), w_av(steps, 2, classes);
  Vector column(steps);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t t = 0; t < steps; ++t) column[t] = tp[m](t, c);
      const Vector w = softmax(column);
      for (std::size_t t = 0; t < steps; ++t) w_tp(t, m, c) = w[t];
    }
  }
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double pair[2] = {av[0](t, c), av[1](t, c)};
      const Vector w = softmax(pair);
      w_av(t, 0, c) = w[0];
      w_av(t, 1, c) = w[1];
    }
  }
  return combine_pool(w_tp, w_av, probs);
}

PoolOutput max_pool(const SnippetProbs& probs) {
  check_pair(probs.audio, probs.visual, "max_pool");
  const std::size_t steps = probs.audio.rows();
  const std::size_t classes = probs.audio.cols();
  Tensor3 w_tp(steps, 2, classes), w_av(steps, 2, classes);
  for (std::size_t c = 0; c < classes; ++c) {
    double best[2] = {0.0, 0.0};
    for (std::size_t m = 0; m < 2; ++m) {
      const Matrix& p = modality_probs(probs, m);
      std::size_t arg = 0;
      for (std::size_t t = 1; t < steps; ++t) {
        if (p(t, c) > p(arg, c)) arg = t;
      }
      w_tp(arg, m, c) = 1.0;
      best[m] = p(arg, c);
    }
    // The video-level maximum comes from whichever modality peaks higher.
    const std::size_t m_star = best[1] > best[0] ? 1 : 0;
    for (std::size_t t = 0; t < steps; ++t) w_av(t, m_star, c) = 1.0;
  }
  return combine_pool(w_tp, w_av, probs);
}

PoolOutput mean_pool(const SnippetProbs& probs) {
  check_pair(probs.audio, probs.visual, "mean_pool");
  const std::size_t steps = probs.audio.rows();
  const std::size_t classes = probs.audio.cols();
  Tensor3 w_tp(steps, 2, classes, 1.0 / static_cast<double>(steps));
  Tensor3 w_av(steps, 2, classes, 0.5);
  return combine_pool(w_tp, w_av, probs);
}

PoolBackward pool_backward(const Matrix& h_audio, const Matrix& h_visual,
                           const SnippetProbs& probs, const PoolOutput& pool,
                           const PoolGrads& grads, PoolMode mode, const MmilParams& params,
                           MmilParams& param_grads) {
  const std::size_t steps = probs.audio.rows();
  const std::size_t classes = probs.audio.cols();
  const Tensor3& w_tp = pool.temporal_weights;
  const Tensor3& w_av = pool.modality_weights;

  Vector g_video = grads.video;
  for (std::size_t c = 0; c < classes; ++c) {
    if (pool.clamped[c]) g_video[c] = 0.0;
  }

  PoolBackward out{Matrix(steps, classes), Matrix(steps, classes), {}, {}};
  Tensor3 g_wtp(steps, 2, classes), g_wav(steps, 2, classes);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t m = 0; m < 2; ++m) {
      const Matrix& p = modality_probs(probs, m);
      Matrix& gp = m == 0 ? out.p_audio : out.p_visual;
      const Vector& g_mod = m == 0 ? grads.audio : grads.visual;
      for (std::size_t c = 0; c < classes; ++c) {
        const double a = w_tp(t, m, c), b = w_av(t, m, c), pr = p(t, c);
        gp(t, c) = g_video[c] * a * b + g_mod[c] * a;
        g_wtp(t, m, c) = g_video[c] * b * pr + g_mod[c] * pr;
        g_wav(t, m, c) = g_video[c] * a * pr;
      }
    }
  }
  if (mode != PoolMode::Attentive) return out;

  // Softmax backward into the head logits.
  Matrix g_tp[2] = {Matrix(steps, classes), Matrix(steps, classes)};
  Matrix g_av[2] = {Matrix(steps, classes), Matrix(steps, classes)};
  Vector y(steps), dy(steps);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t t = 0; t < steps; ++t) {
        y[t] = w_tp(t, m, c);
        dy[t] = g_wtp(t, m, c);
      }
      const Vector dx = softmax_backward(y, dy);
      for (std::size_t t = 0; t < steps; ++t) g_tp[m](t, c) = dx[t];
    }
  }
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double yy[2] = {w_av(t, 0, c), w_av(t, 1, c)};
      const double dd[2] = {g_wav(t, 0, c), g_wav(t, 1, c)};
      const Vector dx = softmax_backward(yy, dd);
      g_av[0](t, c) = dx[0];
      g_av[1](t, c) = dx[1];
    }
  }
  out.h_audio = params.temporal_head.backward(h_audio, g_tp[0], param_grads.temporal_head);
  out.h_audio += params.modality_head.backward(h_audio, g_av[0], param_grads.modality_head);
  out.h_visual = params.temporal_head.backward(h_visual, g_tp[1], param_grads.temporal_head);
  out.h_visual += params.modality_head.backward(h_visual, g_av[1], param_grads.modality_head);
  return out;
}

SnippetDecisions threshold_probs(const SnippetProbs& probs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("threshold must lie in (0, 1)");
  }
  const std::size_t steps = probs.audio.rows();
  const std::size_t classes = probs.audio.cols();
  SnippetDecisions d{LabelGrid(steps, classes), LabelGrid(steps, classes),
                     LabelGrid(steps, classes)};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t c = 0; c < classes; ++c) {
      d.audio.at(t, c) = probs.audio(t, c) >= threshold;
      d.visual.at(t, c) = probs.visual(t, c) >= threshold;
      d.audio_visual.at(t, c) = probs.audio_visual(t, c) >= threshold;
    }
  }
  return d;
}

std::vector<EventSegment> parse_video(const SnippetProbs& probs, double threshold) {
  const SnippetDecisions d = threshold_probs(probs, threshold);
  std::vector<EventSegment> out = extract_events(d.audio, Modality::Audio);
  for (auto* part : {&d.visual, &d.audio_visual}) {
    const Modality m = part == &d.visual ? Modality::Visual : Modality::AudioVisual;
    auto more = extract_events(*part, m);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace avvp

namespace avvp {

std::vector<ParsedSegment> parse_with_confidence(const std::string& video_id,
                                                 const SnippetProbs& probs, double threshold) {
  std::vector<ParsedSegment> out;
  for (const auto& seg : parse_video(probs, threshold)) {
    const Matrix& p = seg.modality == Modality::Audio    ? probs.audio
                      : seg.modality == Modality::Visual ? probs.visual
                                                         : probs.audio_visual;
    double sum = 0.0;
    for (int t = seg.onset; t < seg.offset; ++t) sum += p(static_cast<std::size_t>(t), seg.cls);
    out.push_back({video_id, seg, sum / seg.length()});
  }
  return out;
}

std::string parse_csv(std::span<const ParsedSegment> segments, const Taxonomy& tax) {
  std::ostringstream os;
  os << "video_id,modality,class,onset,offset,confidence\n";
  os.precision(6);
  os << std::fixed;
  for (const auto& s : segments) {
    os << s.video_id << ',' << modality_name(s.segment.modality) << ','
       << tax.name(s.segment.cls) << ',' << s.segment.onset << ',' << s.segment.offset << ','
       << s.confidence << '\n';
  }
  return os.str();
}

std::vector<ParsedSegment> load_parse_csv(const std::filesystem::path& path, const Taxonomy& tax) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_confidence;
  if (line == "video_id,modality,class,onset,offset,confidence") with_confidence = true;
  else if (line == "video_id,modality,class,onset,offset") with_confidence = false;
  else throw ParseError("unrecognised segment CSV header '" + line + "'", 1);

  std::vector<ParsedSegment> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != (with_confidence ? 6u : 5u)) {
      throw ParseError("malformed segment row '" + line + "'", line_no);
    }
    ParsedSegment s;
    s.video_id = f[0];
    try {
      s.segment.modality = parse_modality(f[1]);
      s.segment.onset = std::stoi(f[3]);
      s.segment.offset = std::stoi(f[4]);
      if (with_confidence) s.confidence = std::stod(f[5]);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad field in segment row: ") + e.what(), line_no);
    }
    auto c = tax.find(f[2]);
    if (!c) throw ParseError("unknown class '" + f[2] + "'", line_no);
    s.segment.cls = *c;
    if (s.segment.onset < 0 || s.segment.onset >= s.segment.offset) {
      throw ParseError("onset must be >= 0 and < offset", line_no);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace avvp
