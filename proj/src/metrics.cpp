#include "avvp/metrics.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <sstream>

namespace avvp {

double ConfusionCounts::f_score() const noexcept {
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

ConfusionCounts segment_counts(const LabelGrid& pred, const LabelGrid& gt) {
  if (pred.steps() != gt.steps() || pred.classes() != gt.classes()) {
    throw ShapeError("segment_f: prediction and ground truth grids differ in shape");
  }
  ConfusionCounts c;
  for (std::size_t t = 0; t < pred.steps(); ++t) {
    for (std::size_t k = 0; k < pred.classes(); ++k) {
      const bool p = pred.at(t, k), g = gt.at(t, k);
      c.tp += p && g;
      c.fp += p && !g;
      c.fn += !p && g;
    }
  }
  return c;
}

double segment_f(const LabelGrid& pred, const LabelGrid& gt) {
  return segment_counts(pred, gt).f_score();
}

double interval_iou(const EventSegment& a, const EventSegment& b) noexcept {
  const int inter = std::min(a.offset, b.offset) - std::max(a.onset, b.onset);
  if (inter <= 0) return 0.0;
  const int uni = std::max(a.offset, b.offset) - std::min(a.onset, b.onset);
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

using GroupKey = std::pair<Modality, std::size_t>;

std::map<GroupKey, std::vector<std::size_t>> group_events(std::span<const EventSegment> events,
                                                          const char* side) {
  std::map<GroupKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].onset >= events[i].offset) {
      throw InvalidArgument(std::string(side) + " event with onset >= offset");
    }
    groups[{events[i].modality, events[i].cls}].push_back(i);
  }
  for (auto& [key, idx] : groups) {
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return events[a].onset < events[b].onset; });
    for (std::size_t j = 1; j < idx.size(); ++j) {
      if (events[idx[j]].onset < events[idx[j - 1]].offset) {
        throw InvalidArgument(std::string(side) + " events overlap within class " +
                              std::to_string(key.second) + " (" +
                              std::string(modality_name(key.first)) + ")");
      }
    }
  }
  return groups;
}

}  // namespace

ConfusionCounts event_counts(std::span<const EventSegment> pred,
                             std::span<const EventSegment> gt, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw InvalidArgument("IoU threshold must lie in (0, 1]");
  }
  const auto pred_groups = group_events(pred, "predicted");
  const auto gt_groups = group_events(gt, "ground-truth");

  struct Candidate {
    double iou;
    std::size_t p, g;
  };
  std::vector<Candidate> candidates;
  for (const auto& [key, pidx] : pred_groups) {
    auto it = gt_groups.find(key);
    if (it == gt_groups.end()) continue;
    for (std::size_t p : pidx) {
      for (std::size_t g : it->second) {
        const double iou = interval_iou(pred[p], gt[g]);
        if (iou >= iou_threshold) candidates.push_back({iou, p, g});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (pred[a.p].onset != pred[b.p].onset) return pred[a.p].onset < pred[b.p].onset;
    if (gt[a.g].onset != gt[b.g].onset) return gt[a.g].onset < gt[b.g].onset;
    return pred[a.p].cls < pred[b.p].cls;
  });

  std::vector<bool> pred_used(pred.size(), false), gt_used(gt.size(), false);
  ConfusionCounts c;
  for (const auto& cand : candidates) {
    if (pred_used[cand.p] || gt_used[cand.g]) continue;
    pred_used[cand.p] = gt_used[cand.g] = true;
    ++c.tp;
  }
  c.fp = pred.size() - c.tp;
  c.fn = gt.size() - c.tp;
  return c;
}

double event_f(std::span<const EventSegment> pred, std::span<const EventSegment> gt,
               double iou_threshold) {
  return event_counts(pred, gt, iou_threshold).f_score();
}

VideoMetrics evaluate_video(const SnippetDecisions& pred, const DenseAnnotation& gt,
                            double iou_threshold) {
  const LabelGrid gt_av = gt.audio_visual();
  const LabelGrid* pred_grids[3] = {&pred.audio, &pred.visual, &pred.audio_visual};
  const LabelGrid* gt_grids[3] = {&gt.audio, &gt.visual, &gt_av};
  constexpr Modality kinds[3] = {Modality::Audio, Modality::Visual, Modality::AudioVisual};

  VideoMetrics m;
  m.video_id = gt.video_id;
  ConfusionCounts pooled_seg, pooled_evt;
  for (std::size_t k = 0; k < 3; ++k) {
    const ConfusionCounts seg = segment_counts(*pred_grids[k], *gt_grids[k]);
    const auto pe = extract_events(*pred_grids[k], kinds[k]);
    const auto ge = extract_events(*gt_grids[k], kinds[k]);
    const ConfusionCounts evt = event_counts(pe, ge, iou_threshold);
    m.segment_f[k] = seg.f_score();
    m.event_f[k] = evt.f_score();
    if (k != kAudioVisual) {
      pooled_seg += seg;
      pooled_evt += evt;
    }
  }
  m.event_av_segment = pooled_seg.f_score();
  m.event_av_event = pooled_evt.f_score();
  return m;
}

MetricReport aggregate(std::vector<VideoMetrics> per_video) {
  if (per_video.empty()) throw InvalidArgument("cannot aggregate an empty report list");
  MetricReport r;
  const double inv = 1.0 / static_cast<double>(per_video.size());
  for (const auto& v : per_video) {
    for (std::size_t k = 0; k < 3; ++k) {
      r.segment_f[k] += v.segment_f[k] * inv;
      r.event_f[k] += v.event_f[k] * inv;
    }
    r.segment_f[kRowEventAV] += v.event_av_segment * inv;
    r.event_f[kRowEventAV] += v.event_av_event * inv;
  }
  r.segment_f[kRowTypeAV] = (r.segment_f[0] + r.segment_f[1] + r.segment_f[2]) / 3.0;
  r.event_f[kRowTypeAV] = (r.event_f[0] + r.event_f[1] + r.event_f[2]) / 3.0;
  r.per_video = std::move(per_video);
  return r;
}

namespace {
void check_sizes(std::span<const SnippetDecisions> preds, std::span<const DenseAnnotation> gts) {
  if (preds.size() != gts.size()) {
    throw InvalidArgument("evaluation needs one prediction per annotated video");
  }
}
}  // namespace

MetricReport evaluate_serial(std::span<const SnippetDecisions> preds,
                             std::span<const DenseAnnotation> gts, double iou_threshold) {
  check_sizes(preds, gts);
  std::vector<VideoMetrics> per_video;
  per_video.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    per_video.push_back(evaluate_video(preds[i], gts[i], iou_threshold));
  }
  return aggregate(std::move(per_video));
}

MetricReport evaluate_parallel(std::span<const SnippetDecisions> preds,
                               std::span<const DenseAnnotation> gts, double iou_threshold) {
  check_sizes(preds, gts);
  std::vector<VideoMetrics> per_video(preds.size());
  std::vector<std::exception_ptr> errors(preds.size());
  const auto n = static_cast<long>(preds.size());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n; ++j) {
    const auto i = static_cast<std::size_t>(j);
    try {
      per_video[i] = evaluate_video(preds[i], gts[i], iou_threshold);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return aggregate(std::move(per_video));
}

std::string metrics_csv(const MetricReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << "type,segment_f,event_f\n";
  for (std::size_t r = 0; r < kReportRowNames.size(); ++r) {
    os << kReportRowNames[r] << ',' << report.segment_f[r] << ',' << report.event_f[r] << '\n';
  }
  return os.str();
}

void write_metrics_csv(const std::filesystem::path& path, const MetricReport& report) {
  write_file_atomic(path, metrics_csv(report));
}

}  // namespace avvp
