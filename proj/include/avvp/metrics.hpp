#pragma once

#include <array>
#include <filesystem>

#include "avvp/datamodel.hpp"
#include "avvp/mmil.hpp"

namespace avvp {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  // 2tp / (2tp + fp + fn); 1 when there is nothing to find and nothing found.
  double f_score() const noexcept;
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts segment_counts(const LabelGrid& pred, const LabelGrid& gt);
double segment_f(const LabelGrid& pred, const LabelGrid& gt);

double interval_iou(const EventSegment& a, const EventSegment& b) noexcept;

// One-to-one greedy matching within each (modality, class), pairs taken in
// descending IoU order (ties: earlier prediction onset, earlier ground-truth
// onset, lower class). A matched pair is a true positive when IoU >= threshold.
// Throws InvalidArgument if either list has overlapping events of the same
// modality and class.
ConfusionCounts event_counts(std::span<const EventSegment> pred,
                             std::span<const EventSegment> gt, double iou_threshold = 0.5);
double event_f(std::span<const EventSegment> pred, std::span<const EventSegment> gt,
               double iou_threshold = 0.5);

enum EventType : std::size_t { kAudio = 0, kVisual = 1, kAudioVisual = 2 };

struct VideoMetrics {
  std::string video_id;
  std::array<double, 3> segment_f{};  // indexed by EventType
  std::array<double, 3> event_f{};
  double event_av_segment = 0.0;  // audio and visual cells pooled
  double event_av_event = 0.0;    // audio and visual events pooled
};

// Audio-visual ground truth is audio * visual of `gt`.
VideoMetrics evaluate_video(const SnippetDecisions& pred, const DenseAnnotation& gt,
                            double iou_threshold = 0.5);

enum ReportRow : std::size_t { kRowAudio, kRowVisual, kRowAudioVisual, kRowTypeAV, kRowEventAV };
inline constexpr std::array<const char*, 5> kReportRowNames = {"Audio", "Visual", "AudioVisual",
                                                               "TypeAV", "EventAV"};

struct MetricReport {
  std::array<double, 5> segment_f{};  // indexed by ReportRow
  std::array<double, 5> event_f{};
  std::vector<VideoMetrics> per_video;
};

// Per-video scores averaged over videos; TypeAV is the mean of the three
// type rows.
MetricReport aggregate(std::vector<VideoMetrics> per_video);

MetricReport evaluate_serial(std::span<const SnippetDecisions> preds,
                             std::span<const DenseAnnotation> gts, double iou_threshold = 0.5);
// Per-video work spread over OpenMP threads; aggregation in input order.
MetricReport evaluate_parallel(std::span<const SnippetDecisions> preds,
                               std::span<const DenseAnnotation> gts,
                               double iou_threshold = 0.5);

// `type,segment_f,event_f`, one row per ReportRow.
std::string metrics_csv(const MetricReport& report);
void write_metrics_csv(const std::filesystem::path& path, const MetricReport& report);

}  // namespace avvp
