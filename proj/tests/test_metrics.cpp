#include <gtest/gtest.h>

#include "avvp/metrics.hpp"
#include "oracles.hpp"

using namespace avvp;

namespace {

LabelGrid grid_from(std::initializer_list<std::pair<std::size_t, std::size_t>> cells,
                    std::size_t T, std::size_t C) {
  LabelGrid g(T, C);
  for (auto [t, c] : cells) g.at(t, c) = 1;
  return g;
}

}  // namespace

TEST(SegmentF, HandCountedExample) {
  // tp: (0,0) (1,0) (2,1); fp: (3,1); fn: (4,0) -> 2*3 / (6 + 1 + 1)
  const LabelGrid pred = grid_from({{0, 0}, {1, 0}, {2, 1}, {3, 1}}, 5, 2);
  const LabelGrid gt = grid_from({{0, 0}, {1, 0}, {2, 1}, {4, 0}}, 5, 2);
  EXPECT_EQ(segment_counts(pred, gt), (ConfusionCounts{3, 1, 1}));
  EXPECT_EQ(segment_f(pred, gt), 0.75);
}

TEST(SegmentF, EmptyBothSidesScoresOne) {
  EXPECT_EQ(segment_f(LabelGrid(4, 2), LabelGrid(4, 2)), 1.0);
  EXPECT_EQ(segment_f(grid_from({{0, 0}}, 4, 2), LabelGrid(4, 2)), 0.0);
}

TEST(EventF, HalfIoUBoundaryMatches) {
  const std::vector<EventSegment> gt{{0, Modality::Audio, 0, 2}};
  const std::vector<EventSegment> pred{{0, Modality::Audio, 0, 1}};
  EXPECT_EQ(interval_iou(pred[0], gt[0]), 0.5);
  EXPECT_EQ(event_counts(pred, gt), (ConfusionCounts{1, 0, 0}));
  const std::vector<EventSegment> short_pred{{0, Modality::Audio, 0, 1}};
  const std::vector<EventSegment> long_gt{{0, Modality::Audio, 0, 3}};
  EXPECT_EQ(event_counts(short_pred, long_gt), (ConfusionCounts{0, 1, 1}));
}

TEST(EventF, ClassAndModalityMustAgree) {
  const std::vector<EventSegment> gt{{0, Modality::Audio, 0, 4}};
  EXPECT_EQ(event_f(std::vector<EventSegment>{{1, Modality::Audio, 0, 4}}, gt), 0.0);
  EXPECT_EQ(event_f(std::vector<EventSegment>{{0, Modality::Visual, 0, 4}}, gt), 0.0);
  EXPECT_EQ(event_f(std::vector<EventSegment>{}, std::vector<EventSegment>{}), 1.0);
}

TEST(EventF, OverlappingSameClassEventsRejected) {
  const std::vector<EventSegment> bad{{0, Modality::Audio, 0, 3}, {0, Modality::Audio, 2, 5}};
  EXPECT_THROW(event_counts(bad, {}), InvalidArgument);
}

TEST(EventF, GreedyEqualsOptimalOnSmallCases) {
  std::size_t cases = 0;
  for (int T = 1; T <= 4; ++T) {
    const unsigned n = 1u << T;
    for (unsigned a0 = 0; a0 < n; ++a0)
      for (unsigned a1 = 0; a1 < n; ++a1)
        for (unsigned b0 = 0; b0 < n; ++b0)
          for (unsigned b1 = 0; b1 < n; ++b1) {
            auto pred = oracle::runs(a0, T, 0, Modality::Audio);
            auto p1 = oracle::runs(a1, T, 1, Modality::Audio);
            pred.insert(pred.end(), p1.begin(), p1.end());
            auto gt = oracle::runs(b0, T, 0, Modality::Audio);
            auto g1 = oracle::runs(b1, T, 1, Modality::Audio);
            gt.insert(gt.end(), g1.begin(), g1.end());
            if (pred.size() > 4 || gt.size() > 4) continue;
            const oracle::Counts o = oracle::optimal_event_counts(pred, gt, 0.5);
            const ConfusionCounts g = event_counts(pred, gt);
            ASSERT_EQ(g.tp, o.tp) << "T=" << T << " masks " << a0 << ',' << a1 << ',' << b0 << ',' << b1;
            ASSERT_EQ(g.fp, o.fp);
            ASSERT_EQ(g.fn, o.fn);
            ++cases;
          }
  }
  EXPECT_GT(cases, 10000u);
}

TEST(Evaluate, PerfectPredictionScoresOne) {
  const std::vector<EventSegment> ev{{0, Modality::Audio, 4, 8}, {0, Modality::Visual, 2, 5},
                                     {1, Modality::Visual, 0, 10}};
  const DenseAnnotation gt = to_dense("v", ev, 10, 2);
  const SnippetDecisions pred{gt.audio, gt.visual, gt.audio_visual()};
  const VideoMetrics m = evaluate_video(pred, gt);
  for (double f : m.segment_f) EXPECT_EQ(f, 1.0);
  for (double f : m.event_f) EXPECT_EQ(f, 1.0);
  EXPECT_EQ(m.event_av_event, 1.0);
}

TEST(Evaluate, TypeAVIsMeanOfTypesAndSerialMatchesParallel) {
  Rng rng(7);
  std::vector<SnippetDecisions> preds;
  std::vector<DenseAnnotation> gts;
  for (int i = 0; i < 40; ++i) {
    LabelGrid a(6, 3), v(6, 3), pa(6, 3), pv(6, 3);
    for (std::size_t t = 0; t < 6; ++t) {
      for (std::size_t c = 0; c < 3; ++c) {
        a.at(t, c) = rng.uniform() < 0.3;
        v.at(t, c) = rng.uniform() < 0.3;
        pa.at(t, c) = rng.uniform() < 0.3;
        pv.at(t, c) = rng.uniform() < 0.3;
      }
    }
    gts.push_back({"v" + std::to_string(i), a, v});
    preds.push_back({pa, pv, pa.intersect(pv)});
  }
  const MetricReport s = evaluate_serial(preds, gts), p = evaluate_parallel(preds, gts);
  EXPECT_EQ(s.segment_f, p.segment_f);
  EXPECT_EQ(s.event_f, p.event_f);
  EXPECT_DOUBLE_EQ(s.segment_f[kRowTypeAV],
                   (s.segment_f[kRowAudio] + s.segment_f[kRowVisual] + s.segment_f[kRowAudioVisual]) / 3);
  double mean_audio = 0.0;
  for (const auto& v : s.per_video) mean_audio += v.segment_f[kAudio] / 40.0;
  EXPECT_NEAR(s.segment_f[kRowAudio], mean_audio, 1e-15);
}

TEST(Evaluate, CsvLayout) {
  MetricReport r;
  r.segment_f = {0.5, 0.25, 1.0, 0.58333333, 0.4};
  const std::string csv = metrics_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "type,segment_f,event_f");
  EXPECT_NE(csv.find("Audio,0.500000,0.000000\n"), std::string::npos);
  EXPECT_NE(csv.find("TypeAV,0.583333,"), std::string::npos);
}
