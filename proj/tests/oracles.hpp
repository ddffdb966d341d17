#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They are deliberately naive: explicit loops, no shared code with the
// library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "avvp/datamodel.hpp"

namespace oracle {

using avvp::EventSegment;
using avvp::Matrix;

// f + softmax(f f^T / sqrt(d)) f + softmax(f g^T / sqrt(d)) g
inline Matrix hybrid_attention(const Matrix& f, const Matrix& g) {
  const std::size_t T = f.rows(), d = f.cols();
  Matrix out = f;
  for (const Matrix* kv : {&f, &g}) {
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> w(T);
      double z = 0.0;
      for (std::size_t s = 0; s < T; ++s) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += f(t, j) * (*kv)(s, j);
        w[s] = std::exp(dot / std::sqrt(static_cast<double>(d)));
        z += w[s];
      }
      for (std::size_t s = 0; s < T; ++s) {
        for (std::size_t j = 0; j < d; ++j) out(t, j) += w[s] / z * (*kv)(s, j);
      }
    }
  }
  return out;
}

// Video-level probability as the explicit double sum over t and m of
// W_tp * W_av * P, where W_tp[t,m,c] and W_av[t,m,c] are given directly.
// Index layout: w[t][m][c].
using Weights = std::vector<std::vector<std::vector<double>>>;

inline std::vector<double> pooled(const Weights& w_tp, const Weights& w_av, const Weights& p) {
  const std::size_t T = p.size(), C = p[0][0].size();
  std::vector<double> out(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t m = 0; m < 2; ++m) out[c] += w_tp[t][m][c] * w_av[t][m][c] * p[t][m][c];
    }
  }
  return out;
}

// Softmax weights from raw logits: W_tp over t per (m,c), W_av over m per (t,c).
inline Weights temporal_softmax(const Weights& logits) {
  Weights w = logits;
  const std::size_t T = logits.size(), C = logits[0][0].size();
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t c = 0; c < C; ++c) {
      double z = 0.0;
      for (std::size_t t = 0; t < T; ++t) z += std::exp(logits[t][m][c]);
      for (std::size_t t = 0; t < T; ++t) w[t][m][c] = std::exp(logits[t][m][c]) / z;
    }
  }
  return w;
}

inline Weights modality_softmax(const Weights& logits) {
  Weights w = logits;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    for (std::size_t c = 0; c < logits[0][0].size(); ++c) {
      const double a = std::exp(logits[t][0][c]), v = std::exp(logits[t][1][c]);
      w[t][0][c] = a / (a + v);
      w[t][1][c] = v / (a + v);
    }
  }
  return w;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
  double f() const {
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
};

inline double iou(const EventSegment& a, const EventSegment& b) {
  const int inter = std::max(0, std::min(a.offset, b.offset) - std::max(a.onset, b.onset));
  const int uni = (a.offset - a.onset) + (b.offset - b.onset) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Maximum number of one-to-one pairs with matching modality and class and
// IoU >= threshold, by trying every assignment.
inline Counts optimal_event_counts(const std::vector<EventSegment>& pred,
                                   const std::vector<EventSegment>& gt, double threshold) {
  std::vector<bool> used(gt.size(), false);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t i) -> std::size_t {
    if (i == pred.size()) return 0;
    std::size_t b = best(i + 1);  // leave pred[i] unmatched
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (used[j] || gt[j].cls != pred[i].cls || gt[j].modality != pred[i].modality) continue;
      if (iou(pred[i], gt[j]) < threshold) continue;
      used[j] = true;
      b = std::max(b, 1 + best(i + 1));
      used[j] = false;
    }
    return b;
  };
  Counts c;
  c.tp = best(0);
  c.fp = pred.size() - c.tp;
  c.fn = gt.size() - c.tp;
  return c;
}

// Runs of ones in bit pattern `bits` (bit t = snippet t) as events.
inline std::vector<EventSegment> runs(unsigned bits, int steps, std::size_t cls,
                                      avvp::Modality m) {
  std::vector<EventSegment> out;
  int t = 0;
  while (t < steps) {
    if (!(bits >> t & 1u)) {
      ++t;
      continue;
    }
    int e = t;
    while (e < steps && (bits >> e & 1u)) ++e;
    out.push_back({cls, m, t, e});
    t = e;
  }
  return out;
}

}  // namespace oracle
