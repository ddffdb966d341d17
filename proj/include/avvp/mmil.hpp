#pragma once

#include <filesystem>

#include "avvp/datamodel.hpp"
#include "avvp/numeric.hpp"

namespace avvp {

enum class PoolMode { Max, Mean, Attentive };

std::string_view pool_mode_name(PoolMode m) noexcept;
PoolMode parse_pool_mode(std::string_view s);

struct MmilParams {
  LinearLayer classifier;     // d -> C, shared by both modalities
  LinearLayer temporal_head;  // d -> C, logits of W_tp
  LinearLayer modality_head;  // d -> C, logits of W_av

  std::size_t classes() const noexcept { return classifier.out_features(); }

  static MmilParams create(std::size_t width, std::size_t classes, Rng& rng);
  MmilParams zeros_like() const;
  void append_slots(std::vector<ParamSlot>& out, const std::string& prefix);

  bool operator==(const MmilParams&) const = default;
};

// Per-snippet event probabilities, each T x C.
struct SnippetProbs {
  Matrix audio;
  Matrix visual;
  Matrix audio_visual;  // audio * visual, cellwise
};

SnippetProbs classify_snippets(const Matrix& h_audio, const Matrix& h_visual,
                               const MmilParams& params);

struct Features2 {
  Matrix audio;
  Matrix visual;
};

// Gradients w.r.t. the classifier inputs; accumulates classifier gradients.
Features2 classify_snippets_backward(const Matrix& h_audio, const Matrix& h_visual,
                                     const SnippetProbs& probs, const Matrix& grad_p_audio,
                                     const Matrix& grad_p_visual, const MmilParams& params,
                                     MmilParams& grads);

struct PoolOutput {
  Vector video;      // clamped to [1e-7, 1 - 1e-7]
  Vector video_raw;  // before clamping; may exceed 1 under attentive pooling
  Vector audio;      // sum_t W_tp[t,0,c] P[t,0,c]
  Vector visual;     // sum_t W_tp[t,1,c] P[t,1,c]
  Tensor3 temporal_weights;  // W_tp, softmax over t
  Tensor3 modality_weights;  // W_av, softmax over m
  std::vector<std::uint8_t> clamped;
};

// Video-level probabilities from attention weights and probabilities. All
// three pooling modes reduce to this once their weights are fixed.
PoolOutput combine_pool(const Tensor3& w_tp, const Tensor3& w_av, const SnippetProbs& probs);

PoolOutput attentive_pool(const Matrix& h_audio, const Matrix& h_visual,
                          const SnippetProbs& probs, const MmilParams& params);
PoolOutput max_pool(const SnippetProbs& probs);
PoolOutput mean_pool(const SnippetProbs& probs);

// dL/d(video), dL/d(audio), dL/d(visual) of a PoolOutput.
struct PoolGrads {
  Vector video;
  Vector audio;
  Vector visual;
};

struct PoolBackward {
  Matrix p_audio;   // dL/dP[:,0,:]
  Matrix p_visual;  // dL/dP[:,1,:]
  Matrix h_audio;   // dL/dh through the attention heads (attentive only)
  Matrix h_visual;
};

// Shared by every pooling mode: max and mean pooling route gradients through
// their fixed hard/uniform weights, attentive also through the heads when
// params/grads are supplied. Gradient is zero for clamped video entries.
PoolBackward pool_backward(const Matrix& h_audio, const Matrix& h_visual,
                           const SnippetProbs& probs, const PoolOutput& pool,
                           const PoolGrads& grads, PoolMode mode, const MmilParams& params,
                           MmilParams& param_grads);

struct SnippetDecisions {
  LabelGrid audio;
  LabelGrid visual;
  LabelGrid audio_visual;
};

// prob >= threshold marks a positive snippet.
SnippetDecisions threshold_probs(const SnippetProbs& probs, double threshold = 0.5);

// Maximal runs of positive snippets per (class, modality), audio then visual
// then audio-visual.
std::vector<EventSegment> parse_video(const SnippetProbs& probs, double threshold = 0.5);

struct ParsedSegment {
  std::string video_id;
  EventSegment segment;
  double confidence = 1.0;  // mean probability over the segment
};

std::vector<ParsedSegment> parse_with_confidence(const std::string& video_id,
                                                 const SnippetProbs& probs,
                                                 double threshold = 0.5);

// `video_id,modality,class,onset,offset,confidence`
std::string parse_csv(std::span<const ParsedSegment> segments, const Taxonomy& tax);

// Reads parse output, or a dense annotation CSV (no confidence column, which
// then defaults to 1).
std::vector<ParsedSegment> load_parse_csv(const std::filesystem::path& path, const Taxonomy& tax);

}  // namespace avvp
