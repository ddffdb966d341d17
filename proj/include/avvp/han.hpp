#pragma once

#include <array>

#include "avvp/datamodel.hpp"
#include "avvp/numeric.hpp"

namespace avvp {

// T x T row-stochastic matrix; row t holds the weights query t puts on each key.
using AttentionMap = Matrix;

enum AttentionSlot : std::size_t { kAudioSelf = 0, kAudioCross = 1, kVisualSelf = 2, kVisualCross = 3 };

struct HanParams {
  LinearLayer audio_proj;   // d_a -> d
  LinearLayer visual_proj;  // d_v -> d
  // Learned query/key maps for the four attention functions, indexed by
  // AttentionSlot. Empty unless learned_qk is set.
  bool learned_qk = false;
  std::array<LinearLayer, 4> query;
  std::array<LinearLayer, 4> key;

  std::size_t width() const noexcept { return audio_proj.out_features(); }

  static HanParams create(std::size_t d_audio, std::size_t d_visual, std::size_t width,
                          bool learned_qk, Rng& rng);
  HanParams zeros_like() const;
  void append_slots(std::vector<ParamSlot>& out, const std::string& prefix);

  bool operator==(const HanParams&) const = default;
};

struct ProjectedInputs {
  Matrix audio;   // T x d
  Matrix visual;  // T x d
};

ProjectedInputs project_inputs(const VideoBag& bag, const HanParams& params);
// Accumulates projection gradients.
void project_inputs_backward(const VideoBag& bag, const ProjectedInputs& grad_out,
                             const HanParams& params, HanParams& grads);

struct AttendResult {
  Matrix out;
  AttentionMap map;
};

/// softmax(q k^T / sqrt(d)) v, row by row. d is the width of q and k.
AttendResult attend_qkv(const Matrix& q, const Matrix& k, const Matrix& v);

/// Raw-feature attention: keys and values are both `key_value_seq`. With
/// key_value_seq == query_seq this is self-attention, otherwise cross-modal.
AttendResult attend(const Matrix& query_seq, const Matrix& key_value_seq);

struct AttendGrads {
  Matrix q, k, v;
};
AttendGrads attend_qkv_backward(const Matrix& q, const Matrix& k, const Matrix& v,
                                const AttentionMap& map, const Matrix& grad_out);

struct HanCache {
  ProjectedInputs in;
  std::array<Matrix, 4> q;  // per slot, after optional projection
  std::array<Matrix, 4> k;
  std::array<AttentionMap, 4> maps;
};

struct HanOutput {
  Matrix audio;   // f_a + g_sa(f_a, f_a) + g_ca(f_a, f_v)
  Matrix visual;  // f_v + g_sa(f_v, f_v) + g_ca(f_v, f_a)
  std::array<AttentionMap, 4> maps;  // indexed by AttentionSlot
};

HanOutput han_forward(const Matrix& f_audio, const Matrix& f_visual, const HanParams& params,
                      HanCache* cache = nullptr);

// Returns gradients w.r.t. f_audio / f_visual and accumulates q/k projection
// gradients when learned_qk is on.
ProjectedInputs han_backward(const HanCache& cache, const Matrix& grad_audio,
                             const Matrix& grad_visual, const HanParams& params,
                             HanParams& grads);

}  // namespace avvp
