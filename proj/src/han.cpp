#include "avvp/han.hpp"

#include <cmath>

namespace avvp {

namespace {

constexpr const char* kSlotNames[4] = {"audio_self", "audio_cross", "visual_self", "visual_cross"};

// Which sequence each slot queries with and attends over (0 = audio, 1 = visual).
constexpr std::size_t kQuerySource[4] = {0, 0, 1, 1};
constexpr std::size_t kKeySource[4] = {0, 1, 1, 0};

void append_layer(std::vector<ParamSlot>& out, LinearLayer& layer, const std::string& name) {
  out.push_back({name + ".weight", layer.weight.values()});
  out.push_back({name + ".bias", layer.bias});
}

}  // namespace

HanParams HanParams::create(std::size_t d_audio, std::size_t d_visual, std::size_t width,
                            bool learned_qk, Rng& rng) {
  if (width == 0) throw InvalidArgument("HAN width must be > 0");
  HanParams p;
  p.audio_proj = LinearLayer(d_audio, width);
  p.visual_proj = LinearLayer(d_visual, width);
  p.audio_proj.init_uniform(rng);
  p.visual_proj.init_uniform(rng);
  p.learned_qk = learned_qk;
  if (learned_qk) {
    for (std::size_t s = 0; s < 4; ++s) {
      p.query[s] = LinearLayer(width, width);
      p.key[s] = LinearLayer(width, width);
      p.query[s].init_uniform(rng);
      p.key[s].init_uniform(rng);
    }
  }
  return p;
}

HanParams HanParams::zeros_like() const {
  HanParams z;
  z.audio_proj = LinearLayer(audio_proj.in_features(), audio_proj.out_features());
  z.visual_proj = LinearLayer(visual_proj.in_features(), visual_proj.out_features());
  z.learned_qk = learned_qk;
  for (std::size_t s = 0; s < 4; ++s) {
    z.query[s] = LinearLayer(query[s].in_features(), query[s].out_features());
    z.key[s] = LinearLayer(key[s].in_features(), key[s].out_features());
  }
  return z;
}

void HanParams::append_slots(std::vector<ParamSlot>& out, const std::string& prefix) {
  append_layer(out, audio_proj, prefix + "audio_proj");
  append_layer(out, visual_proj, prefix + "visual_proj");
  if (!learned_qk) return;
  for (std::size_t s = 0; s < 4; ++s) {
    append_layer(out, query[s], prefix + "query_" + kSlotNames[s]);
    append_layer(out, key[s], prefix + "key_" + kSlotNames[s]);
  }
}

ProjectedInputs project_inputs(const VideoBag& bag, const HanParams& params) {
  bag.validate();
  if (bag.audio.cols() != params.audio_proj.in_features()) {
    throw ShapeError("video " + bag.video_id + ": audio width " +
                     std::to_string(bag.audio.cols()) + " but model expects " +
                     std::to_string(params.audio_proj.in_features()));
  }
  if (bag.visual.cols() != params.visual_proj.in_features()) {
    throw ShapeError("video " + bag.video_id + ": visual width " +
                     std::to_string(bag.visual.cols()) + " but model expects " +
                     std::to_string(params.visual_proj.in_features()));
  }
  return {params.audio_proj.forward(bag.audio), params.visual_proj.forward(bag.visual)};
}

void project_inputs_backward(const VideoBag& bag, const ProjectedInputs& grad_out,
                             const HanParams& params, HanParams& grads) {
  grads.audio_proj.weight += matmul_tn(grad_out.audio, bag.audio);
  grads.visual_proj.weight += matmul_tn(grad_out.visual, bag.visual);
  for (std::size_t t = 0; t < grad_out.audio.rows(); ++t) {
    for (std::size_t j = 0; j < params.width(); ++j) {
      grads.audio_proj.bias[j] += grad_out.audio(t, j);
      grads.visual_proj.bias[j] += grad_out.visual(t, j);
    }
  }
}

AttendResult attend_qkv(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (q.cols() != k.cols()) throw ShapeError("attention query/key width mismatch");
  if (k.rows() != v.rows()) throw ShapeError("attention key/value length mismatch");
  if (q.rows() == 0 || k.rows() == 0) throw ShapeError("attention over empty sequence");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix logits = matmul_nt(q, k);
  AttentionMap map(q.rows(), k.rows());
  for (std::size_t t = 0; t < q.rows(); ++t) {
    auto row = logits.row(t);
    for (double& x : row) x *= scale;
    const Vector w = softmax(row);
    std::copy(w.begin(), w.end(), map.row(t).begin());
  }
  return {matmul(map, v), std::move(map)};
}

AttendResult attend(const Matrix& query_seq, const Matrix& key_value_seq) {
  if (query_seq.cols() != key_value_seq.cols()) {
    throw ShapeError("attend: query width " + std::to_string(query_seq.cols()) +
                     " != key/value width " + std::to_string(key_value_seq.cols()));
  }
  return attend_qkv(query_seq, key_value_seq, key_value_seq);
}

AttendGrads attend_qkv_backward(const Matrix& q, const Matrix& k, const Matrix& v,
                                const AttentionMap& map, const Matrix& grad_out) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix grad_map = matmul_nt(grad_out, v);
  Matrix grad_logits(map.rows(), map.cols());
  for (std::size_t t = 0; t < map.rows(); ++t) {
    const Vector d = softmax_backward(map.row(t), grad_map.row(t));
    auto out = grad_logits.row(t);
    for (std::size_t s = 0; s < d.size(); ++s) out[s] = d[s] * scale;
  }
  return {matmul(grad_logits, k), matmul_tn(grad_logits, q), matmul_tn(map, grad_out)};
}

HanOutput han_forward(const Matrix& f_audio, const Matrix& f_visual, const HanParams& params,
                      HanCache* cache) {
  if (f_audio.rows() != f_visual.rows() || f_audio.cols() != f_visual.cols()) {
    throw ShapeError("HAN inputs must share shape: audio " + std::to_string(f_audio.rows()) +
                     "x" + std::to_string(f_audio.cols()) + ", visual " +
                     std::to_string(f_visual.rows()) + "x" + std::to_string(f_visual.cols()));
  }
  if (f_audio.cols() != params.width()) throw ShapeError("HAN input width != model width");
  const Matrix* src[2] = {&f_audio, &f_visual};

  HanOutput out{f_audio, f_visual, {}};
  Matrix* dst[2] = {&out.audio, &out.visual};
  for (std::size_t s = 0; s < 4; ++s) {
    const Matrix& qs = *src[kQuerySource[s]];
    const Matrix& ks = *src[kKeySource[s]];
    Matrix q = params.learned_qk ? params.query[s].forward(qs) : qs;
    Matrix k = params.learned_qk ? params.key[s].forward(ks) : ks;
    AttendResult r = attend_qkv(q, k, ks);
    *dst[kQuerySource[s]] += r.out;
    out.maps[s] = r.map;
    if (cache) {
      cache->q[s] = std::move(q);
      cache->k[s] = std::move(k);
      cache->maps[s] = std::move(r.map);
    }
  }
  if (cache) cache->in = {f_audio, f_visual};
  return out;
}

ProjectedInputs han_backward(const HanCache& cache, const Matrix& grad_audio,
                             const Matrix& grad_visual, const HanParams& params,
                             HanParams& grads) {
  const Matrix* src[2] = {&cache.in.audio, &cache.in.visual};
  const Matrix* grad_src[2] = {&grad_audio, &grad_visual};
  // Skip connections pass the gradient straight through.
  ProjectedInputs g{grad_audio, grad_visual};
  Matrix* grad_in[2] = {&g.audio, &g.visual};

  for (std::size_t s = 0; s < 4; ++s) {
    const std::size_t qi = kQuerySource[s];
    const std::size_t ki = kKeySource[s];
    AttendGrads ag =
        attend_qkv_backward(cache.q[s], cache.k[s], *src[ki], cache.maps[s], *grad_src[qi]);
    if (params.learned_qk) {
      *grad_in[qi] += params.query[s].backward(*src[qi], ag.q, grads.query[s]);
      *grad_in[ki] += params.key[s].backward(*src[ki], ag.k, grads.key[s]);
    } else {
      *grad_in[qi] += ag.q;
      *grad_in[ki] += ag.k;
    }
    *grad_in[ki] += ag.v;
  }
  return g;
}

}  // namespace avvp
