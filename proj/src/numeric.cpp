#include "avvp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace avvp {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw ShapeError("matrix += shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul inner dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto br = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt inner dimension mismatch");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto br = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < ar.size(); ++k) s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_tn inner dimension mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ar = a.row(k);
    auto br = b.row(k);
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) continue;
      auto o = out.row(i);
      for (std::size_t j = 0; j < br.size(); ++j) o[j] += aki * br[j];
    }
  }
  return out;
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::below(0)");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  // splitmix64 finaliser over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void LinearLayer::init_uniform(Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(in_features() + out_features()));
  for (double& w : weight.values()) w = rng.uniform(-limit, limit);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Matrix LinearLayer::forward(const Matrix& x) const {
  if (x.cols() != in_features()) {
    throw ShapeError("linear layer expects width " + std::to_string(in_features()) + ", got " +
                     std::to_string(x.cols()));
  }
  Matrix y = matmul_nt(x, weight);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto yr = y.row(r);
    for (std::size_t j = 0; j < yr.size(); ++j) yr[j] += bias[j];
  }
  return y;
}

Matrix LinearLayer::backward(const Matrix& x, const Matrix& dy, LinearLayer& grad) const {
  grad.weight += matmul_tn(dy, x);
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    auto dr = dy.row(r);
    for (std::size_t j = 0; j < dr.size(); ++j) grad.bias[j] += dr[j];
  }
  return matmul(dy, weight);
}

Vector softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("softmax of empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& o : out) o /= sum;
  return out;
}

Vector softmax_backward(std::span<const double> y, std::span<const double> dy) {
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  Vector dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (dy[i] - dot);
  return dx;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp_prob(double p) noexcept { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

namespace {
void check_lengths(std::span<const double> p, std::span<const double> y) {
  if (p.size() != y.size()) {
    throw InvalidArgument("BCE length mismatch: " + std::to_string(p.size()) + " vs " +
                          std::to_string(y.size()));
  }
}
}  // namespace

double binary_cross_entropy(std::span<const double> p, std::span<const double> y,
                            bool positive_only) {
  check_lengths(p, y);
  double loss = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double pc = clamp_prob(p[c]);
    loss -= y[c] * std::log(pc);
    if (!positive_only) loss -= (1.0 - y[c]) * std::log(1.0 - pc);
  }
  return loss;
}

Vector binary_cross_entropy_grad(std::span<const double> p, std::span<const double> y,
                                 bool positive_only) {
  check_lengths(p, y);
  Vector g(p.size(), 0.0);
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] < kProbClamp || p[c] > 1.0 - kProbClamp) continue;
    g[c] = -y[c] / p[c];
    if (!positive_only) g[c] += (1.0 - y[c]) / (1.0 - p[c]);
  }
  return g;
}

AdamState make_adam_state(std::span<const ParamSlot> params) {
  AdamState s;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.value.size(), 0.0);
    s.second_moment.emplace_back(p.value.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<const ParamSlot> params, std::span<const ParamSlot> grads,
               AdamState& state, double lr, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter/gradient/state slot count mismatch");
  }
  if (!(lr >= 0.0)) throw InvalidArgument("adam_step: learning rate must be >= 0");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value.size() != grads[i].value.size() ||
        params[i].value.size() != state.first_moment[i].size()) {
      throw ShapeError("adam_step: shape mismatch in " + params[i].name);
    }
    for (std::size_t k = 0; k < grads[i].value.size(); ++k) {
      if (!std::isfinite(grads[i].value[k])) {
        throw DivergedError("non-finite gradient in " + params[i].name + "[" +
                            std::to_string(k) + "]");
      }
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    auto w = params[i].value;
    auto g = grads[i].value;
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      if (lr == 0.0) continue;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<const ParamSlot> params,
                           std::span<const ParamSlot> analytic, double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw InvalidArgument("grad_check epsilon must lie in [1e-6, 1e-3]");
  }
  if (params.size() != analytic.size()) throw ShapeError("grad_check slot count mismatch");
  const double base1 = loss();
  const double base2 = loss();
  if (base1 != base2) {
    std::ostringstream os;
    os.precision(17);
    os << "loss differs between identical evaluations: " << base1 << " vs " << base2;
    throw DeterminismError(os.str());
  }

  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].value;
    auto a = analytic[i].value;
    if (w.size() != a.size()) throw ShapeError("grad_check shape mismatch in " + params[i].name);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double saved = w[k];
      w[k] = saved + epsilon;
      const double plus = loss();
      w[k] = saved - epsilon;
      const double minus = loss();
      w[k] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double denom = std::max({std::abs(a[k]), std::abs(numeric), kGradCheckFloor});
      const double rel = std::abs(a[k] - numeric) / denom;
      ++report.coordinates;
      if (report.worst_param.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[i].name;
        report.worst_index = k;
        report.worst_analytic = a[k];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace avvp
