#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "avvp/error.hpp"

namespace avvp {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v);
  Matrix& operator+=(const Matrix& other);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// T x M x C tensor; M is 2 (audio, visual) throughout this library.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t t, std::size_t m, std::size_t c, double fill = 0.0)
      : t_(t), m_(m), c_(c), data_(t * m * c, fill) {}

  std::size_t steps() const noexcept { return t_; }
  std::size_t modalities() const noexcept { return m_; }
  std::size_t classes() const noexcept { return c_; }

  double& operator()(std::size_t t, std::size_t m, std::size_t c) noexcept {
    return data_[(t * m_ + m) * c_ + c];
  }
  double operator()(std::size_t t, std::size_t m, std::size_t c) const noexcept {
    return data_[(t * m_ + m) * c_ + c];
  }
  std::span<const double> values() const noexcept { return data_; }

 private:
  std::size_t t_ = 0, m_ = 0, c_ = 0;
  std::vector<double> data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

bool all_finite(std::span<const double> v) noexcept;

// Deterministic random source. Distribution code is local so that streams are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n);  // [0, n)
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Fully connected layer y = W x + b with W stored out x in.
struct LinearLayer {
  Matrix weight;
  Vector bias;

  LinearLayer() = default;
  LinearLayer(std::size_t in, std::size_t out) : weight(out, in), bias(out, 0.0) {}

  std::size_t in_features() const noexcept { return weight.cols(); }
  std::size_t out_features() const noexcept { return weight.rows(); }

  // Glorot-style uniform weights, zero bias.
  void init_uniform(Rng& rng);

  // Rows of x are inputs; returns rows of outputs.
  Matrix forward(const Matrix& x) const;
  // Accumulates parameter gradients into grad and returns dL/dx.
  Matrix backward(const Matrix& x, const Matrix& dy, LinearLayer& grad) const;

  bool operator==(const LinearLayer&) const = default;
};

// ---- scalar and vector operations --------------------------------------

Vector softmax(std::span<const double> v);
// Given y = softmax(x) and dL/dy, returns dL/dx.
Vector softmax_backward(std::span<const double> y, std::span<const double> dy);

double sigmoid(double x) noexcept;

inline constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) noexcept;

/// Binary cross-entropy summed over classes. Probabilities are clamped to
/// [1e-7, 1 - 1e-7] before the logs. With positive_only the (1-y)log(1-p)
/// term is dropped.
double binary_cross_entropy(std::span<const double> p, std::span<const double> y,
                            bool positive_only = false);
// dL/dp for the clamped BCE; zero where the clamp is active.
Vector binary_cross_entropy_grad(std::span<const double> p, std::span<const double> y,
                                 bool positive_only = false);

// ---- optimisation ------------------------------------------------------

// A named, flat view of one parameter tensor.
struct ParamSlot {
  std::string name;
  std::span<double> value;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments for a list of parameter slots, in slot order.
struct AdamState {
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

AdamState make_adam_state(std::span<const ParamSlot> params);

// One bias-corrected Adam update. grads[i] must match params[i] in length.
// Throws DivergedError naming the slot if a gradient is not finite.
void adam_step(std::span<const ParamSlot> params, std::span<const ParamSlot> grads,
               AdamState& state, double lr, const AdamConfig& cfg = {});

// ---- gradient checking -------------------------------------------------

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares analytic gradients against central differences
/// (f(x+eps) - f(x-eps)) / 2eps for every coordinate of every slot. The
/// relative error of a coordinate is |a - n| / max(|a|, |n|, 1e-6). The
/// floor sits at the central-difference rounding noise (~1e-10 for O(1)
/// losses) divided by the usual 1e-4 tolerance; without it, gradients that
/// are exactly zero by symmetry (biases feeding a softmax) report noise as
/// O(1) relative error.
/// `loss` is evaluated with the slots perturbed in place; slot values are
/// restored before returning.
inline constexpr double kGradCheckFloor = 1e-6;
GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<const ParamSlot> params,
                           std::span<const ParamSlot> analytic, double epsilon);

}  // namespace avvp
