#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "boog/errors.hpp"

namespace boog {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

template <typename Derived>
std::string shape_of(const Eigen::EigenBase<Derived>& x) {
  std::ostringstream os;
  os << x.rows() << "x" << x.cols();
  return os.str();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().array().isFinite().all();
}

template <typename Scalar>
inline Scalar relu(Scalar x) {
  return x > Scalar(0) ? x : Scalar(0);
}

/// Matrix-vector product with an explicit shape check.
template <typename DerivedM, typename DerivedV>
VectorX<typename DerivedM::Scalar> matvec(const Eigen::MatrixBase<DerivedM>& m,
                                          const Eigen::MatrixBase<DerivedV>& v) {
  if (v.cols() != 1 || m.cols() != v.rows()) {
    throw ShapeError("matvec: matrix is " + shape_of(m) + " but vector is " + shape_of(v));
  }
  return m * v;
}

/// Numerically stable softmax (max-subtracted).
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() == 0) throw ContractError("softmax: empty input");
  const Scalar top = scores.maxCoeff();
  VectorX<Scalar> e = (scores.array() - top).exp().matrix();
  return e / e.sum();
}

/// Cosine similarity. A zero-norm operand yields 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_sim(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw ShapeError("cosine_sim: " + shape_of(a) + " vs " + shape_of(b));
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

/// Gradient of cosine_sim(a, b) with respect to a. Zero when either norm is 0.
template <typename DerivedA, typename DerivedB>
VectorX<typename DerivedA::Scalar> cosine_sim_grad(const Eigen::MatrixBase<DerivedA>& a,
                                                   const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return VectorX<Scalar>::Zero(a.size());
  const Scalar cos = a.dot(b) / (na * nb);
  return b / (na * nb) - cos * a / (na * na);
}

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators for a flat parameter vector.
struct AdamState {
  AdamConfig config;
  Vector m;
  Vector v;
  std::uint64_t step = 0;

  static AdamState fresh(Eigen::Index size, AdamConfig config = {}) {
    return AdamState{config, Vector::Zero(size), Vector::Zero(size), 0};
  }
};

/// One bias-corrected Adam update applied in place.
inline void adam_step(Eigen::Ref<Vector> params, const Vector& grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: params " + shape_of(params) + ", grads " + shape_of(grads) +
                     ", state " + shape_of(state.m));
  }
  const AdamConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grads.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  params.array() -= c.lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + c.eps);
}

/// Central-difference gradient of a scalar function of a flat vector.
inline Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                               double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_grad: step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double up = f(probe);
    probe[i] = xi - h;
    const double down = f(probe);
    probe[i] = xi;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Seeded generator with portable distributions: identical streams on every
/// standard library, unlike std::*_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace boog
