#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "boog/encoder.hpp"
#include "oracle/naive.hpp"

namespace testing_support {

using namespace boog;

inline naive::Vec to_naive(const Vector& v) { return naive::Vec(v.data(), v.data() + v.size()); }

inline naive::Mat to_naive(const Matrix& m) {
  naive::Mat out(static_cast<std::size_t>(m.rows()), naive::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline naive::Params to_naive(const EncoderParams& p) {
  return {to_naive(p.w1), to_naive(p.w2), to_naive(p.w3), to_naive(p.g)};
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.uniform(-1.0, 1.0);
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

inline AnchorTask random_anchor(Rng& rng, int d, int neighbors) {
  AnchorTask t;
  t.anchor_repr = random_vector(rng, d);
  t.neighbor_reprs = random_matrix(rng, neighbors, d);
  for (int u = 0; u < neighbors; ++u) t.neighborhood.push_back(static_cast<NodeId>(u + 1));
  return t;
}

/// Encoder tensors at a scale that keeps a healthy mix of active and
/// inactive attention scores.
inline EncoderParams random_params(Rng& rng, int d) {
  EncoderParams p = EncoderParams::zeros(d);
  p.w1 = random_matrix(rng, d, d);
  p.w2 = random_matrix(rng, d, d);
  p.w3 = random_matrix(rng, d, d);
  p.g = random_vector(rng, 2 * d);
  return p;
}

/// |a - b| relative to the larger magnitude, with an absolute floor.
inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("boog_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
