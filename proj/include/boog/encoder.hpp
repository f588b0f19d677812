#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "boog/graph_store.hpp"
#include "boog/numerics.hpp"
#include "boog/subgraph.hpp"

namespace boog {

/// Model hyper-parameters. Defaults sit inside the tuned grid ranges
/// (alpha, beta, T in [0.1, 0.9]; tau in {0.1, 1, 10}).
struct Hyper {
  double alpha = 0.1;     // class-label weight in super nodes
  double beta = 0.1;      // self vs. neighborhood mix
  double tau = 0.1;       // contrastive temperature
  double threshold = 0.5; // zero-shot link decision threshold T
  int k = 2;              // neighborhood hops

  void validate() const {
    if (!(tau > 0.0)) throw ParameterError("tau must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in [0,1]");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold T must lie in (0,1)");
    if (k < 1) throw ParameterError("k must be >= 1");
    if (!std::isfinite(alpha)) throw ParameterError("alpha must be finite");
  }
};

/// Learnable encoder tensors: attention projections W1, W2, scoring vector
/// g = [g_anchor ; g_neighbor] and the output map W3.
template <typename Scalar>
struct EncoderParamsT {
  MatrixX<Scalar> w1;
  MatrixX<Scalar> w2;
  MatrixX<Scalar> w3;
  VectorX<Scalar> g;
  bool trainable = true;

  int dim() const { return static_cast<int>(w1.rows()); }
  Eigen::Index size() const { return 3 * w1.size() + g.size(); }

  static EncoderParamsT zeros(int d) {
    return {MatrixX<Scalar>::Zero(d, d), MatrixX<Scalar>::Zero(d, d), MatrixX<Scalar>::Zero(d, d),
            VectorX<Scalar>::Zero(2 * d), true};
  }

  static EncoderParamsT identity(int d) {
    return {MatrixX<Scalar>::Identity(d, d), MatrixX<Scalar>::Identity(d, d),
            MatrixX<Scalar>::Identity(d, d), VectorX<Scalar>::Ones(2 * d), true};
  }

  /// Glorot-uniform initialization from a seeded stream.
  static EncoderParamsT init(int d, std::uint64_t seed) {
    if (d < 1) throw ParameterError("encoder dim must be positive");
    Rng rng(seed);
    EncoderParamsT p = zeros(d);
    const double wb = std::sqrt(6.0 / (2.0 * d));
    const double gb = std::sqrt(6.0 / (2.0 * d + 1.0));
    for (MatrixX<Scalar>* w : {&p.w1, &p.w2, &p.w3}) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) (*w)(r, c) = Scalar(rng.uniform(-wb, wb));
    }
    for (int i = 0; i < 2 * d; ++i) p.g[i] = Scalar(rng.uniform(-gb, gb));
    return p;
  }

  /// Flat layout: W1, W2, W3 row-major, then g.
  VectorX<Scalar> flatten() const {
    const int d = dim();
    VectorX<Scalar> out(size());
    Eigen::Index at = 0;
    for (const MatrixX<Scalar>* w : {&w1, &w2, &w3}) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) out[at++] = (*w)(r, c);
    }
    out.tail(g.size()) = g;
    return out;
  }

  static EncoderParamsT unflatten(int d, const VectorX<Scalar>& flat) {
    EncoderParamsT p = zeros(d);
    if (flat.size() != p.size()) {
      throw ShapeError("encoder params: flat vector has " + std::to_string(flat.size()) +
                       " entries, expected " + std::to_string(p.size()));
    }
    Eigen::Index at = 0;
    for (MatrixX<Scalar>* w : {&p.w1, &p.w2, &p.w3}) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) (*w)(r, c) = flat[at++];
    }
    p.g = flat.tail(2 * d);
    return p;
  }

  void validate() const {
    const auto d = w1.rows();
    if (w1.cols() != d || w2.rows() != d || w2.cols() != d || w3.rows() != d || w3.cols() != d ||
        g.size() != 2 * d) {
      throw ShapeError("encoder params: inconsistent shapes W1 " + shape_of(w1) + ", W2 " +
                       shape_of(w2) + ", W3 " + shape_of(w3) + ", g " + shape_of(g));
    }
    if (!all_finite(w1) || !all_finite(w2) || !all_finite(w3) || !all_finite(g)) {
      throw NumericalError("encoder params contain non-finite values");
    }
  }

  EncoderParamsT& operator+=(const EncoderParamsT& o) {
    w1 += o.w1;
    w2 += o.w2;
    w3 += o.w3;
    g += o.g;
    return *this;
  }
};

using EncoderParams = EncoderParamsT<double>;

/// Per-instance super nodes before (`pre`) and after (`post`) encoding, one
/// row per class, plus the attention each super node paid its neighbors.
template <typename Scalar>
struct SuperNodeBundleT {
  MatrixX<Scalar> pre;
  MatrixX<Scalar> post;
  std::vector<VectorX<Scalar>> attention;

  int classes() const { return static_cast<int>(pre.rows()); }
};

using SuperNodeBundle = SuperNodeBundleT<double>;

/// Row j = anchor + alpha * class_j.
template <typename Scalar, typename DerivedA, typename DerivedC>
MatrixX<Scalar> build_super_nodes(const Eigen::MatrixBase<DerivedA>& anchor,
                                  const Eigen::MatrixBase<DerivedC>& classes, Scalar alpha) {
  if (anchor.size() != classes.cols()) {
    throw ShapeError("build_super_nodes: anchor " + shape_of(anchor) + " vs classes " + shape_of(classes));
  }
  MatrixX<Scalar> pre = alpha * classes;
  pre.rowwise() += anchor.transpose();
  return pre;
}

inline Matrix build_super_nodes(const AnchorTask& anchor, const ClassCatalog& catalog, double alpha) {
  return build_super_nodes<double>(anchor.anchor_repr, catalog.embeddings, alpha);
}

namespace detail {

/// The attention score g^T [W1 p || W2 h_u] splits into an anchor part
/// (W1^T g_a) . p, shared by all neighbors, and a per-neighbor part
/// (W2^T g_n) . h_u, shared by all super nodes of an instance.
template <typename Scalar>
struct AttentionContext {
  VectorX<Scalar> anchor_dir;     // W1^T g_a
  VectorX<Scalar> neighbor_part;  // H W2^T g_n

  AttentionContext(const EncoderParamsT<Scalar>& params, const MatrixX<Scalar>& neighbors) {
    const int d = params.dim();
    if (neighbors.rows() > 0 && neighbors.cols() != d) {
      throw ShapeError("attention: neighbors " + shape_of(neighbors) + " for encoder dim " + std::to_string(d));
    }
    anchor_dir = params.w1.transpose() * params.g.head(d);
    neighbor_part = neighbors * (params.w2.transpose() * params.g.tail(d));
  }

  /// Pre-activation scores of super node p.
  template <typename DerivedP>
  VectorX<Scalar> scores(const Eigen::MatrixBase<DerivedP>& p) const {
    return neighbor_part.array() + anchor_dir.dot(p);
  }
};

template <typename Scalar>
VectorX<Scalar> relu_softmax(const VectorX<Scalar>& scores) {
  if (scores.size() == 0) return {};
  return softmax(scores.unaryExpr([](Scalar s) { return relu(s); }));
}

}  // namespace detail

/// Attention of super node p over its neighbors (rows of `neighbors`).
/// Empty neighborhood gives an empty weight vector.
template <typename Scalar, typename DerivedP>
VectorX<Scalar> attention_weights(const Eigen::MatrixBase<DerivedP>& p, const MatrixX<Scalar>& neighbors,
                                  const EncoderParamsT<Scalar>& params) {
  if (p.size() != params.dim()) {
    throw ShapeError("attention: super node " + shape_of(p) + " for encoder dim " + std::to_string(params.dim()));
  }
  if (neighbors.rows() == 0) return {};
  const detail::AttentionContext<Scalar> ctx(params, neighbors);
  return detail::relu_softmax<Scalar>(ctx.scores(p));
}

/// Super nodes, attention over the shared neighborhood, and aggregation
/// post_j = W3 [beta pre_j + (1 - beta) sum_u a_ju h_u]. With no neighbors
/// the sum is the zero vector.
template <typename Scalar>
SuperNodeBundleT<Scalar> encode(const AnchorTaskT<Scalar>& anchor, const MatrixX<Scalar>& classes,
                                const EncoderParamsT<Scalar>& params, const Hyper& hyper) {
  const int d = params.dim();
  if (anchor.anchor_repr.size() != d) {
    throw ShapeError("encode: anchor dim " + std::to_string(anchor.anchor_repr.size()) +
                     " but encoder dim " + std::to_string(d));
  }
  const auto& hood = anchor.neighbor_reprs;
  const Scalar beta = Scalar(hyper.beta);

  SuperNodeBundleT<Scalar> out;
  out.pre = build_super_nodes<Scalar>(anchor.anchor_repr, classes, Scalar(hyper.alpha));
  const Eigen::Index C = out.pre.rows();
  MatrixX<Scalar> mixed = beta * out.pre;
  out.attention.resize(static_cast<std::size_t>(C));
  if (hood.rows() > 0) {
    const detail::AttentionContext<Scalar> ctx(params, hood);
    for (Eigen::Index j = 0; j < C; ++j) {
      auto& a = out.attention[static_cast<std::size_t>(j)];
      a = detail::relu_softmax<Scalar>(ctx.scores(out.pre.row(j).transpose()));
      mixed.row(j) += (Scalar(1) - beta) * (hood.transpose() * a).transpose();
    }
  }
  out.post = mixed * params.w3.transpose();
  return out;
}

inline SuperNodeBundle encode(const AnchorTask& anchor, const ClassCatalog& catalog,
                              const EncoderParams& params, const Hyper& hyper) {
  return encode<double>(anchor, catalog.embeddings, params, hyper);
}

/// Gradient of sum_j <upstream_j, post_j> with respect to every encoder
/// tensor. ReLU subgradient at exactly 0 is 0.
template <typename Scalar>
EncoderParamsT<Scalar> encode_grad(const AnchorTaskT<Scalar>& anchor, const MatrixX<Scalar>& classes,
                                   const EncoderParamsT<Scalar>& params, const Hyper& hyper,
                                   const MatrixX<Scalar>& upstream) {
  const int d = params.dim();
  const Eigen::Index C = classes.rows();
  if (upstream.rows() != C || upstream.cols() != d) {
    throw ShapeError("encode_grad: upstream " + shape_of(upstream) + ", expected " +
                     std::to_string(C) + "x" + std::to_string(d));
  }
  if (anchor.anchor_repr.size() != d) {
    throw ShapeError("encode_grad: anchor dim " + std::to_string(anchor.anchor_repr.size()) +
                     " but encoder dim " + std::to_string(d));
  }
  const auto& hood = anchor.neighbor_reprs;
  const Scalar beta = Scalar(hyper.beta);
  const MatrixX<Scalar> pre = build_super_nodes<Scalar>(anchor.anchor_repr, classes, Scalar(hyper.alpha));

  EncoderParamsT<Scalar> grad = EncoderParamsT<Scalar>::zeros(d);
  // dL/dx_j = W3^T delta_j for every class at once.
  const MatrixX<Scalar> dmixed = upstream * params.w3;
  MatrixX<Scalar> mixed = beta * pre;

  if (hood.rows() > 0) {
    const detail::AttentionContext<Scalar> ctx(params, hood);
    const auto g_anchor = params.g.head(d);
    const auto g_neighbor = params.g.tail(d);
    VectorX<Scalar> sum_ds_h = VectorX<Scalar>::Zero(d);  // sum_j H^T ds_j
    VectorX<Scalar> sum_ds_p = VectorX<Scalar>::Zero(d);  // sum_j (sum_u ds_ju) p_j
    for (Eigen::Index j = 0; j < C; ++j) {
      const VectorX<Scalar> p = pre.row(j).transpose();
      const VectorX<Scalar> s = ctx.scores(p);
      const VectorX<Scalar> a = detail::relu_softmax<Scalar>(s);
      mixed.row(j) += (Scalar(1) - beta) * (hood.transpose() * a).transpose();

      const VectorX<Scalar> dm = (Scalar(1) - beta) * dmixed.row(j).transpose();
      const VectorX<Scalar> da = hood * dm;
      VectorX<Scalar> ds = (a.array() * (da.array() - a.dot(da))).matrix();
      for (Eigen::Index u = 0; u < ds.size(); ++u) {
        if (!(s[u] > Scalar(0))) ds[u] = Scalar(0);
      }
      sum_ds_h += hood.transpose() * ds;
      sum_ds_p += ds.sum() * p;
    }
    grad.g.head(d) = params.w1 * sum_ds_p;
    grad.g.tail(d) = params.w2 * sum_ds_h;
    grad.w1 = g_anchor * sum_ds_p.transpose();
    grad.w2 = g_neighbor * sum_ds_h.transpose();
  }
  grad.w3 = upstream.transpose() * mixed;
  return grad;
}

inline EncoderParams encode_grad(const AnchorTask& anchor, const ClassCatalog& catalog,
                                 const EncoderParams& params, const Hyper& hyper, const Matrix& upstream) {
  return encode_grad<double>(anchor, catalog.embeddings, params, hyper, upstream);
}

}  // namespace boog
