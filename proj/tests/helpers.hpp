#pragma once

// Shared planted-instance generators for the test suites.

#include <vector>

#include "tenrank/matrix_kit.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank::testing {

template <class S>
Tensor3<S> random_tensor(Eigen::Index m, Eigen::Index n, Eigen::Index p,
                         Rng& rng) {
  Tensor3<S> T(m, n, p);
  for (S& v : T.data()) v = rng.scalar<S>();
  return T;
}

/// Random decomposition with r independent-ish Gaussian terms.
template <class S>
Decomposition<S> random_decomposition(Eigen::Index m, Eigen::Index n,
                                      Eigen::Index p, Eigen::Index r, Rng& rng) {
  Decomposition<S> D;
  for (Eigen::Index i = 0; i < r; ++i)
    D.add(rng.vector<S>(m), rng.vector<S>(n), rng.vector<S>(p));
  return D;
}

/// Orthogonal matrix w.r.t. the bilinear form Q^T Q = I: over R a QR-factor,
/// over C a Cayley transform (I - A)(I + A)^{-1} of a skew-symmetric A.
template <class S>
MatrixX<S> bilinear_orthogonal(Eigen::Index n, Rng& rng) {
  if constexpr (scalar_traits<S>::is_complex) {
    MatrixX<Complex> G = rng.matrix<Complex>(n, n);
    MatrixX<Complex> A = 0.3 * (G - G.transpose());
    const MatrixX<Complex> I = MatrixX<Complex>::Identity(n, n);
    return (I - A) * (I + A).inverse();
  } else {
    Eigen::HouseholderQR<MatrixX<double>> qr(rng.matrix<double>(n, n));
    MatrixX<double> Q = qr.householderQ();
    return Q;
  }
}

/// Planted symmetrically odeco tensor: T = sum_i w_i q_i^{(x)3} with the q_i
/// the rows of a bilinear-orthogonal matrix. Returns tensor + plant.
template <class S>
std::pair<Tensor3<S>, Decomposition<S>> planted_sym_odeco(Eigen::Index n,
                                                          Rng& rng) {
  const MatrixX<S> Q = bilinear_orthogonal<S>(n, rng);
  Decomposition<S> D;
  for (Eigen::Index i = 0; i < n; ++i) {
    S w = rng.scalar<S>();
    if (std::abs(w) < 0.3) w += S(1);  // keep weights away from zero
    const S c = detail::cbrt_scalar(w);
    D.add(VectorX<S>(c * Q.row(i).transpose()),
          VectorX<S>(c * Q.row(i).transpose()),
          VectorX<S>(c * Q.row(i).transpose()));
  }
  Tensor3<S> T = assemble(D, n, n, n);
  T.symmetrize_by_averaging();
  return {std::move(T), std::move(D)};
}

/// Planted (ordinary) odeco tensor: three independent orthogonal families.
template <class S>
std::pair<Tensor3<S>, Decomposition<S>> planted_odeco(Eigen::Index n, Rng& rng) {
  const MatrixX<S> U = bilinear_orthogonal<S>(n, rng);
  const MatrixX<S> V = bilinear_orthogonal<S>(n, rng);
  const MatrixX<S> W = bilinear_orthogonal<S>(n, rng);
  Decomposition<S> D;
  for (Eigen::Index i = 0; i < n; ++i) {
    S w = rng.scalar<S>();
    if (std::abs(w) < 0.3) w += S(1);
    D.add(VectorX<S>(U.row(i).transpose()), VectorX<S>(V.row(i).transpose()),
          VectorX<S>(w * W.row(i).transpose()));
  }
  return {assemble(D, n, n, n), std::move(D)};
}

/// Planted independent r x r x p tensor: invertible u- and v-families.
template <class S>
std::pair<Tensor3<S>, Decomposition<S>> planted_independent(Eigen::Index r,
                                                            Eigen::Index p,
                                                            Rng& rng) {
  MatrixX<S> U, V;
  TolerancePolicy pol;
  do {
    U = rng.matrix<S>(r, r);
  } while (smallest_singular_value(U) < 0.05 * U.norm());
  do {
    V = rng.matrix<S>(r, r);
  } while (smallest_singular_value(V) < 0.05 * V.norm());
  Decomposition<S> D;
  for (Eigen::Index i = 0; i < r; ++i)
    D.add(VectorX<S>(U.row(i).transpose()), VectorX<S>(V.row(i).transpose()),
          rng.vector<S>(p));
  return {assemble(D, r, r, p), std::move(D)};
}

/// n x n x 2 tensor whose slices are (I, Jordan block): commuting z-slice
/// quotients exist but the Jordan slice is not diagonalizable.
template <class S>
Tensor3<S> jordan_violation(Eigen::Index n, Rng& rng) {
  MatrixX<S> J = MatrixX<S>::Zero(n, n);
  const S lambda = S(1) + rng.scalar<S>() * S(0.1);
  for (Eigen::Index i = 0; i < n; ++i) {
    J(i, i) = lambda;
    if (i + 1 < n) J(i, i + 1) = S(1);
  }
  return from_z_slices<S>({MatrixX<S>::Identity(n, n), J});
}

/// Max |<x_i, x_j>| (bilinear form) over distinct pairs of a family.
template <class S>
double max_offdiag_bilinear(const std::vector<VectorX<S>>& xs) {
  double worst = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      worst = std::max(worst,
                       std::abs((xs[i].transpose() * xs[j]).value()));
  return worst;
}

/// Relative reconstruction residual of D against T.
template <class S>
double residual(const Tensor3<S>& T, const Decomposition<S>& D) {
  const Tensor3<S> R = assemble(D, T.dim0(), T.dim1(), T.dim2());
  return (T - R).norm() / std::max(1e-300, T.norm());
}

/// True when every plant term matches some recovered term up to scaling
/// (greedy matching on normalized rank-one triples).
template <class S>
bool matches_up_to_perm_scale(const Decomposition<S>& plant,
                              const Decomposition<S>& got, double tol) {
  if (plant.size() != got.size()) return false;
  std::vector<bool> used(got.terms.size(), false);
  for (const auto& t : plant.terms) {
    bool found = false;
    for (std::size_t j = 0; j < got.terms.size() && !found; ++j) {
      if (used[j]) continue;
      const auto& g = got.terms[j];
      // Compare normalized outer structure: |<u,u'>| / (|u||u'|) ~ 1 etc.
      auto align = [](const VectorX<S>& a, const VectorX<S>& b) {
        const double na = a.norm(), nb = b.norm();
        if (na == 0 || nb == 0) return 0.0;
        return std::abs(a.dot(b)) / (na * nb);
      };
      if (align(t.u, g.u) > 1 - tol && align(t.v, g.v) > 1 - tol &&
          align(t.w, g.w) > 1 - tol) {
        used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace tenrank::testing
