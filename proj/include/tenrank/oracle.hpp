#pragma once

#include <string>
#include <vector>

#include "tenrank/bounds.hpp"
#include "tenrank/matrix_kit.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

template <class S>
struct AlsResult {
  Decomposition<S> decomposition;
  double residual = 1.0;               ///< ||T - assemble|| / ||T||
  std::vector<double> history;         ///< per-sweep residuals, best restart
  int best_restart = -1;
};

namespace detail {

template <class S>
MatrixX<S> unfold(const Tensor3<S>& T, int mode) {
  const Eigen::Index m = T.dim0(), n = T.dim1(), p = T.dim2();
  MatrixX<S> M;
  switch (mode) {
    case 0:
      M.resize(m, n * p);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index k = 0; k < p; ++k) M(i, j + k * n) = T(i, j, k);
      break;
    case 1:
      M.resize(n, m * p);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index k = 0; k < p; ++k) M(j, i + k * m) = T(i, j, k);
      break;
    default:
      M.resize(p, m * n);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index k = 0; k < p; ++k) M(k, i + j * m) = T(i, j, k);
  }
  return M;
}

/// Column-wise Khatri-Rao product, row index = i + j * A.rows().
template <class S>
MatrixX<S> khatri_rao(const MatrixX<S>& A, const MatrixX<S>& B) {
  MatrixX<S> K(A.rows() * B.rows(), A.cols());
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      for (Eigen::Index i = 0; i < A.rows(); ++i)
        K(i + j * A.rows(), c) = A(i, c) * B(j, c);
  return K;
}

/// Least-squares factor update: minimizes ||X - F K^T||_F over F.
template <class S>
MatrixX<S> solve_factor(const MatrixX<S>& X, const MatrixX<S>& K) {
  MatrixX<S> G = (K.adjoint() * K).conjugate();  // = K^T conj(K)
  const double ridge = 1e-14 * std::max(1.0, G.norm());
  G += ridge * MatrixX<S>::Identity(G.rows(), G.cols());
  Eigen::LDLT<MatrixX<S>> ldlt(G);
  return ldlt.solve((X * K.conjugate()).transpose()).transpose();
}

template <class S>
Tensor3<S> assemble_factors(const MatrixX<S>& A, const MatrixX<S>& B,
                            const MatrixX<S>& C) {
  Tensor3<S> T(A.rows(), B.rows(), C.rows());
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < B.rows(); ++j) {
        const S ab = A(i, c) * B(j, c);
        for (Eigen::Index k = 0; k < C.rows(); ++k)
          T(i, j, k) += ab * C(k, c);
      }
  return T;
}

}  // namespace detail

/// Best-of-restarts rank-r CP-ALS fit. Factors are rebalanced each sweep
/// (unit u- and v-columns, scale pushed into w). The per-sweep residual of
/// the winning restart is recorded; it is non-increasing up to rounding.
template <class S>
AlsResult<S> als_fit(const Tensor3<S>& T, int r, int restarts, int iters,
                     std::uint64_t seed, const TolerancePolicy& pol) {
  if (r < 1) throw PreconditionError("als_fit: r must be >= 1");
  const Eigen::Index m = T.dim0(), n = T.dim1(), p = T.dim2();
  const double tnorm = T.norm();
  AlsResult<S> best;
  if (tnorm == 0.0) {
    // Zero tensor: any padding decomposition fits; report residual 0.
    best.residual = 0.0;
    best.best_restart = 0;
    return best;
  }
  const MatrixX<S> X0 = detail::unfold(T, 0);
  const MatrixX<S> X1 = detail::unfold(T, 1);
  const MatrixX<S> X2 = detail::unfold(T, 2);

  Rng rng(seed ^ 0x853c49e6748fea9bULL);
  for (int run = 0; run < std::max(1, restarts); ++run) {
    MatrixX<S> A = rng.matrix<S>(m, r);
    MatrixX<S> B = rng.matrix<S>(n, r);
    MatrixX<S> C = rng.matrix<S>(p, r);
    std::vector<double> hist;
    double res = 1.0;
    for (int it = 0; it < std::min(iters, pol.als_max_iters); ++it) {
      A = detail::solve_factor(X0, detail::khatri_rao(B, C));
      B = detail::solve_factor(X1, detail::khatri_rao(A, C));
      C = detail::solve_factor(X2, detail::khatri_rao(A, B));
      // Rebalance: unit u/v columns, magnitude in w.
      for (Eigen::Index c = 0; c < r; ++c) {
        const double na = A.col(c).norm(), nb = B.col(c).norm();
        if (na > 0) A.col(c) /= na;
        if (nb > 0) B.col(c) /= nb;
        C.col(c) *= S(na * nb);
      }
      res = (T - detail::assemble_factors(A, B, C)).norm() / tnorm;
      hist.push_back(res);
      if (res < 1e-14) break;
      if (hist.size() > 8 &&
          hist[hist.size() - 8] - res < 1e-14 * (1.0 + res))
        break;  // stalled
    }
    if (res < best.residual || best.best_restart < 0) {
      Decomposition<S> D;
      for (Eigen::Index c = 0; c < r; ++c) {
        const bool pad =
            A.col(c).isZero(0) || B.col(c).isZero(0) || C.col(c).isZero(0);
        D.terms.push_back({A.col(c), B.col(c), C.col(c), pad});
      }
      best.decomposition = std::move(D);
      best.residual = res;
      best.history = std::move(hist);
      best.best_restart = run;
    }
    if (best.residual < pol.residual_tol / 10) break;
  }
  return best;
}

/// Aggregated rank lower bound with provenance: the three matricization
/// ranks always apply; the Strassen and Koszul bounds fire on every axis
/// with exactly 3 square slices (after searching the span for an invertible
/// leading slice). Zero when the tensor is zero.
template <class S>
std::pair<int, std::string> rank_lower(const Tensor3<S>& T,
                                       const TolerancePolicy& pol,
                                       std::uint64_t seed = 0) {
  int best = 0;
  std::string method = "zero";
  for (int mode = 0; mode < 3; ++mode) {
    const int r = numeric_rank(detail::unfold(T, mode), pol);
    if (r > best) {
      best = r;
      method = std::string("matricization_") + char('x' + mode);
    }
  }
  for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
    const auto Sl = slices(T, ax);
    if (Sl.size() != 3 || Sl[0].rows() != Sl[0].cols()) continue;
    const Tensor3<S> T3 = from_z_slices(Sl);
    const char axc = ax == Axis::X ? 'x' : (ax == Axis::Y ? 'y' : 'z');
    const BoundReport kb = koszul_bound(T3, pol);
    if (kb.value > best) {
      best = kb.value;
      method = std::string("koszul_") + axc;
    }
    try {
      auto [rot, coeffs] = rotate_to_invertible_first_slice(T3, pol, seed);
      const BoundReport sb = strassen_bound(rot, pol);
      if (sb.value > best) {
        best = sb.value;
        method = std::string("strassen_") + axc;
      }
    } catch (const NoInvertibleCombinationError&) {
      // Non-concise along this axis: the Strassen bound is unavailable.
    }
  }
  return {best, method};
}

/// Certified interval on rank: lower bounds are sound; the upper end is the
/// smallest r whose ALS fit reaches the residual threshold, with a witness.
/// Failure of ALS to reach a residual is evidence, not proof, so the upper
/// end may be absent.
template <class S>
struct RankBracket {
  int lower = 0;
  std::string lower_method;
  bool has_upper = false;
  int upper = 0;
  double upper_residual = 1.0;
  Decomposition<S> witness;
  bool resolved = false;
};

template <class S>
RankBracket<S> rank_bracket(const Tensor3<S>& T, int r_max, int restarts,
                            std::uint64_t seed, const TolerancePolicy& pol) {
  RankBracket<S> out;
  auto [lo, method] = rank_lower(T, pol, seed);
  out.lower = lo;
  out.lower_method = method;
  if (T.norm() == 0.0) {
    out.has_upper = true;
    out.upper = 0;
    out.upper_residual = 0.0;
    out.resolved = true;
    return out;
  }
  for (int r = std::max(1, lo); r <= r_max; ++r) {
    const AlsResult<S> fit = als_fit(T, r, restarts, pol.als_max_iters,
                                     seed + std::uint64_t(r) * 7919, pol);
    if (fit.residual < pol.residual_tol) {
      out.has_upper = true;
      out.upper = r;
      out.upper_residual = fit.residual;
      out.witness = fit.decomposition;
      break;
    }
  }
  out.resolved = out.has_upper && out.upper == out.lower;
  return out;
}

}  // namespace tenrank
