#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "tenrank/errors.hpp"
#include "tenrank/scalar.hpp"
#include "tenrank/tolerance.hpp"

namespace tenrank {

/// Count of singular values above rank_rel_tol * max(dim) * sigma_max.
template <class S>
int numeric_rank(const MatrixX<S>& M, const TolerancePolicy& pol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixX<S>> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = pol.rank_rel_tol * std::max(M.rows(), M.cols()) * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

template <class S>
double smallest_singular_value(const MatrixX<S>& M) {
  Eigen::JacobiSVD<MatrixX<S>> svd(M);
  const auto& sv = svd.singularValues();
  return sv.size() ? sv(sv.size() - 1) : 0.0;
}

template <class S>
bool is_invertible(const MatrixX<S>& M, const TolerancePolicy& pol) {
  return M.rows() == M.cols() &&
         numeric_rank(M, pol) == static_cast<int>(M.rows());
}

template <class S>
MatrixX<S> commutator(const MatrixX<S>& A, const MatrixX<S>& B) {
  return A * B - B * A;
}

/// A2 A1^{-1} A3 - A3 A1^{-1} A2. Throws SingularMatrixError when A1 is
/// singular relative to pol.
template <class S>
MatrixX<S> generalized_commutator(const MatrixX<S>& A1, const MatrixX<S>& A2,
                                  const MatrixX<S>& A3,
                                  const TolerancePolicy& pol) {
  if (!is_invertible(A1, pol))
    throw SingularMatrixError("generalized_commutator: A1 is singular",
                              smallest_singular_value(A1));
  Eigen::PartialPivLU<MatrixX<S>> lu(A1);
  const MatrixX<S> B = lu.solve(A3);  // A1^{-1} A3
  const MatrixX<S> C = lu.solve(A2);  // A1^{-1} A2
  return A2 * B - A3 * C;
}

namespace detail {

inline MatrixX<Complex> complexify(const MatrixX<double>& M) {
  return M.cast<Complex>();
}
inline const MatrixX<Complex>& complexify(const MatrixX<Complex>& M) {
  return M;
}

/// Greedy clustering of complex values with the given absolute radius.
/// Returns cluster index per value.
inline std::vector<int> cluster_values(const VectorX<Complex>& vals,
                                       double radius,
                                       std::vector<Complex>* centers = nullptr) {
  std::vector<int> label(vals.size(), -1);
  std::vector<Complex> ctr;
  std::vector<int> count;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    int best = -1;
    double bestd = radius;
    for (std::size_t c = 0; c < ctr.size(); ++c) {
      const double d = std::abs(vals(i) - ctr[c]);
      if (d <= bestd) {
        bestd = d;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) {
      ctr.push_back(vals(i));
      count.push_back(1);
      label[i] = static_cast<int>(ctr.size()) - 1;
    } else {
      label[i] = best;
      ctr[best] = (ctr[best] * double(count[best]) + vals(i)) /
                  double(count[best] + 1);
      ++count[best];
    }
  }
  if (centers) *centers = ctr;
  return label;
}

}  // namespace detail

/// Clustered-annihilator diagonalizability test. Eigenvalues are clustered
/// with eig_cluster_tol; the matrix is diagonalizable iff the product of
/// (M - lambda_c I) over distinct clusters annihilates (numeric rank 0 at
/// the spectral scale). Over the reals every eigenvalue must additionally
/// sit within real_axis_tol of the real axis.
template <class S>
bool is_diagonalizable(const MatrixX<S>& M, const TolerancePolicy& pol) {
  const Eigen::Index n = M.rows();
  if (n != M.cols())
    throw PreconditionError("is_diagonalizable: matrix must be square");
  if (n == 0) return true;
  const MatrixX<Complex> Mc = detail::complexify(M);
  Eigen::ComplexEigenSolver<MatrixX<Complex>> es(Mc, /*computeEigenvectors=*/false);
  const VectorX<Complex> ev = es.eigenvalues();
  double scale = 0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(ev(i)));
  if (scale == 0.0) scale = std::max(1e-300, Mc.norm());
  if constexpr (!scalar_traits<S>::is_complex) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(ev(i).imag()) > pol.real_axis_tol * scale) return false;
  }
  std::vector<Complex> centers;
  detail::cluster_values(ev, pol.eig_cluster_tol * scale, &centers);
  MatrixX<Complex> prod = MatrixX<Complex>::Identity(n, n);
  const MatrixX<Complex> Mn = Mc / scale;
  for (const Complex& c : centers) prod = prod * (Mn - (c / scale) * MatrixX<Complex>::Identity(n, n));
  // Annihilator residual of the normalized matrix; absolute threshold.
  return prod.norm() <= 10.0 * n * pol.eig_cluster_tol;
}

/// Result of a joint similarity diagonalization: M_i = Q^{-1} D_i Q.
template <class S>
struct JointDiagonalization {
  MatrixX<S> Q;
  std::vector<VectorX<S>> diags;
  double residual = 0;  ///< max relative off-diagonal norm over the family
};

namespace detail {

/// Eigen-decomposition adapter: over the reals it rejects complex spectra
/// (NotDiagonalizable over R) and turns conjugate pairs within the real-axis
/// tolerance into real invariant-subspace bases.
template <class S>
struct SpectralKit;

template <>
struct SpectralKit<double> {
  static void decompose(const MatrixX<double>& M, const TolerancePolicy& pol,
                        VectorX<Complex>& vals, MatrixX<double>& vecs) {
    Eigen::EigenSolver<MatrixX<double>> es(M);
    vals = es.eigenvalues();
    double scale = vals.size() ? vals.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0) scale = 1.0;
    for (Eigen::Index i = 0; i < vals.size(); ++i)
      if (std::abs(vals(i).imag()) > pol.real_axis_tol * scale)
        throw NotDiagonalizableError(
            "joint diagonalization: eigenvalue off the real axis", -1);
    const MatrixX<Complex> V = es.eigenvectors();
    vecs.resize(M.rows(), M.cols());
    Eigen::Index i = 0;
    while (i < vals.size()) {
      // Conjugate pairs within tolerance: take Re/Im parts as a real basis.
      if (vals(i).imag() != 0.0 && i + 1 < vals.size() &&
          std::abs(vals(i) - std::conj(vals(i + 1))) <
              1e-12 * std::max(1.0, scale)) {
        vecs.col(i) = V.col(i).real();
        vecs.col(i + 1) = V.col(i).imag();
        vals(i) = vals(i).real();
        vals(i + 1) = vals(i + 1).real();
        i += 2;
      } else {
        vecs.col(i) = V.col(i).real();
        vals(i) = vals(i).real();
        ++i;
      }
    }
  }
};

template <>
struct SpectralKit<Complex> {
  static void decompose(const MatrixX<Complex>& M, const TolerancePolicy&,
                        VectorX<Complex>& vals, MatrixX<Complex>& vecs) {
    Eigen::ComplexEigenSolver<MatrixX<Complex>> es(M);
    vals = es.eigenvalues();
    vecs = es.eigenvectors();
  }
};

/// Recursively builds an eigenvector basis diagonalizing the whole family.
/// basis: n x k, columns span an invariant subspace; Ms are the full
/// matrices. Returns an n x k refinement of basis.
template <class S>
MatrixX<S> joint_eigenbasis(const std::vector<MatrixX<S>>& Ms,
                            const MatrixX<S>& basis,
                            const TolerancePolicy& pol, Rng& rng, int depth) {
  const Eigen::Index k = basis.cols();
  if (k <= 1) return basis;
  if (depth > 8)
    throw NotDiagonalizableError(
        "joint diagonalization: blockwise refinement did not converge", -1);

  // Compress the family onto the subspace.
  Eigen::ColPivHouseholderQR<MatrixX<S>> qr(basis);
  std::vector<MatrixX<S>> Bs;
  Bs.reserve(Ms.size());
  for (const auto& M : Ms) Bs.push_back(qr.solve(M * basis));

  // Scalar block: any basis diagonalizes it.
  bool all_scalar = true;
  for (const auto& B : Bs) {
    const S mu = B.trace() / S(double(k));
    if ((B - mu * MatrixX<S>::Identity(k, k)).norm() >
        100.0 * pol.eig_cluster_tol * std::max(1.0, B.norm()))
      all_scalar = false;
  }
  if (all_scalar) return basis;

  // Random combination; generically separates distinct joint eigenvalues.
  MatrixX<S> C = MatrixX<S>::Zero(k, k);
  for (const auto& B : Bs) {
    const double nb = B.norm();
    C += rng.real() * (nb > 0 ? (B / nb).eval() : B);
  }
  VectorX<Complex> vals;
  MatrixX<S> vecs;
  SpectralKit<S>::decompose(C, pol, vals, vecs);

  double scale = vals.cwiseAbs().maxCoeff();
  if (scale == 0.0) scale = 1.0;
  std::vector<Complex> centers;
  const std::vector<int> label =
      cluster_values(vals, pol.eig_cluster_tol * scale * 10, &centers);
  if (centers.size() == 1) {
    // No separation this round; retry with a fresh combination.
    return joint_eigenbasis(Ms, basis, pol, rng, depth + 1);
  }

  MatrixX<S> refined(basis.rows(), k);
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < k; ++i)
      if (label[i] == static_cast<int>(c)) idx.push_back(i);
    MatrixX<S> sub(k, idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) sub.col(t) = vecs.col(idx[t]);
    MatrixX<S> cols = basis * sub;
    if (idx.size() > 1)
      cols = joint_eigenbasis(Ms, cols, pol, rng, depth + 1);
    refined.middleCols(at, cols.cols()) = cols;
    at += cols.cols();
  }
  return refined;
}

}  // namespace detail

/// Simultaneous diagonalization by similarity: on success M_i = Q^{-1} D_i Q.
/// Requires the family to pairwise commute and each member to be
/// diagonalizable over the scalar field; strategy is eigendecomposition of a
/// random combination with blockwise refinement on repeated eigenvalues.
template <class S>
JointDiagonalization<S> joint_diagonalize_similarity(
    const std::vector<MatrixX<S>>& Ms, const TolerancePolicy& pol,
    std::uint64_t seed = 0) {
  if (Ms.empty())
    throw PreconditionError("joint_diagonalize_similarity: empty family");
  const Eigen::Index n = Ms[0].rows();
  for (const auto& M : Ms)
    if (M.rows() != n || M.cols() != n)
      throw PreconditionError("joint_diagonalize_similarity: size mismatch");

  double max_comm = 0;
  for (std::size_t i = 0; i < Ms.size(); ++i)
    for (std::size_t j = i + 1; j < Ms.size(); ++j) {
      const double s = std::max(1e-300, Ms[i].norm() * Ms[j].norm());
      max_comm = std::max(max_comm, commutator(Ms[i], Ms[j]).norm() / s);
    }
  if (max_comm > 100.0 * pol.residual_tol)
    throw NotCommutingError("joint_diagonalize_similarity: family does not commute",
                            max_comm);
  for (std::size_t i = 0; i < Ms.size(); ++i)
    if (!is_diagonalizable(Ms[i], pol))
      throw NotDiagonalizableError(
          "joint_diagonalize_similarity: member not diagonalizable",
          static_cast<int>(i));

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int retries = 3;
  double best_res = std::numeric_limits<double>::infinity();
  JointDiagonalization<S> best;
  for (int attempt = 0; attempt < retries; ++attempt) {
    MatrixX<S> basis;
    try {
      const MatrixX<S> id = MatrixX<S>::Identity(n, n);
      basis = detail::joint_eigenbasis(Ms, id, pol, rng, 0);
    } catch (const NotDiagonalizableError&) {
      if (attempt + 1 == retries) throw;
      continue;
    }
    Eigen::PartialPivLU<MatrixX<S>> lu(basis);
    JointDiagonalization<S> jd;
    jd.Q = lu.inverse();  // M = basis D basis^{-1}  =>  Q = basis^{-1}
    jd.diags.reserve(Ms.size());
    double res = 0;
    for (const auto& M : Ms) {
      const MatrixX<S> D = jd.Q * M * basis;
      VectorX<S> d = D.diagonal();
      MatrixX<S> off = D;
      off.diagonal().setZero();
      res = std::max(res, off.norm() / std::max(1e-300, M.norm()));
      jd.diags.push_back(std::move(d));
    }
    jd.residual = res;
    if (res < best_res) {
      best_res = res;
      best = std::move(jd);
    }
    if (best_res <= pol.residual_tol) break;
  }
  if (best_res > 100.0 * pol.residual_tol)
    throw NotDiagonalizableError(
        "joint_diagonalize_similarity: refinement residual too large", -1);
  return best;
}

/// A_i = P D_i Q with P, Q invertible.
template <class S>
struct SimDiagEquivalence {
  MatrixX<S> P, Q;
  std::vector<VectorX<S>> diags;
  double residual = 0;
};

/// Simultaneous diagonalization by equivalence, given an invertible matrix A
/// in (or attached to) the span: diagonalize the family A^{-1} A_i by
/// similarity, then P = A Q^{-1}.
template <class S>
SimDiagEquivalence<S> simdiag_equivalence(const std::vector<MatrixX<S>>& As,
                                          const MatrixX<S>& A,
                                          const TolerancePolicy& pol,
                                          std::uint64_t seed = 0) {
  if (!is_invertible(A, pol))
    throw SingularMatrixError("simdiag_equivalence: A is singular",
                              smallest_singular_value(A));
  Eigen::PartialPivLU<MatrixX<S>> lu(A);
  std::vector<MatrixX<S>> Ms;
  Ms.reserve(As.size());
  for (const auto& Ai : As) Ms.push_back(lu.solve(Ai));
  const JointDiagonalization<S> jd = joint_diagonalize_similarity(Ms, pol, seed);
  SimDiagEquivalence<S> out;
  out.Q = jd.Q;
  out.P = A * jd.Q.inverse();
  out.diags = jd.diags;
  double res = 0;
  for (std::size_t i = 0; i < As.size(); ++i) {
    const MatrixX<S> R =
        As[i] - out.P * out.diags[i].asDiagonal().toDenseMatrix() * out.Q;
    res = std::max(res, R.norm() / std::max(1e-300, As[i].norm()));
  }
  out.residual = res;
  return out;
}

namespace detail {

/// Takagi factorization B = W Sigma W^T of a complex symmetric matrix,
/// computed by SVD-based deflation. Returns L = W Sigma^{1/2} so that
/// B = L L^T.
inline MatrixX<Complex> symmetric_sqrt_factor(MatrixX<Complex> B) {
  const Eigen::Index r = B.rows();
  VectorX<double> sigma = VectorX<double>::Zero(r);
  MatrixX<Complex> accum = MatrixX<Complex>::Identity(r, r);
  Eigen::Index off = 0;
  while (off < r) {
    const Eigen::Index k = r - off;
    Eigen::JacobiSVD<MatrixX<Complex>> svd(
        B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double s1 = svd.singularValues()(0);
    if (s1 <= 1e-300) break;  // remaining block is zero
    const VectorX<Complex> u1 = svd.matrixU().col(0);
    const VectorX<Complex> v1 = svd.matrixV().col(0);
    // Takagi vector: B conj(w) = s1 w. Either u1 + conj(v1) or i(u1 - conj(v1))
    // is nonzero and works.
    VectorX<Complex> w = u1 + v1.conjugate();
    if (w.norm() < 0.5) w = Complex(0, 1) * (u1 - v1.conjugate());
    w /= w.norm();
    // Unitary completion of w via Householder-style QR.
    MatrixX<Complex> Wfull(k, k);
    Wfull.col(0) = w;
    Eigen::HouseholderQR<MatrixX<Complex>> qr(w);
    MatrixX<Complex> Qh = qr.householderQ();
    // First column of Qh is w up to phase; replace the basis by Qh with
    // column 0 rotated onto w exactly.
    const Complex phase = Qh.col(0).dot(w);  // conj-dot: w = phase * Qh.col(0)
    Qh.col(0) *= phase;
    Wfull = Qh;
    // Deflate: C = Wfull^H B conj(Wfull) is symmetric with (s1, 0...) first
    // row/column.
    const MatrixX<Complex> C = Wfull.adjoint() * B * Wfull.conjugate();
    sigma(off) = s1;
    // Right-multiply accum by diag(I_off, Wfull).
    accum.middleCols(off, k) = (accum.middleCols(off, k) * Wfull).eval();
    if (k == 1) break;
    B = C.bottomRightCorner(k - 1, k - 1);
    // Re-symmetrize against rounding drift.
    B = ((B + B.transpose()) / 2.0).eval();
    ++off;
  }
  MatrixX<Complex> L = accum;
  for (Eigen::Index j = 0; j < r; ++j) L.col(j) *= std::sqrt(sigma(j));
  return L;
}

}  // namespace detail

/// Extends a family u_1..u_r in K^n to pairwise orthogonal vectors of
/// K^{n+r} (bilinear form u^T v, no conjugation) whose first n coordinates
/// are the u_i exactly. Over R the outputs are nonzero; over C they satisfy
/// <v_i, v_i> = 1.
template <class S>
std::vector<VectorX<S>> orthogonal_extension(const std::vector<VectorX<S>>& us) {
  const Eigen::Index r = static_cast<Eigen::Index>(us.size());
  if (r == 0) return {};
  const Eigen::Index n = us[0].size();
  for (const auto& u : us)
    if (u.size() != n)
      throw PreconditionError("orthogonal_extension: length mismatch");

  MatrixX<S> A(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      A(i, j) = -(us[i].transpose() * us[j]).value();

  MatrixX<S> L(r, r);
  if constexpr (scalar_traits<S>::is_complex) {
    L = detail::symmetric_sqrt_factor(A + MatrixX<Complex>::Identity(r, r));
  } else {
    // lambda = max(0, -lambda_min(A)) + 1 makes B strictly positive definite.
    Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(A);
    const double lambda = std::max(0.0, -es.eigenvalues()(0)) + 1.0;
    const MatrixX<double> B = A + lambda * MatrixX<double>::Identity(r, r);
    Eigen::LLT<MatrixX<double>> llt(B);
    if (llt.info() != Eigen::Success)
      throw Error("orthogonal_extension: Cholesky failed unexpectedly");
    L = llt.matrixL();
  }

  std::vector<VectorX<S>> out;
  out.reserve(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    VectorX<S> v(n + r);
    v.head(n) = us[i];
    v.tail(r) = L.row(i).transpose();
    out.push_back(std::move(v));
  }
  return out;
}

/// Given U, V (r x n) with U^T V = I_n, appends r-n columns to each so that
/// U'^T V' = I_r. The appended V-columns span ker(U^T); U' completes to the
/// inverse transpose. First n columns are preserved exactly.
template <class S>
std::pair<MatrixX<S>, MatrixX<S>> complete_dual_bases(const MatrixX<S>& U,
                                                      const MatrixX<S>& V,
                                                      const TolerancePolicy& pol) {
  const Eigen::Index r = U.rows(), n = U.cols();
  if (V.rows() != r || V.cols() != n)
    throw PreconditionError("complete_dual_bases: U/V shape mismatch");
  const double pre = (U.transpose() * V - MatrixX<S>::Identity(n, n)).norm();
  if (pre > 1e-6 * std::max(1.0, U.norm() * V.norm()))
    throw PreconditionError("complete_dual_bases: U^T V != I_n, residual " +
                            std::to_string(pre));
  if (r == n) return {U, V};

  // Basis of ker(U^T) from the SVD of U^T (n x r, rank n).
  Eigen::JacobiSVD<MatrixX<S>> svd(U.transpose(), Eigen::ComputeFullV);
  const MatrixX<S> kernel = svd.matrixV().rightCols(r - n);

  MatrixX<S> Vp(r, r);
  Vp.leftCols(n) = V;
  Vp.rightCols(r - n) = kernel;
  if (!is_invertible(Vp, pol))
    throw Error("complete_dual_bases: completed V is singular");
  const MatrixX<S> Minv = Vp.inverse();  // rows satisfy row_i * Vp = e_i^T

  MatrixX<S> Up(r, r);
  Up.leftCols(n) = U;  // exact copy; Minv's top rows agree within tolerance
  Up.rightCols(r - n) = Minv.bottomRows(r - n).transpose();
  return {Up, Vp};
}

/// Searches the span of a matrix family for a well-conditioned invertible
/// combination using seeded random real coefficients. Returns the
/// coefficients of the best combination found.
template <class S>
VectorX<double> invertible_span_member(const std::vector<MatrixX<S>>& Ms,
                                       const TolerancePolicy& pol,
                                       std::uint64_t seed, int trials = 64) {
  if (Ms.empty())
    throw PreconditionError("invertible_span_member: empty family");
  const Eigen::Index n = Ms[0].rows();
  if (n != Ms[0].cols())
    throw PreconditionError("invertible_span_member: matrices must be square");
  Rng rng(seed ^ 0x51ed270b8705c2aaULL);
  double best_sv = -1;
  VectorX<double> best;
  for (int t = 0; t < trials; ++t) {
    VectorX<double> c(Ms.size());
    if (t < static_cast<int>(Ms.size())) {
      c.setZero();
      c(t) = 1.0;  // try the slices themselves first
    } else {
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.real();
    }
    MatrixX<S> M = MatrixX<S>::Zero(n, n);
    for (std::size_t i = 0; i < Ms.size(); ++i) M += S(c(i)) * Ms[i];
    const double norm = M.norm();
    if (norm == 0.0) continue;
    const double sv = smallest_singular_value(M) / norm;
    if (sv > best_sv) {
      best_sv = sv;
      best = c;
    }
    if (is_invertible(M, pol) && sv > 1e-8) return c;
  }
  // Fall back to the best combination if it still passes the rank test.
  if (best_sv > 0) {
    MatrixX<S> M = MatrixX<S>::Zero(n, n);
    for (std::size_t i = 0; i < Ms.size(); ++i) M += S(best(i)) * Ms[i];
    if (is_invertible(M, pol)) return best;
  }
  throw NoInvertibleCombinationError(
      "invertible_span_member: no invertible combination found",
      std::max(0.0, best_sv));
}

template <class S>
MatrixX<S> span_combination(const std::vector<MatrixX<S>>& Ms,
                            const VectorX<double>& coeffs) {
  MatrixX<S> M = MatrixX<S>::Zero(Ms[0].rows(), Ms[0].cols());
  for (std::size_t i = 0; i < Ms.size(); ++i) M += S(coeffs(i)) * Ms[i];
  return M;
}

}  // namespace tenrank
