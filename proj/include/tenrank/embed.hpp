#pragma once

#include <vector>

#include "tenrank/matrix_kit.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

/// A tuple of size-N matrices containing the originals as exact top-left
/// blocks, with its commutation/diagonalizability properties evaluated.
template <class S>
struct Embedding {
  std::vector<MatrixX<S>> originals;
  std::vector<MatrixX<S>> extended;
  int N = 0;
  double commute_residual = 0;   ///< max_ij ||[Z'_i, Z'_j]|| / scale
  bool all_diagonalizable = false;
  bool products_zero = false;    ///< all pairwise products exactly zero
};

namespace detail {

template <class S>
void stamp_top_left(Embedding<S>& E) {
  const Eigen::Index n = E.originals[0].rows();
  for (std::size_t k = 0; k < E.extended.size(); ++k)
    E.extended[k].topLeftCorner(n, n) = E.originals[k];
}

template <class S>
void eval_properties(Embedding<S>& E, const TolerancePolicy& pol) {
  double res = 0;
  for (std::size_t i = 0; i < E.extended.size(); ++i)
    for (std::size_t j = i + 1; j < E.extended.size(); ++j) {
      const double sc =
          std::max(1e-300, E.extended[i].norm() * E.extended[j].norm());
      res = std::max(res, commutator(E.extended[i], E.extended[j]).norm() / sc);
    }
  E.commute_residual = res;
  E.all_diagonalizable = true;
  for (const auto& Z : E.extended)
    if (!is_diagonalizable(Z, pol)) {
      E.all_diagonalizable = false;
      break;
    }
}

template <class S>
void check_square_family(const std::vector<MatrixX<S>>& Zs, const char* who) {
  if (Zs.empty()) throw PreconditionError(std::string(who) + ": empty tuple");
  const Eigen::Index n = Zs[0].rows();
  for (const auto& Z : Zs)
    if (Z.rows() != n || Z.cols() != n)
      throw PreconditionError(std::string(who) + ": matrices must be square, same size");
}

}  // namespace detail

/// Always-valid size-2n embedding with blocks [[Z, -Z], [Z, -Z]]: all
/// pairwise products vanish, so the tuple commutes, but each nonzero block
/// is nilpotent of square zero and thus not diagonalizable.
template <class S>
Embedding<S> trivial_embed_2n(const std::vector<MatrixX<S>>& Zs,
                              const TolerancePolicy& pol) {
  detail::check_square_family(Zs, "trivial_embed_2n");
  const Eigen::Index n = Zs[0].rows();
  Embedding<S> E;
  E.originals = Zs;
  E.N = static_cast<int>(2 * n);
  bool all_zero = true;
  for (const auto& Z : Zs) {
    MatrixX<S> Zp(2 * n, 2 * n);
    Zp.topLeftCorner(n, n) = Z;
    Zp.topRightCorner(n, n) = -Z;
    Zp.bottomLeftCorner(n, n) = Z;
    Zp.bottomRightCorner(n, n) = -Z;
    if (!Z.isZero(0)) all_zero = false;
    E.extended.push_back(std::move(Zp));
  }
  E.products_zero = true;
  detail::eval_properties(E, pol);
  E.all_diagonalizable = all_zero;
  return E;
}

/// Strassen's alternative commuting embedding of a pair:
/// [[A2, A3], [A3, A2]] and [[A3, A2], [A2, A3]] commute by block algebra.
template <class S>
Embedding<S> strassen_pair_embed(const MatrixX<S>& A2, const MatrixX<S>& A3,
                                 const TolerancePolicy& pol) {
  detail::check_square_family<S>({A2, A3}, "strassen_pair_embed");
  const Eigen::Index n = A2.rows();
  Embedding<S> E;
  E.originals = {A2, A3};
  E.N = static_cast<int>(2 * n);
  MatrixX<S> Z2(2 * n, 2 * n), Z3(2 * n, 2 * n);
  Z2.topLeftCorner(n, n) = A2;
  Z2.topRightCorner(n, n) = A3;
  Z2.bottomLeftCorner(n, n) = A3;
  Z2.bottomRightCorner(n, n) = A2;
  Z3.topLeftCorner(n, n) = A3;
  Z3.topRightCorner(n, n) = A2;
  Z3.bottomLeftCorner(n, n) = A2;
  Z3.bottomRightCorner(n, n) = A3;
  E.extended = {std::move(Z2), std::move(Z3)};
  detail::eval_properties(E, pol);
  return E;
}

/// Embeds p arbitrary matrices into a commuting tuple of diagonalizable
/// matrices of size r+n, where r is the term count of the supplied
/// decomposition of the tensor with slices As. Construction: append an
/// identity (p+1)-th slice realized by n extra rank-one terms, complete the
/// factor matrices to dual bases of size r+n, and read the slices back as
/// U''^T D_k V''.
template <class S>
Embedding<S> commuting_embed(const std::vector<MatrixX<S>>& As,
                             const Decomposition<S>& D,
                             const TolerancePolicy& pol) {
  detail::check_square_family(As, "commuting_embed");
  const Eigen::Index n = As[0].rows();
  const Eigen::Index p = static_cast<Eigen::Index>(As.size());
  const Eigen::Index r = D.size();
  const MatrixX<S> U = D.factor_u(), V = D.factor_v(), W = D.factor_w();
  if (U.cols() != n || V.cols() != n || W.cols() != p)
    throw PreconditionError("commuting_embed: decomposition shape mismatch");
  for (Eigen::Index k = 0; k < p; ++k) {
    const MatrixX<S> Zk = U.transpose() * W.col(k).asDiagonal() * V;
    if ((Zk - As[k]).norm() >
        100 * pol.residual_tol * std::max(1.0, As[k].norm()))
      throw PreconditionError("commuting_embed: D does not decompose the slices");
  }

  // Extra terms realizing the identity last slice: I_n - U^T V as a sum of
  // n rank-one matrices via its SVD (a_j b_j^T with the plain transpose).
  const MatrixX<S> G = MatrixX<S>::Identity(n, n) - U.transpose() * V;
  Eigen::JacobiSVD<MatrixX<S>> svd(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MatrixX<S> Ue(r + n, n), Ve(r + n, n);
  Ue.topRows(r) = U;
  Ve.topRows(r) = V;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = std::sqrt(svd.singularValues()(j));
    Ue.row(r + j) = s * svd.matrixU().col(j).transpose();
    Ve.row(r + j) = s * svd.matrixV().col(j).adjoint();  // conj(x_j)^T
  }

  auto [Upp, Vpp] = complete_dual_bases<S>(Ue, Ve, pol);

  Embedding<S> E;
  E.originals = As;
  E.N = static_cast<int>(r + n);
  for (Eigen::Index k = 0; k < p; ++k) {
    VectorX<S> d = VectorX<S>::Zero(r + n);
    d.head(r) = W.col(k);
    E.extended.push_back(Upp.transpose() * d.asDiagonal() * Vpp);
  }
  detail::stamp_top_left(E);
  detail::eval_properties(E, pol);
  return E;
}

/// Size-r embedding for a tensor whose first z-slice is the identity, from a
/// decomposition with w_{i1} != 0 for all i (terms are rescaled so that
/// w_{i1} = 1). The first extended slice is I_r.
template <class S>
Embedding<S> first_slice_identity_embed(const Tensor3<S>& T,
                                        const Decomposition<S>& D,
                                        const TolerancePolicy& pol) {
  const Eigen::Index n = T.dim0(), p = T.dim2();
  if (T.dim1() != n)
    throw PreconditionError("first_slice_identity_embed: tensor must be n x n x p");
  if ((T.z_slice(0) - MatrixX<S>::Identity(n, n)).norm() >
      100 * pol.residual_tol * std::sqrt(double(n)))
    throw PreconditionError("first_slice_identity_embed: first slice is not I_n");
  const Eigen::Index r = D.size();

  MatrixX<S> U(r, n), V(r, n), W(r, p);
  double wscale = 0;
  for (const auto& t : D.terms) wscale = std::max(wscale, t.w.norm());
  for (Eigen::Index i = 0; i < r; ++i) {
    const S w1 = D.terms[i].w(0);
    if (std::abs(w1) <= pol.rank_rel_tol * std::max(1.0, wscale))
      throw PreconditionError("first_slice_identity_embed: w_{i1} = 0 at term " +
                              std::to_string(i));
    U.row(i) = (w1 * D.terms[i].u).transpose();
    V.row(i) = D.terms[i].v.transpose();
    W.row(i) = (D.terms[i].w / w1).transpose();
  }

  auto [Up, Vp] = complete_dual_bases<S>(U, V, pol);

  Embedding<S> E;
  E.originals = slices(T, Axis::Z);
  E.N = static_cast<int>(r);
  for (Eigen::Index k = 0; k < p; ++k)
    E.extended.push_back(Up.transpose() *
                         VectorX<S>(W.col(k)).asDiagonal() * Vp);
  E.extended[0] = MatrixX<S>::Identity(r, r);  // U'^T D_1 V' = U'^T V' = I_r
  detail::stamp_top_left(E);
  detail::eval_properties(E, pol);
  return E;
}

/// Turns a commuting diagonalizable embedding into an upper bound
/// rank(T) <= N with witness: joint-diagonalize the extended tuple, read off
/// an N-term decomposition of the supertensor, truncate to the original
/// coordinates.
template <class S>
std::pair<int, Decomposition<S>> embedding_to_rank_bound(
    const Embedding<S>& E, const TolerancePolicy& pol, std::uint64_t seed = 0) {
  if (E.extended.empty())
    throw PreconditionError("embedding_to_rank_bound: empty embedding");
  const Eigen::Index n = E.originals[0].rows();
  const Eigen::Index p = static_cast<Eigen::Index>(E.extended.size());
  const Eigen::Index N = E.extended[0].rows();

  const JointDiagonalization<S> jd =
      joint_diagonalize_similarity(E.extended, pol, seed);
  const MatrixX<S> Qinv = jd.Q.inverse();

  Decomposition<S> D;
  for (Eigen::Index i = 0; i < N; ++i) {
    VectorX<S> u = Qinv.col(i).head(n);
    VectorX<S> v = jd.Q.row(i).transpose().head(n);
    VectorX<S> w(p);
    for (Eigen::Index k = 0; k < p; ++k) w(k) = jd.diags[k](i);
    const bool pad = u.isZero(0) || v.isZero(0) || w.isZero(0);
    D.terms.push_back({std::move(u), std::move(v), std::move(w), pad});
  }

  double tnorm = 0, rnorm = 0;
  const Tensor3<S> R = assemble(D, n, n, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    tnorm += E.originals[k].squaredNorm();
    rnorm += (R.z_slice(k) - E.originals[k]).squaredNorm();
  }
  const double res = std::sqrt(rnorm) / std::max(1e-300, std::sqrt(tnorm));
  if (res > 1e-6)
    throw ResidualError("embedding_to_rank_bound: truncated decomposition residual too large",
                        res);
  return {static_cast<int>(N), std::move(D)};
}

}  // namespace tenrank
