#pragma once

#include <map>
#include <string>

#include "tenrank/matrix_kit.hpp"
#include "tenrank/tensor.hpp"

namespace tenrank {

enum class BoundMethod { Strassen, Koszul, EmbeddingPair };

inline const char* bound_method_name(BoundMethod m) {
  switch (m) {
    case BoundMethod::Strassen: return "strassen";
    case BoundMethod::Koszul: return "koszul";
    case BoundMethod::EmbeddingPair: return "embedding_pair";
  }
  return "?";
}

/// A certified integer lower bound on tensor rank.
struct BoundReport {
  int value = 0;
  BoundMethod method = BoundMethod::Strassen;
  bool applies_to_border_rank = false;
  std::map<std::string, double> diagnostics;
};

namespace detail {
template <class S>
void require_nn3(const Tensor3<S>& T, const char* who) {
  if (T.dim0() != T.dim1() || T.dim2() != 3)
    throw PreconditionError(std::string(who) + ": tensor must be n x n x 3");
}
}  // namespace detail

/// rank(T) >= n + ceil(rank(A2 A1^{-1} A3 - A3 A1^{-1} A2) / 2) for an
/// n x n x 3 tensor with invertible first z-slice. The commutator rank is
/// even in exact arithmetic; rounding up is safe since rank is an integer.
/// Also a lower bound on border rank.
template <class S>
BoundReport strassen_bound(const Tensor3<S>& T, const TolerancePolicy& pol) {
  detail::require_nn3(T, "strassen_bound");
  const int n = static_cast<int>(T.dim0());
  const MatrixX<S> A1 = T.z_slice(0), A2 = T.z_slice(1), A3 = T.z_slice(2);
  const MatrixX<S> G = generalized_commutator(A1, A2, A3, pol);
  const int crank = numeric_rank(G, pol);
  BoundReport rep;
  rep.method = BoundMethod::Strassen;
  rep.value = n + (crank + 1) / 2;
  rep.applies_to_border_rank = true;
  rep.diagnostics["commutator_rank"] = crank;
  const double smin = smallest_singular_value(A1);
  const double smax = A1.norm();
  rep.diagnostics["a1_condition"] = smin > 0 ? smax / smin : 0.0;
  return rep;
}

/// Applies an invertible change of basis along the z-axis whose first row is
/// coeffs, so that the first slice becomes sum_k coeffs_k A_k. The tensor
/// rank is unchanged. Requires p = 3 and a completion of coeffs to an
/// invertible 3 x 3 matrix (the two standard-basis rows away from the
/// largest coefficient).
template <class S>
Tensor3<S> slice_rotation(const Tensor3<S>& T, const Eigen::Vector3d& coeffs) {
  if (T.dim2() != 3)
    throw PreconditionError("slice_rotation: tensor must have 3 z-slices");
  int pivot = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(coeffs(k)) > std::abs(coeffs(pivot))) pivot = k;
  if (coeffs(pivot) == 0.0)
    throw PreconditionError("slice_rotation: zero coefficient vector");
  Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
  R.row(0) = coeffs.transpose();
  int at = 1;
  for (int k = 0; k < 3; ++k)
    if (k != pivot) R(at++, k) = 1.0;
  const auto Zs = slices(T, Axis::Z);
  std::vector<MatrixX<S>> out;
  out.reserve(3);
  for (int k = 0; k < 3; ++k) {
    MatrixX<S> M = MatrixX<S>::Zero(T.dim0(), T.dim1());
    for (int l = 0; l < 3; ++l) M += S(R(k, l)) * Zs[l];
    out.push_back(std::move(M));
  }
  return from_z_slices(out);
}

/// Searches random coefficient vectors for a rotation making the first slice
/// invertible. Throws NoInvertibleCombinationError after `trials` failures.
template <class S>
std::pair<Tensor3<S>, Eigen::Vector3d> rotate_to_invertible_first_slice(
    const Tensor3<S>& T, const TolerancePolicy& pol, std::uint64_t seed,
    int trials = 64) {
  detail::require_nn3(T, "rotate_to_invertible_first_slice");
  const auto Zs = slices(T, Axis::Z);
  const VectorX<double> c = invertible_span_member(Zs, pol, seed, trials);
  const Eigen::Vector3d coeffs(c(0), c(1), c(2));
  return {slice_rotation(T, coeffs), coeffs};
}

/// The 3n x 3n Koszul flattening
///   L(T) = [ 0   A2  -A3 ]
///          [ A3  A1   0  ]
///          [ A2  0    A1 ],
/// linear in T.
template <class S>
MatrixX<S> koszul_flattening(const Tensor3<S>& T) {
  detail::require_nn3(T, "koszul_flattening");
  const Eigen::Index n = T.dim0();
  const MatrixX<S> A1 = T.z_slice(0), A2 = T.z_slice(1), A3 = T.z_slice(2);
  MatrixX<S> L = MatrixX<S>::Zero(3 * n, 3 * n);
  L.block(0, n, n, n) = A2;
  L.block(0, 2 * n, n, n) = -A3;
  L.block(n, 0, n, n) = A3;
  L.block(n, n, n, n) = A1;
  L.block(2 * n, 0, n, n) = A2;
  L.block(2 * n, 2 * n, n, n) = A1;
  return L;
}

/// rank(T) >= ceil(rank(L(T)) / 2); also bounds border rank.
template <class S>
BoundReport koszul_bound(const Tensor3<S>& T, const TolerancePolicy& pol) {
  const int lrank = numeric_rank(koszul_flattening(T), pol);
  BoundReport rep;
  rep.method = BoundMethod::Koszul;
  rep.value = (lrank + 1) / 2;
  rep.applies_to_border_rank = true;
  rep.diagnostics["flattening_rank"] = lrank;
  return rep;
}

/// Relative defect of det L(T) = det(A1)^2 det(A2 A1^{-1} A3 - A3 A1^{-1} A2),
/// with a floor of 1 in the denominator. A numerical self-test.
template <class S>
double det_identity_residual(const Tensor3<S>& T, const TolerancePolicy& pol) {
  detail::require_nn3(T, "det_identity_residual");
  const MatrixX<S> A1 = T.z_slice(0), A2 = T.z_slice(1), A3 = T.z_slice(2);
  const MatrixX<S> G = generalized_commutator(A1, A2, A3, pol);
  const S lhs = koszul_flattening(T).determinant();
  const S d1 = A1.determinant();
  const S rhs = d1 * d1 * G.determinant();
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

/// Lemma-level necessary condition for commuting embeddings of a pair:
/// size N is admissible only if N >= n + rank([A2, A3]) / 2.
template <class S>
bool embedding_pair_bound(const MatrixX<S>& A2, const MatrixX<S>& A3, int N,
                          const TolerancePolicy& pol) {
  if (A2.rows() != A2.cols() || A3.rows() != A2.rows() || A3.cols() != A2.cols())
    throw PreconditionError("embedding_pair_bound: need two equal-size square matrices");
  const int n = static_cast<int>(A2.rows());
  const int crank = numeric_rank(commutator(A2, A3), pol);
  return 2 * N >= 2 * n + crank;
}

}  // namespace tenrank
