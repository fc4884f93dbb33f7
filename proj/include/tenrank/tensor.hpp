#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "tenrank/errors.hpp"
#include "tenrank/scalar.hpp"

namespace tenrank {

enum class Axis { X, Y, Z };

/// Dense order-3 tensor of shape (m, n, p), entries indexed (i, j, k).
/// Storage is row-major with k fastest, matching the JSON nesting.
template <class S>
class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(Eigen::Index m, Eigen::Index n, Eigen::Index p, bool symmetric = false)
      : m_(m), n_(n), p_(p), symmetric_(symmetric), data_(m * n * p, S(0)) {
    if (m <= 0 || n <= 0 || p <= 0)
      throw PreconditionError("Tensor3: shape entries must be positive");
    if (symmetric_ && !(m == n && n == p))
      throw PreconditionError("Tensor3: symmetric tensor must be cubic");
  }

  Eigen::Index dim0() const { return m_; }
  Eigen::Index dim1() const { return n_; }
  Eigen::Index dim2() const { return p_; }
  bool symmetric() const { return symmetric_; }

  S& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return data_[(i * n_ + j) * p_ + k];
  }
  const S& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return data_[(i * n_ + j) * p_ + k];
  }

  const std::vector<S>& data() const { return data_; }
  std::vector<S>& data() { return data_; }

  /// Exact symmetry under all 6 index permutations; no tolerance.
  bool is_symmetric_exact() const {
    if (!(m_ == n_ && n_ == p_)) return false;
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j)
        for (Eigen::Index k = 0; k < p_; ++k) {
          const S t = (*this)(i, j, k);
          if (t != (*this)(i, k, j) || t != (*this)(j, i, k) ||
              t != (*this)(j, k, i) || t != (*this)(k, i, j) ||
              t != (*this)(k, j, i))
            return false;
        }
    return true;
  }

  /// Flags the tensor symmetric after verifying exact symmetry.
  void mark_symmetric() {
    if (!is_symmetric_exact())
      throw PreconditionError("Tensor3: entries are not exactly symmetric");
    symmetric_ = true;
  }

  /// Replaces every entry by the average over the 6 index permutations and
  /// flags the result symmetric. For tensors built from float arithmetic.
  void symmetrize_by_averaging() {
    if (!(m_ == n_ && n_ == p_))
      throw PreconditionError("Tensor3: symmetrize requires a cubic shape");
    Tensor3<S> out(m_, n_, p_);
    // One average per index orbit, written to all 6 positions, so the
    // result is exactly symmetric.
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index j = i; j < n_; ++j)
        for (Eigen::Index k = j; k < p_; ++k) {
          const S avg = ((*this)(i, j, k) + (*this)(i, k, j) +
                         (*this)(j, i, k) + (*this)(j, k, i) +
                         (*this)(k, i, j) + (*this)(k, j, i)) /
                        S(6);
          out(i, j, k) = avg;
          out(i, k, j) = avg;
          out(j, i, k) = avg;
          out(j, k, i) = avg;
          out(k, i, j) = avg;
          out(k, j, i) = avg;
        }
    data_ = std::move(out.data_);
    symmetric_ = true;
  }

  double norm() const {
    double s = 0;
    for (const S& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  Tensor3 operator+(const Tensor3& o) const { return combined(o, S(1)); }
  Tensor3 operator-(const Tensor3& o) const { return combined(o, S(-1)); }
  Tensor3 operator*(S a) const {
    Tensor3 r = *this;
    r.symmetric_ = symmetric_;
    for (S& v : r.data_) v *= a;
    return r;
  }

  MatrixX<S> z_slice(Eigen::Index k) const {
    MatrixX<S> Z(m_, n_);
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j) Z(i, j) = (*this)(i, j, k);
    return Z;
  }
  MatrixX<S> x_slice(Eigen::Index i) const {
    MatrixX<S> Z(n_, p_);
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index k = 0; k < p_; ++k) Z(j, k) = (*this)(i, j, k);
    return Z;
  }
  MatrixX<S> y_slice(Eigen::Index j) const {
    MatrixX<S> Z(m_, p_);
    for (Eigen::Index i = 0; i < m_; ++i)
      for (Eigen::Index k = 0; k < p_; ++k) Z(i, k) = (*this)(i, j, k);
    return Z;
  }

 private:
  Tensor3 combined(const Tensor3& o, S sign) const {
    if (m_ != o.m_ || n_ != o.n_ || p_ != o.p_)
      throw PreconditionError("Tensor3: shape mismatch");
    Tensor3 r = *this;
    r.symmetric_ = symmetric_ && o.symmetric_;
    for (std::size_t t = 0; t < data_.size(); ++t) r.data_[t] += sign * o.data_[t];
    return r;
  }

  Eigen::Index m_ = 0, n_ = 0, p_ = 0;
  bool symmetric_ = false;
  std::vector<S> data_;
};

template <class S>
std::vector<MatrixX<S>> slices(const Tensor3<S>& T, Axis axis) {
  std::vector<MatrixX<S>> out;
  switch (axis) {
    case Axis::X:
      out.reserve(T.dim0());
      for (Eigen::Index i = 0; i < T.dim0(); ++i) out.push_back(T.x_slice(i));
      break;
    case Axis::Y:
      out.reserve(T.dim1());
      for (Eigen::Index j = 0; j < T.dim1(); ++j) out.push_back(T.y_slice(j));
      break;
    case Axis::Z:
      out.reserve(T.dim2());
      for (Eigen::Index k = 0; k < T.dim2(); ++k) out.push_back(T.z_slice(k));
      break;
  }
  return out;
}

/// Rebuilds a tensor from its z-slices.
template <class S>
Tensor3<S> from_z_slices(const std::vector<MatrixX<S>>& Zs) {
  if (Zs.empty()) throw PreconditionError("from_z_slices: no slices");
  Tensor3<S> T(Zs[0].rows(), Zs[0].cols(), static_cast<Eigen::Index>(Zs.size()));
  for (std::size_t k = 0; k < Zs.size(); ++k) {
    if (Zs[k].rows() != T.dim0() || Zs[k].cols() != T.dim1())
      throw PreconditionError("from_z_slices: inconsistent slice shapes");
    for (Eigen::Index i = 0; i < T.dim0(); ++i)
      for (Eigen::Index j = 0; j < T.dim1(); ++j) T(i, j, k) = Zs[k](i, j);
  }
  return T;
}

/// One rank-one term u (x) v (x) w. Padding terms may carry zero vectors.
template <class S>
struct Term {
  VectorX<S> u, v, w;
  bool padding = false;
};

/// A list of rank-one terms representing sum_i u_i (x) v_i (x) w_i.
template <class S>
struct Decomposition {
  std::vector<Term<S>> terms;

  Eigen::Index size() const { return static_cast<Eigen::Index>(terms.size()); }

  void add(VectorX<S> u, VectorX<S> v, VectorX<S> w, bool padding = false) {
    if (!padding && (u.isZero(0) || v.isZero(0) || w.isZero(0)))
      throw PreconditionError(
          "Decomposition: zero vector in a non-padding term");
    terms.push_back({std::move(u), std::move(v), std::move(w), padding});
  }

  bool is_symmetric() const {
    for (const auto& t : terms)
      if (t.u != t.v || t.v != t.w) return false;
    return true;
  }

  /// Row-stacked factor matrices (rows are the u_i / v_i / w_i).
  MatrixX<S> factor_u() const { return stack([](const Term<S>& t) { return t.u; }); }
  MatrixX<S> factor_v() const { return stack([](const Term<S>& t) { return t.v; }); }
  MatrixX<S> factor_w() const { return stack([](const Term<S>& t) { return t.w; }); }

 private:
  template <class F>
  MatrixX<S> stack(F pick) const {
    if (terms.empty()) return MatrixX<S>(0, 0);
    MatrixX<S> M(terms.size(), pick(terms[0]).size());
    for (std::size_t i = 0; i < terms.size(); ++i)
      M.row(i) = pick(terms[i]).transpose();
    return M;
  }
};

/// Z_k = U^T D_k V for row-stacked factor matrices U (r x m) and V (r x n).
template <class S>
struct SliceFactorization {
  MatrixX<S> U, V;
  std::vector<VectorX<S>> diags;
};

template <class S>
Tensor3<S> assemble(const Decomposition<S>& D, Eigen::Index m, Eigen::Index n,
                    Eigen::Index p) {
  Tensor3<S> T(m, n, p);
  for (const auto& t : D.terms) {
    if (t.u.size() != m || t.v.size() != n || t.w.size() != p)
      throw PreconditionError("assemble: term dimensions do not match shape");
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const S uv = t.u(i) * t.v(j);
        for (Eigen::Index k = 0; k < p; ++k) T(i, j, k) += uv * t.w(k);
      }
  }
  return T;
}

template <class S>
SliceFactorization<S> to_slice_factorization(const Decomposition<S>& D) {
  SliceFactorization<S> F;
  F.U = D.factor_u();
  F.V = D.factor_v();
  const MatrixX<S> W = D.factor_w();
  F.diags.reserve(W.cols());
  for (Eigen::Index k = 0; k < W.cols(); ++k)
    F.diags.push_back(W.col(k));
  return F;
}

template <class S>
Decomposition<S> from_slice_factorization(const SliceFactorization<S>& F) {
  Decomposition<S> D;
  const Eigen::Index r = F.U.rows();
  if (F.V.rows() != r)
    throw PreconditionError("from_slice_factorization: U/V row mismatch");
  for (Eigen::Index i = 0; i < r; ++i) {
    VectorX<S> w(F.diags.size());
    for (std::size_t k = 0; k < F.diags.size(); ++k) w(k) = F.diags[k](i);
    D.terms.push_back({F.U.row(i).transpose(), F.V.row(i).transpose(), w,
                       /*padding=*/false});
  }
  return D;
}

enum class SubtensorMode {
  Cube,       ///< T_ijk = S_ijk for i,j,k up to T's dimensions
  SliceBlock  ///< T_ijk = S_ijk for i,j up to T's size, k over all p slices
};

/// Exact containment of T in the top-left corner of S.
template <class S>
bool is_subtensor(const Tensor3<S>& T, const Tensor3<S>& big,
                  SubtensorMode mode) {
  if (big.dim0() < T.dim0() || big.dim1() < T.dim1())
    throw PreconditionError("is_subtensor: S smaller than T");
  Eigen::Index kmax = T.dim2();
  if (mode == SubtensorMode::Cube) {
    if (big.dim2() < T.dim2())
      throw PreconditionError("is_subtensor: S smaller than T");
  } else {
    if (big.dim2() != T.dim2())
      throw PreconditionError("is_subtensor: slice-block mode needs equal p");
  }
  for (Eigen::Index i = 0; i < T.dim0(); ++i)
    for (Eigen::Index j = 0; j < T.dim1(); ++j)
      for (Eigen::Index k = 0; k < kmax; ++k)
        if (T(i, j, k) != big(i, j, k)) return false;
  return true;
}

namespace detail {
inline double cbrt_scalar(double x) { return std::cbrt(x); }
inline Complex cbrt_scalar(Complex x) { return std::pow(x, 1.0 / 3.0); }
}  // namespace detail

/// Rewrites each term u (x) v (x) w as at most 4 symmetric cubes via
/// 24uvw = (u+v+w)^3 - (u-v+w)^3 - (u+v-w)^3 + (u-v-w)^3.
/// The input must decompose a cubic tensor; zero combinations are dropped.
template <class S>
Decomposition<S> symmetrize_decomposition(const Decomposition<S>& D) {
  Decomposition<S> out;
  for (const auto& t : D.terms) {
    if (t.u.size() != t.v.size() || t.v.size() != t.w.size())
      throw PreconditionError("symmetrize_decomposition: non-cubic term");
    const std::array<std::pair<double, VectorX<S>>, 4> cubes = {{
        {1.0, (t.u + t.v + t.w).eval()},
        {-1.0, (t.u - t.v + t.w).eval()},
        {-1.0, (t.u + t.v - t.w).eval()},
        {1.0, (t.u - t.v - t.w).eval()},
    }};
    for (const auto& [sign, base] : cubes) {
      if (base.isZero(0)) continue;
      const S c = detail::cbrt_scalar(S(sign / 24.0));
      VectorX<S> s = c * base;
      out.terms.push_back({s, s, s, false});
    }
  }
  return out;
}

}  // namespace tenrank
