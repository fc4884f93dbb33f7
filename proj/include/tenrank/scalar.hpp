#pragma once

#include <complex>
#include <random>
#include <type_traits>

#include <Eigen/Dense>

namespace tenrank {

using Complex = std::complex<double>;

enum class Field { Real, Complex };

template <class S>
using MatrixX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VectorX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct scalar_traits {
  static constexpr bool is_complex = false;
  static constexpr Field field = Field::Real;
};

template <>
struct scalar_traits<Complex> {
  static constexpr bool is_complex = true;
  static constexpr Field field = Field::Complex;
};

inline constexpr const char* field_name(Field f) {
  return f == Field::Real ? "real" : "complex";
}

/// Seeded standard-normal samples; complex variant has unit total variance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double real() { return dist_(gen_); }

  template <class S>
  S scalar() {
    if constexpr (scalar_traits<S>::is_complex) {
      const double re = dist_(gen_), im = dist_(gen_);
      return Complex(re * M_SQRT1_2, im * M_SQRT1_2);
    } else {
      return dist_(gen_);
    }
  }

  template <class S>
  VectorX<S> vector(Eigen::Index n) {
    VectorX<S> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = scalar<S>();
    return v;
  }

  template <class S>
  MatrixX<S> matrix(Eigen::Index rows, Eigen::Index cols) {
    MatrixX<S> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scalar<S>();
    return m;
  }

  std::uint64_t raw() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace tenrank
