#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tenrank/oracle.hpp"

using namespace tenrank;
using namespace tenrank::testing;

namespace {
const TolerancePolicy pol;

Tensor3<double> strassen_fixture() {
  MatrixX<double> I = MatrixX<double>::Identity(2, 2);
  MatrixX<double> E12 = MatrixX<double>::Zero(2, 2), E21 = E12;
  E12(0, 1) = 1;
  E21(1, 0) = 1;
  return from_z_slices<double>({I, E12, E21});
}
}  // namespace

TEST_CASE("unfoldings match the index definition") {
  Rng rng(121);
  const auto T = random_tensor<double>(2, 3, 4, rng);
  const auto X0 = detail::unfold(T, 0);
  const auto X1 = detail::unfold(T, 1);
  const auto X2 = detail::unfold(T, 2);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index k = 0; k < 4; ++k) {
        CHECK(X0(i, j + k * 3) == T(i, j, k));
        CHECK(X1(j, i + k * 2) == T(i, j, k));
        CHECK(X2(k, i + j * 2) == T(i, j, k));
      }
}

template <class S>
void als_recovers(std::uint64_t seed, Eigen::Index n, Eigen::Index r) {
  Rng rng(seed);
  const auto D = random_decomposition<S>(n, n, n, r, rng);
  const Tensor3<S> T = assemble(D, n, n, n);
  const auto fit = als_fit(T, static_cast<int>(r), 6, 300, seed, pol);
  CHECK(fit.residual < 1e-8);
  CHECK(residual(T, fit.decomposition) < 1e-8);
  // Sweep residuals are non-increasing up to rounding.
  for (std::size_t i = 1; i < fit.history.size(); ++i)
    CHECK(fit.history[i] <= fit.history[i - 1] + 1e-10);
}

TEST_CASE("ALS recovers planted low-rank tensors") {
  als_recovers<double>(122, 4, 3);
  als_recovers<double>(123, 3, 2);
  als_recovers<Complex>(124, 3, 3);
}

TEST_CASE("ALS underfitting leaves a visible residual") {
  Rng rng(125);
  // A generic 3x3x3 tensor has rank > 2.
  const auto T = random_tensor<double>(3, 3, 3, rng);
  const auto fit = als_fit(T, 2, 4, 200, 125, pol);
  CHECK(fit.residual > 1e-4);
}

TEST_CASE("rank_lower aggregates matricization and commutator bounds") {
  const auto T = strassen_fixture();
  auto [lo, method] = rank_lower(T, pol, 1);
  CHECK(lo == 3);  // both the z-matricization and Strassen reach 3 here
  CHECK(!method.empty());

  Rng rng(126);
  // Lower bounds never exceed a known upper bound.
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index n = 2 + (t % 3), r = 1 + (t % 4);
    const auto D = random_decomposition<double>(n, n, 3, r, rng);
    const auto P = assemble(D, n, n, 3);
    auto [l, m] = rank_lower(P, pol, t);
    CHECK(l <= r);
    CHECK(l >= std::min<int>(static_cast<int>(r), 1));
  }
}

TEST_CASE("rank_bracket resolves the Strassen fixture at [3,3]") {
  const auto br = rank_bracket(strassen_fixture(), 4, 8, 1, pol);
  CHECK(br.lower == 3);
  REQUIRE(br.has_upper);
  CHECK(br.upper == 3);
  CHECK(br.upper_residual < 1e-8);
  CHECK(br.resolved);
  CHECK(br.witness.size() == 3);
}

TEST_CASE("rank_bracket on edge cases") {
  // Zero tensor.
  const Tensor3<double> Z(2, 2, 2);
  const auto bz = rank_bracket(Z, 3, 2, 0, pol);
  CHECK(bz.lower == 0);
  CHECK(bz.upper == 0);
  CHECK(bz.resolved);

  // Rank one.
  Rng rng(127);
  Decomposition<double> D;
  D.add(rng.vector<double>(3), rng.vector<double>(3), rng.vector<double>(3));
  const auto b1 = rank_bracket(assemble(D, 3, 3, 3), 3, 4, 0, pol);
  CHECK(b1.lower == 1);
  REQUIRE(b1.has_upper);
  CHECK(b1.upper == 1);
  CHECK(b1.resolved);

  // r_max too small: evidence only, no upper end.
  const auto bs = rank_bracket(strassen_fixture(), 2, 4, 1, pol);
  CHECK(!bs.has_upper);
  CHECK(!bs.resolved);
}
