#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tenrank/bounds.hpp"
#include "tenrank/embed.hpp"

using namespace tenrank;
using namespace tenrank::testing;

namespace {
const TolerancePolicy pol;

template <class S>
bool top_left_exact(const Embedding<S>& E) {
  const Eigen::Index n = E.originals[0].rows();
  for (std::size_t k = 0; k < E.extended.size(); ++k)
    if (E.extended[k].topLeftCorner(n, n) != E.originals[k]) return false;
  return true;
}
}  // namespace

TEST_CASE("trivial 2n embedding: zero products, not diagonalizable") {
  Rng rng(81);
  std::vector<MatrixX<double>> Zs;
  for (int k = 0; k < 3; ++k) Zs.push_back(rng.matrix<double>(3, 3));
  const auto E = trivial_embed_2n(Zs, pol);
  CHECK(E.N == 6);
  CHECK(top_left_exact(E));
  CHECK(E.products_zero);
  CHECK(E.commute_residual == 0);
  for (const auto& A : E.extended)
    for (const auto& B : E.extended)
      CHECK((A * B).norm() == 0);  // products vanish exactly
  CHECK(!E.all_diagonalizable);  // nonzero blocks are nilpotent
}

TEST_CASE("Strassen pair embedding commutes by block symmetry") {
  Rng rng(82);
  const MatrixX<Complex> A2 = rng.matrix<Complex>(3, 3);
  const MatrixX<Complex> A3 = rng.matrix<Complex>(3, 3);
  const auto E = strassen_pair_embed(A2, A3, pol);
  CHECK(E.N == 6);
  CHECK(top_left_exact(E));
  CHECK(commutator(E.extended[0], E.extended[1]).norm() <
        1e-14 * E.extended[0].norm() * E.extended[1].norm());
  // The necessary condition is satisfied at N = 2n for any pair.
  CHECK(embedding_pair_bound(A2, A3, E.N, pol));
}

template <class S>
void commuting_embed_case(std::uint64_t seed, Eigen::Index n, Eigen::Index p,
                          Eigen::Index r) {
  Rng rng(seed);
  const auto D = random_decomposition<S>(n, n, p, r, rng);
  const Tensor3<S> T = assemble(D, n, n, p);
  const auto Zs = slices(T, Axis::Z);

  const auto E = commuting_embed(Zs, D, pol);
  CHECK(E.N == r + n);
  CHECK(top_left_exact(E));
  CHECK(E.commute_residual < 1e-8);
  CHECK(E.all_diagonalizable);

  // The embedding yields an (r+n)-term decomposition of the originals.
  auto [N, W] = embedding_to_rank_bound(E, pol, seed);
  CHECK(N == r + n);
  const Tensor3<S> R = assemble(W, n, n, p);
  CHECK((R - T).norm() < 1e-6 * T.norm());

  // Necessary condition from the pair lemma, for every slice pair.
  for (std::size_t i = 0; i < Zs.size(); ++i)
    for (std::size_t j = i + 1; j < Zs.size(); ++j)
      CHECK(embedding_pair_bound(Zs[i], Zs[j], E.N, pol));
}

TEST_CASE("commuting embeddings of generic slice tuples") {
  for (int t = 0; t < 5; ++t) {
    commuting_embed_case<double>(830 + t, 2 + (t % 3), 2 + (t % 3), 4 + t);
    commuting_embed_case<Complex>(840 + t, 2 + (t % 3), 2 + (t % 3), 4 + t);
  }
}

TEST_CASE("commuting_embed validates its witness") {
  Rng rng(85);
  const auto D = random_decomposition<double>(3, 3, 3, 5, rng);
  const auto Dwrong = random_decomposition<double>(3, 3, 3, 5, rng);
  const Tensor3<double> T = assemble(D, 3, 3, 3);
  CHECK_THROWS_AS(commuting_embed(slices(T, Axis::Z), Dwrong, pol),
                  PreconditionError);
}

template <class S>
void first_identity_case(std::uint64_t seed, Eigen::Index n, Eigen::Index r,
                         Eigen::Index p) {
  Rng rng(seed);
  // Plant a decomposition with U^T V = I_n and w_{i1} = 1, so the first
  // slice is the identity.
  MatrixX<S> V = rng.matrix<S>(r, n);
  while (numeric_rank(V, pol) < n) V = rng.matrix<S>(r, n);
  const MatrixX<S> U = V * (V.transpose() * V).inverse();
  Decomposition<S> D;
  for (Eigen::Index i = 0; i < r; ++i) {
    VectorX<S> w = rng.vector<S>(p);
    w(0) = S(1);
    D.add(VectorX<S>(U.row(i).transpose()), VectorX<S>(V.row(i).transpose()), w);
  }
  std::vector<MatrixX<S>> Zs;
  Zs.push_back(MatrixX<S>::Identity(n, n));  // exact identity first slice
  const auto F = to_slice_factorization(D);
  for (Eigen::Index k = 1; k < p; ++k)
    Zs.push_back(F.U.transpose() * F.diags[k].asDiagonal() * F.V);
  const Tensor3<S> T = from_z_slices(Zs);

  const auto E = first_slice_identity_embed(T, D, pol);
  CHECK(E.N == r);
  CHECK(E.extended[0] == MatrixX<S>::Identity(r, r));
  CHECK(E.commute_residual < 1e-8);
  CHECK(E.all_diagonalizable);

  auto [N, W] = embedding_to_rank_bound(E, pol, seed);
  CHECK(N == r);
  CHECK((assemble(W, n, n, p) - T).norm() < 1e-6 * T.norm());
}

TEST_CASE("first-slice-identity embeddings") {
  first_identity_case<double>(86, 3, 6, 3);
  first_identity_case<Complex>(87, 2, 5, 4);
}

TEST_CASE("first-slice-identity embed rejects bad inputs") {
  Rng rng(88);
  const auto D = random_decomposition<double>(3, 3, 3, 5, rng);
  const Tensor3<double> T = assemble(D, 3, 3, 3);
  CHECK_THROWS_AS(first_slice_identity_embed(T, D, pol), PreconditionError);
}

TEST_CASE("embedding_to_rank_bound refuses non-commuting tuples") {
  Rng rng(89);
  Embedding<double> E;
  E.originals = {rng.matrix<double>(2, 2), rng.matrix<double>(2, 2)};
  E.extended = E.originals;
  E.N = 2;
  CHECK_THROWS_AS(embedding_to_rank_bound(E, pol, 89), NotCommutingError);
}
