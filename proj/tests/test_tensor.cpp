#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tenrank/serialize.hpp"
#include "tenrank/tensor.hpp"

using namespace tenrank;
using namespace tenrank::testing;

TEST_CASE("slice calculus matches the index-loop definition") {
  Rng rng(11);
  const auto D = random_decomposition<double>(3, 4, 5, 6, rng);
  const Tensor3<double> T = assemble(D, 3, 4, 5);

  // Z_k(i,j) = sum_r u_r(i) w_r(k) v_r(j), computed by hand.
  for (Eigen::Index k = 0; k < 5; ++k) {
    MatrixX<double> Z = MatrixX<double>::Zero(3, 4);
    for (const auto& t : D.terms)
      for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) Z(i, j) += t.u(i) * t.v(j) * t.w(k);
    CHECK((Z - T.z_slice(k)).norm() < 1e-12 * T.norm());
  }

  // Factor-matrix identity Z_k = U^T D_k V.
  const auto F = to_slice_factorization(D);
  for (Eigen::Index k = 0; k < 5; ++k) {
    const MatrixX<double> Z =
        F.U.transpose() * F.diags[k].asDiagonal() * F.V;
    CHECK((Z - T.z_slice(k)).norm() < 1e-12 * T.norm());
  }

  // x/y slices agree with direct indexing.
  CHECK(T.x_slice(1)(2, 3) == T(1, 2, 3));
  CHECK(T.y_slice(2)(1, 4) == T(1, 2, 4));
}

TEST_CASE("slice factorization round trip") {
  Rng rng(5);
  const auto D = random_decomposition<Complex>(2, 3, 4, 5, rng);
  const auto D2 = from_slice_factorization(to_slice_factorization(D));
  REQUIRE(D2.size() == D.size());
  for (Eigen::Index i = 0; i < D.size(); ++i) {
    CHECK((D.terms[i].u - D2.terms[i].u).norm() == 0);
    CHECK((D.terms[i].v - D2.terms[i].v).norm() == 0);
    CHECK((D.terms[i].w - D2.terms[i].w).norm() == 0);
  }
}

TEST_CASE("symmetrize_by_averaging produces exact symmetry") {
  Rng rng(7);
  Tensor3<double> T = random_tensor<double>(4, 4, 4, rng);
  CHECK(!T.is_symmetric_exact());
  CHECK_THROWS_AS(T.mark_symmetric(), PreconditionError);
  T.symmetrize_by_averaging();
  CHECK(T.is_symmetric_exact());
  CHECK(T.symmetric());
  // Averaging is a projection: applying it twice changes nothing.
  Tensor3<double> T2 = T;
  T2.symmetrize_by_averaging();
  for (std::size_t i = 0; i < T.data().size(); ++i)
    CHECK(T.data()[i] == T2.data()[i]);
}

TEST_CASE("symmetrize_decomposition realizes the symmetrization") {
  Rng rng(13);
  const auto D = random_decomposition<double>(3, 3, 3, 4, rng);
  Tensor3<double> Tsym = assemble(D, 3, 3, 3);
  Tsym.symmetrize_by_averaging();

  const auto Ds = symmetrize_decomposition(D);
  CHECK(Ds.is_symmetric());
  CHECK(Ds.size() <= 4 * D.size());
  const Tensor3<double> R = assemble(Ds, 3, 3, 3);
  CHECK((Tsym - R).norm() < 1e-12 * Tsym.norm());
}

TEST_CASE("is_subtensor is exact down to the last bit") {
  Rng rng(3);
  const Tensor3<double> T = random_tensor<double>(2, 2, 3, rng);
  Tensor3<double> big(4, 4, 5);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      for (Eigen::Index k = 0; k < 3; ++k) big(i, j, k) = T(i, j, k);
  CHECK(is_subtensor(T, big, SubtensorMode::Cube));
  big(1, 1, 2) = std::nextafter(big(1, 1, 2), 2.0);  // flip the last bit
  CHECK(!is_subtensor(T, big, SubtensorMode::Cube));

  Tensor3<double> block(4, 4, 3);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      for (Eigen::Index k = 0; k < 3; ++k) block(i, j, k) = T(i, j, k);
  CHECK(is_subtensor(T, block, SubtensorMode::SliceBlock));
  CHECK_THROWS_AS(is_subtensor(T, big, SubtensorMode::SliceBlock),
                  PreconditionError);  // p mismatch
}

TEST_CASE("decomposition rejects zero vectors outside padding terms") {
  Decomposition<double> D;
  VectorX<double> z = VectorX<double>::Zero(3), u(3);
  u << 1, 2, 3;
  CHECK_THROWS_AS(D.add(u, z, u), PreconditionError);
  D.add(u, z, u, /*padding=*/true);
  CHECK(D.size() == 1);
}

TEST_CASE("tensor JSON round trip, real and complex") {
  Rng rng(21);
  const Tensor3<double> T = random_tensor<double>(2, 3, 4, rng);
  const Tensor3<double> T2 = tensor_from_json<double>(tensor_to_json(T));
  for (std::size_t i = 0; i < T.data().size(); ++i)
    CHECK(T.data()[i] == T2.data()[i]);

  const Tensor3<Complex> C = random_tensor<Complex>(3, 2, 2, rng);
  const json jc = tensor_to_json(C);
  CHECK(jc.at("field") == "complex");
  CHECK(jc.at("entries")[0][0][0].is_array());
  const Tensor3<Complex> C2 = tensor_from_json<Complex>(jc);
  for (std::size_t i = 0; i < C.data().size(); ++i)
    CHECK(C.data()[i] == C2.data()[i]);

  // Variant dispatch picks the field from the JSON.
  CHECK(std::holds_alternative<Tensor3<Complex>>(tensor_variant_from_json(jc)));
  CHECK(std::holds_alternative<Tensor3<double>>(
      tensor_variant_from_json(tensor_to_json(T))));

  // Symmetric flag survives.
  Tensor3<double> Sy = random_tensor<double>(3, 3, 3, rng);
  Sy.symmetrize_by_averaging();
  CHECK(tensor_from_json<double>(tensor_to_json(Sy)).symmetric());
}

TEST_CASE("decomposition JSON round trip preserves padding flags") {
  Rng rng(22);
  auto D = random_decomposition<Complex>(2, 2, 3, 3, rng);
  D.add(VectorX<Complex>::Zero(2), VectorX<Complex>::Zero(2),
        VectorX<Complex>::Zero(3), /*padding=*/true);
  const auto D2 = decomposition_from_json<Complex>(decomposition_to_json(D));
  REQUIRE(D2.size() == D.size());
  for (Eigen::Index i = 0; i < D.size(); ++i) {
    CHECK(D2.terms[i].padding == D.terms[i].padding);
    CHECK((D.terms[i].u - D2.terms[i].u).norm() == 0);
  }
}

TEST_CASE("malformed tensor JSON is rejected") {
  CHECK_THROWS_AS(tensor_from_json<double>(json{{"shape", {2, 2}}}),
                  PreconditionError);
  json j = tensor_to_json(Tensor3<double>(2, 2, 2));
  j["entries"][0][0] = json::array({1.0});  // ragged fiber
  CHECK_THROWS_AS(tensor_from_json<double>(j), PreconditionError);
  // Complex entry fed to a real tensor.
  json jr = tensor_to_json(Tensor3<double>(1, 1, 1));
  jr["entries"][0][0][0] = json::array({1.0, 2.0});
  CHECK_THROWS_AS(tensor_from_json<double>(jr), PreconditionError);
}
