#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tenrank/ortho.hpp"

using namespace tenrank;
using namespace tenrank::testing;

namespace {
const TolerancePolicy pol;
}

template <class S>
void round_trip_sym(std::uint64_t seed, Eigen::Index n) {
  Rng rng(seed);
  auto [T, plant] = planted_sym_odeco<S>(n, rng);
  const OdecoFlavor flavor{true, scalar_traits<S>::field};
  const CheckReport rep = odeco_check(T, flavor, pol);
  CHECK(rep.ok);
  const auto dec = odeco_decompose(T, flavor, pol, seed);
  CHECK(dec.residual < 1e-8);
  CHECK(max_offdiag_bilinear(dec.u) < 1e-10);
  if constexpr (scalar_traits<S>::is_complex) {
    for (const auto& q : dec.u)
      CHECK(std::abs((q.transpose() * q).value()) > 1e-6);  // non-isotropic
  }
  CHECK(residual(T, dec.folded()) < 1e-8);
}

template <class S>
void round_trip_ord(std::uint64_t seed, Eigen::Index n) {
  Rng rng(seed);
  auto [T, plant] = planted_odeco<S>(n, rng);
  const OdecoFlavor flavor{false, scalar_traits<S>::field};
  CHECK(odeco_check(T, flavor, pol).ok);
  const auto dec = odeco_decompose(T, flavor, pol, seed);
  CHECK(dec.residual < 1e-8);
  CHECK(max_offdiag_bilinear(dec.u) < 1e-10);
  CHECK(max_offdiag_bilinear(dec.v) < 1e-10);
  CHECK(max_offdiag_bilinear(dec.w) < 1e-10);
}

TEST_CASE("planted odeco round trips, all four flavors") {
  for (int t = 0; t < 8; ++t) {
    const Eigen::Index n = 2 + (t % 5);
    round_trip_sym<double>(500 + t, n);
    round_trip_sym<Complex>(600 + t, n);
    round_trip_ord<double>(700 + t, n);
    round_trip_ord<Complex>(800 + t, n);
  }
}

TEST_CASE("generic tensors fail the slice conditions") {
  Rng rng(41);
  Tensor3<double> T = random_tensor<double>(4, 4, 4, rng);
  T.symmetrize_by_averaging();
  CHECK(!odeco_check(T, OdecoFlavor{true, Field::Real}, pol).ok);
  const Tensor3<double> G = random_tensor<double>(4, 4, 4, rng);
  CHECK(!odeco_check(G, OdecoFlavor{false, Field::Real}, pol).ok);
}

TEST_CASE("flavor / tensor mismatches are rejected") {
  Rng rng(42);
  const Tensor3<double> T = random_tensor<double>(3, 3, 3, rng);
  CHECK_THROWS_AS(odeco_check(T, OdecoFlavor{true, Field::Real}, pol),
                  PreconditionError);  // not marked symmetric
  CHECK_THROWS_AS(odeco_check(T, OdecoFlavor{false, Field::Complex}, pol),
                  PreconditionError);  // field mismatch
  const Tensor3<double> R = random_tensor<double>(3, 3, 2, rng);
  CHECK_THROWS_AS(odeco_check(R, OdecoFlavor{false, Field::Real}, pol),
                  PreconditionError);  // not cubic
}

TEST_CASE("span_max_rank sees through diagonal families") {
  Rng rng(43);
  std::vector<MatrixX<double>> Ms;
  for (int k = 0; k < 3; ++k) {
    VectorX<double> d = rng.vector<double>(4);
    d(3) = 0;  // shared kernel direction: rank never exceeds 3
    Ms.push_back(d.asDiagonal());
  }
  CHECK(span_max_rank(Ms, 16, 43, pol) == 3);
}

template <class S>
void cert_round_trip(bool symmetric, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index n = 3;
  const OdecoFlavor flavor{symmetric, scalar_traits<S>::field};
  auto [T, D] = symmetric ? planted_sym_odeco<S>(n, rng)
                          : planted_odeco<S>(n, rng);
  RankCertificate<S> cert = build_rank_certificate(T, D, flavor, pol);
  cert.seed = seed;
  CHECK(verify_rank_certificate(cert, pol));
  CHECK(cert.supertensor.dim0() == n + D.size());
  CHECK(cert.checks.at("slice_conditions").pass);
  CHECK(cert.checks.at("subtensor").pass);
  CHECK(cert.checks.at("span_rank").pass);
}

TEST_CASE("orthogonal rank certificates: build then verify") {
  cert_round_trip<double>(true, 51);
  cert_round_trip<double>(false, 52);
  cert_round_trip<Complex>(true, 53);
  cert_round_trip<Complex>(false, 54);
}

TEST_CASE("certificate mutations flip the intended checks") {
  Rng rng(55);
  auto [T, D] = planted_odeco<double>(3, rng);
  const OdecoFlavor flavor{false, Field::Real};
  RankCertificate<double> good = build_rank_certificate(T, D, flavor, pol);
  REQUIRE(verify_rank_certificate(good, pol));

  // Corrupting the planted block breaks containment (and generally the
  // slice conditions too, so only subtensor is asserted to flip).
  RankCertificate<double> m1 = good;
  m1.supertensor(0, 0, 0) += 0.5;
  CHECK(!verify_rank_certificate(m1, pol));
  CHECK(!m1.checks.at("subtensor").pass);

  // Undersized r: span rank exceeds the claim.
  RankCertificate<double> m2 = good;
  m2.r = 2;
  CHECK(!verify_rank_certificate(m2, pol));
  CHECK(!m2.checks.at("span_rank").pass);
  CHECK(m2.checks.at("subtensor").pass);

  // An off-block perturbation breaks orthogonality of the slices but leaves
  // the planted block intact.
  RankCertificate<double> m3 = good;
  const Eigen::Index last = m3.supertensor.dim0() - 1;
  m3.supertensor(last, last - 1, last) += 0.5;
  CHECK(!verify_rank_certificate(m3, pol));
  CHECK(!m3.checks.at("slice_conditions").pass);
  CHECK(m3.checks.at("subtensor").pass);
}

TEST_CASE("build rejects a decomposition that does not match the tensor") {
  Rng rng(56);
  auto [T, D] = planted_odeco<double>(3, rng);
  auto [T2, D2] = planted_odeco<double>(3, rng);
  CHECK_THROWS_AS(
      build_rank_certificate(T, D2, OdecoFlavor{false, Field::Real}, pol),
      PreconditionError);
}
