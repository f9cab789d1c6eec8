#include "doctest.h"

#include "arrayloc/error.hpp"
#include "arrayloc/mds.hpp"

using namespace arrayloc;

namespace {

Edm two_points() {
  Eigen::MatrixXd d(2, 2);
  d << 0, 9, 9, 0;
  return Edm(d);
}

// Gram matrix straight from centered coordinates.
Eigen::MatrixXd centered_gram(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd xc = x.colwise() - x.rowwise().mean();
  return xc.transpose() * xc;
}

}  // namespace

TEST_SUITE("mds") {

TEST_CASE("gram of two points") {
  const GramMatrix g = gram_from_edm(two_points(), Eigen::Vector2d(0.5, 0.5));
  CHECK(g.entries(0, 0) == doctest::Approx(2.25));
  CHECK(g.entries(0, 1) == doctest::Approx(-2.25));
  CHECK(g.entries(1, 0) == doctest::Approx(-2.25));
  CHECK(g.entries(1, 1) == doctest::Approx(2.25));

  const GramMatrix z = gram_from_edm(Edm(Eigen::MatrixXd::Zero(4, 4)));
  CHECK(z.entries.isZero());
}

TEST_CASE("gram preconditions") {
  CHECK_THROWS_AS(gram_from_edm(two_points(), Eigen::Vector2d(0.5, 0.6)), InvalidInput);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  AdjacencyMask m = AdjacencyMask::complete(3);
  m.set(0, 2, false);
  CHECK_THROWS_AS(gram_from_edm(Edm(d, m)), PreconditionError);
  CHECK_THROWS_AS(classical_mds(Edm(d, m), 2), PreconditionError);
}

TEST_CASE("gram of the 3-4-5 triangle") {
  Eigen::MatrixXd x(2, 3);
  x << 0, 3, 0, 0, 0, 4;
  const GramMatrix g = gram_from_edm(edm_from_points(NodeLayout(x)));
  const Eigen::MatrixXd oracle = centered_gram(x);
  CHECK((g.entries - oracle).norm() < 1e-12);
  const EigenSystem e = eigen_decompose(g);
  CHECK(e.values(0) > 0.0);
  CHECK(e.values(1) > 0.0);
  CHECK(std::abs(e.values(2)) < 1e-12);
  CHECK(e.values.sum() == doctest::Approx(oracle.trace()));
}

TEST_CASE("mds of two points") {
  const MdsResult r = classical_mds(two_points(), 1);
  const double a = r.layout.coords()(0, 0);
  const double b = r.layout.coords()(0, 1);
  CHECK(std::abs(a) == doctest::Approx(1.5));
  CHECK(a + b == doctest::Approx(0.0));
  CHECK_FALSE(r.clipped);

  const MdsResult z = classical_mds(Edm(Eigen::MatrixXd::Zero(5, 5)), 2);
  CHECK(z.layout.coords().isZero());
}

TEST_CASE("eigenvalues ordered by magnitude") {
  GramMatrix g{Eigen::Vector3d(1.0, -5.0, 3.0).asDiagonal()};
  const EigenSystem e = eigen_decompose(g);
  CHECK(e.values(0) == doctest::Approx(-5.0));
  CHECK(e.values(1) == doctest::Approx(3.0));
  CHECK(e.values(2) == doctest::Approx(1.0));
}

TEST_CASE("non-euclidean input is clipped") {
  // distances violating the triangle inequality
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 100, 1, 0, 1, 100, 1, 0;
  const MdsResult r = classical_mds(Edm(d), 2);
  CHECK(r.clipped);
  CHECK(r.layout.coords().allFinite());
}

TEST_CASE("round trip over random layouts") {
  Rng rng = make_rng(77, 0);
  for (int t = 0; t < 300; ++t) {
    const int n = 3 + static_cast<int>(uniform01(rng) * 23);
    const NodeLayout truth = random_box_layout(n, 5.0, rng);
    const Edm d = edm_from_points(truth);
    const MdsResult r = classical_mds(d, 2);
    const Eigen::MatrixXd back = edm_from_points(r.layout).entries();
    REQUIRE((back - d.entries()).norm() / d.entries().norm() < 1e-9);
    REQUIRE(r.layout.centroid().norm() < 1e-9);
    const Eigen::MatrixXd kernel = classical_mds_kernel(d.entries(), 2);
    REQUIRE((edm_of(kernel) - d.entries()).norm() / d.entries().norm() < 1e-9);
    // rank 2, positive semidefinite
    for (int k = 2; k < n; ++k) REQUIRE(std::abs(r.eigenvalues(k)) < 1e-9 * r.eigenvalues(0));
    REQUIRE(r.eigenvalues(1) > 0.0);
  }
}

}
