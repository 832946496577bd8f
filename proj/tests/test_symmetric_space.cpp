#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "symvi/symmetric_space.hpp"

using namespace symvi;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<SpaceSpec>& catalog() {
  static const std::vector<SpaceSpec> specs = {
      SpaceSpec::sphere(3),
      SpaceSpec::sphere(4),
      SpaceSpec::sphere(5),
      SpaceSpec::flat_torus(2),
      SpaceSpec::flat_torus(3),
      SpaceSpec::product(SpaceSpec::sphere(3), SpaceSpec::sphere(3)),
      SpaceSpec::product(SpaceSpec::sphere(4), SpaceSpec::sphere(3)),
      SpaceSpec::product(SpaceSpec::sphere(3), SpaceSpec::flat_torus(1)),
  };
  return specs;
}

// Distance of m from span(basis) in the Frobenius norm, basis orthonormal for
// the Frobenius inner product after normalization.
double outside_span(const Matrix& m, std::vector<Matrix> basis) {
  Matrix r = m;
  for (auto& b : basis) {
    b /= b.norm();
    r -= (r.cwiseProduct(b).sum()) * b;
  }
  return r.norm();
}

}  // namespace

TEST_CASE("sphere(3) pair at e0", "[symmetric_space]") {
  const auto pair = build_space(SpaceSpec::sphere(3));
  CHECK(pair.d() == 3);
  CHECK(pair.dim_M == 2);
  CHECK(pair.rank == 1);
  REQUIRE(pair.h_basis.size() == 1);
  REQUIRE(pair.m_basis.size() == 2);
  CHECK(outside_span(pair.h_basis[0], {oracle::skew(3, 1, 2)}) < 1e-14);
  for (const auto& m : pair.m_basis) CHECK(outside_span(m, {oracle::skew(3, 0, 1), oracle::skew(3, 0, 2)}) < 1e-14);
  CHECK(pair.family_tag == "sphere(3)");
}

TEST_CASE("flat torus and products", "[symmetric_space]") {
  const auto t2 = build_space(SpaceSpec::flat_torus(2));
  CHECK(t2.d() == 2);
  CHECK(t2.h_basis.empty());
  CHECK(t2.dim_M == 2);
  for (const auto& a : t2.algebra.basis()) {
    for (const auto& b : t2.algebra.basis()) CHECK(bracket(a, b).norm() == 0.0);
  }

  const auto s3s3 = build_space(SpaceSpec::product(SpaceSpec::sphere(3), SpaceSpec::sphere(3)));
  CHECK(s3s3.d() == 6);
  CHECK(s3s3.dim_M == 4);
  CHECK(s3s3.rank == 2);
}

TEST_CASE("build_space errors", "[symmetric_space]") {
  CHECK_THROWS_AS(build_space(SpaceSpec::sphere(1)), InvalidInput);
  CHECK_THROWS_AS(SpaceSpec::parse(R"({"family": "projective", "n": 3})"), UnsupportedSpace);
  CHECK_THROWS_AS(SpaceSpec::parse(R"({"family": "sphere"})"), InvalidInput);
  CHECK_THROWS_AS(SpaceSpec::parse(R"({"family": "product", "factors": []})"), InvalidInput);
  CHECK_THROWS_AS(SpaceSpec::parse("{not json"), InvalidInput);
  CHECK_THROWS_AS(SpaceSpec::parse("/nonexistent/space.json"), InvalidInput);
}

TEST_CASE("space spec JSON round trip", "[symmetric_space]") {
  for (const auto& spec : catalog()) {
    const auto back = SpaceSpec::parse(spec.to_json().dump());
    CHECK(back.tag() == spec.tag());
  }
  CHECK(SpaceSpec::parse(R"({"family":"product","factors":[{"family":"sphere","n":3},{"family":"flat_torus","n":1}]})")
            .tag() == "product(sphere(3),flat_torus(1))");
}

TEST_CASE("calibrated scales", "[symmetric_space]") {
  const auto sphere = build_space(SpaceSpec::sphere(5));
  const auto scales = calibrate_scale(sphere);
  REQUIRE(scales.size() == 1);
  CHECK_THAT(scales[0], WithinAbs(0.5, 1e-12));

  const auto torus = build_space(SpaceSpec::flat_torus(3));
  for (double s : calibrate_scale(torus)) CHECK_THAT(s, WithinAbs(1.0, 1e-12));

  const auto prod = build_space(SpaceSpec::product(SpaceSpec::sphere(4), SpaceSpec::flat_torus(1)));
  const auto ps = calibrate_scale(prod);
  REQUIRE(ps.size() == 2);
  CHECK_THAT(ps[0], WithinAbs(0.5, 1e-12));
  CHECK_THAT(ps[1], WithinAbs(1.0, 1e-12));

  // Idempotent: calibrating the calibrated pair returns the same values.
  CHECK_THAT(calibrate_scale(sphere)[0], WithinAbs(scales[0], 1e-12));

  // <p ^ v, p ^ v> = 1 for orthonormal p, v under -1/2 trace.
  Vector p = Vector::Zero(5), v = Vector::Zero(5);
  p(0) = 1.0;
  v(3) = 1.0;
  CHECK_THAT(oracle::half_trace_form(oracle::wedge(p, v), oracle::wedge(p, v)), WithinAbs(1.0, 1e-15));
  CHECK_THAT(sphere.algebra.form(oracle::wedge(p, v), oracle::wedge(p, v)), WithinAbs(1.0, 1e-12));
}

TEST_CASE("rank of catalog spaces", "[symmetric_space]") {
  CHECK(rank_of(build_space(SpaceSpec::sphere(3))) == 1);
  CHECK(rank_of(build_space(SpaceSpec::sphere(6))) == 1);
  CHECK(rank_of(build_space(SpaceSpec::flat_torus(4))) == 4);
  CHECK(rank_of(build_space(SpaceSpec::product(SpaceSpec::sphere(4), SpaceSpec::sphere(3)))) == 2);
}

TEST_CASE("Cartan relations hold for every catalog space", "[symmetric_space][property]") {
  for (const auto& spec : catalog()) {
    INFO(spec.tag());
    const auto pair = build_space(spec);
    const auto r = cartan_residuals(pair);
    CHECK(r.max() < 1e-10);
    CHECK(r.span_mm_rank == static_cast<Index>(pair.h_basis.size()));
    const Index dm = pair.dim_M;
    CHECK((pair.m_coords.transpose() * pair.algebra.gram() * pair.m_coords - Matrix::Identity(dm, dm)).norm() < 1e-12);
  }
}

TEST_CASE("isotropy preserves m", "[symmetric_space][property]") {
  for (const auto& spec : catalog()) {
    INFO(spec.tag());
    const auto pair = build_space(spec);
    Rng rng = make_rng(11);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const Matrix h = random_isotropy_element(pair, rng);
      for (const auto& m : pair.m_basis) {
        const Vector c = pair.algebra.coordinates(adjoint(h, m));
        const Vector hpart = pair.h_coords.transpose() * pair.algebra.gram() * c;
        worst = std::max(worst, hpart.norm());
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("tangent frames", "[symmetric_space]") {
  const auto pair = make_pair_ptr(SpaceSpec::sphere(3));
  const auto frame = tangent_frame(base_point(pair));
  REQUIRE(frame.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK((frame[i].matrix() - pair->m_basis[i]).norm() < 1e-14);

  Rng rng = make_rng(12);
  for (const auto& spec : catalog()) {
    const auto pp = make_pair_ptr(spec);
    for (int s = 0; s < 10; ++s) {
      const auto p = random_point(pp, rng);
      const auto f = tangent_frame(p);
      for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t j = 0; j < f.size(); ++j) {
          CHECK_THAT(pp->algebra.inner_coords(f[i].value, f[j].value), WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
        }
      }
      CHECK((p.lift().transpose() * p.lift() - Matrix::Identity(p.lift().rows(), p.lift().cols())).norm() < 1e-12);
    }
  }

  const auto torus = make_pair_ptr(SpaceSpec::flat_torus(2));
  const auto a = tangent_frame(random_point(torus, rng));
  const auto b = tangent_frame(base_point(torus));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i].value - b[i].value).norm() < 1e-12);
}

TEST_CASE("points reject malformed lifts", "[symmetric_space]") {
  const auto pair = make_pair_ptr(SpaceSpec::sphere(3));
  CHECK_THROWS_AS(SpacePoint(pair, Matrix::Identity(4, 4)), InvalidInput);
  CHECK_THROWS_AS(SpacePoint(nullptr, Matrix::Identity(3, 3)), InvalidInput);
}
