#include <catch_amalgamated.hpp>

#include <numbers>

#include "oracles.hpp"
#include "symvi/eigensolver.hpp"
#include "symvi/spectral.hpp"

using namespace symvi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

HypersurfaceMesh catalog_mesh(const std::string& id, std::vector<int> res = {}) {
  return build_hypersurface(catalog_space(id), id, std::move(res));
}

}  // namespace

TEST_CASE("eigensolver agrees with Eigen", "[spectral][eigensolver]") {
  Rng rng = make_rng(31);
  for (int n : {1, 2, 3, 7, 20, 64}) {
    Matrix a(n, n);
    for (Index c = 0; c < n; ++c) a.col(c) = gaussian_vector(rng, n);
    a = 0.5 * (a + a.transpose()).eval();
    const Vector ours = symmetric_eigenvalues(a);
    const Eigen::SelfAdjointEigenSolver<Matrix> ref(a, Eigen::EigenvaluesOnly);
    CHECK((ours - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("tridiagonal QL", "[spectral][eigensolver]") {
  // Path graph Laplacian-like matrix: 2 on the diagonal, -1 off it, with
  // eigenvalues 2 - 2 cos(k pi / (n + 1)).
  const int n = 30;
  const Vector d = Vector::Constant(n, 2.0), e = Vector::Constant(n - 1, -1.0);
  const Vector ev = tridiagonal_eigenvalues(d, e);
  for (int k = 1; k <= n; ++k) {
    CHECK_THAT(ev(k - 1), WithinAbs(2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1)), 1e-12));
  }
  CHECK(tridiagonal_eigenvalues(Vector(), Vector()).size() == 0);
  CHECK_THROWS_AS(tridiagonal_eigenvalues(d, Vector::Zero(3)), InvalidInput);
  CHECK_THROWS_AS(symmetric_eigenvalues(Matrix::Zero(2, 3)), InvalidInput);
  // Already diagonal input.
  const Vector diag = tridiagonal_eigenvalues((Vector(3) << 3.0, -1.0, 2.0).finished(), Vector::Zero(2));
  CHECK(diag(0) == -1.0);
  CHECK(diag(2) == 3.0);
}

TEST_CASE("grid Jacobi operator equals the closed-form periodic stencil", "[spectral]") {
  SECTION("great circle") {
    const int n = 64;
    const auto mesh = catalog_mesh("great_circle", {n});
    const double h = 2.0 * std::numbers::pi / n;
    std::vector<double> expected;
    for (int k = 0; k < n; ++k) expected.push_back(oracle::periodic_second_difference(k, n, h) - 1.0);
    std::sort(expected.begin(), expected.end());
    const auto got = spectrum(mesh).eigenvalues;
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK_THAT(got[i], WithinAbs(expected[i], 1e-9));
  }
  SECTION("Clifford torus") {
    const int n = 16;
    const auto mesh = catalog_mesh("clifford_torus", {n, n});
    const double h = 2.0 * std::numbers::pi / n;
    std::vector<double> expected;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        // g = diag(1/2, 1/2), so g^{aa} = 2.
        expected.push_back(2.0 * (oracle::periodic_second_difference(k, n, h) +
                                  oracle::periodic_second_difference(l, n, h)) -
                           4.0);
      }
    }
    std::sort(expected.begin(), expected.end());
    const auto got = spectrum(mesh).eigenvalues;
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK_THAT(got[i], WithinAbs(expected[i], 1e-9));
  }
}

TEST_CASE("analytic spectra match enumerated oracles", "[spectral]") {
  const auto eq = spectrum(catalog_mesh("equator"));
  const auto eq_ref = oracle::equator(kAnalyticCutoff);
  REQUIRE(eq.eigenvalues.size() == eq_ref.size());
  for (std::size_t i = 0; i < eq_ref.size(); ++i) CHECK_THAT(eq.eigenvalues[i], WithinAbs(eq_ref[i], 1e-12));
  CHECK(eq.index == 1);
  CHECK(eq.nullity == 3);
  CHECK(eq.backend == "analytic");

  const auto cs = spectrum(catalog_mesh("circle_x_sphere"));
  const auto cs_ref = oracle::circle_x_sphere(kAnalyticCutoff);
  REQUIRE(cs.eigenvalues.size() == cs_ref.size());
  for (std::size_t i = 0; i < cs_ref.size(); ++i) CHECK_THAT(cs.eigenvalues[i], WithinAbs(cs_ref[i], 1e-12));
  CHECK(cs.index == 1);
  CHECK(cs.nullity == 2);

  // Asking for more modes than the default cutoff provides extends it.
  const auto more = spectrum(catalog_mesh("equator"), 200);
  CHECK(more.eigenvalues.size() == 200);
  CHECK(more.index == 1);
}

TEST_CASE("grid counts on coarse meshes", "[spectral]") {
  const auto circle = spectrum(catalog_mesh("great_circle", {64}));
  CHECK(circle.index == 1);
  CHECK(circle.nullity == 2);
  CHECK(circle.extended_index == 3);

  const auto torus = spectrum(catalog_mesh("subtorus(2)", {32, 32}));
  CHECK(torus.index == 0);
  CHECK(torus.nullity == 1);
  const double h = 2.0 * std::numbers::pi / 32.0;
  CHECK_THAT(torus.tol, WithinRel(kSpectralFactor * h * h, 1e-12));

  const auto truncated = spectrum(catalog_mesh("great_circle", {64}), 5);
  CHECK(truncated.eigenvalues.size() == 5);
  CHECK(truncated.index == 1);
  const std::string csv = truncated.to_csv();
  CHECK(csv.rfind("k,lambda\n0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(truncated.to_json()["eigenvalues"].size() == 5);
}

TEST_CASE("grid-only operations reject analytic meshes", "[spectral]") {
  const auto eq = catalog_mesh("equator");
  CHECK_THROWS_AS(jacobi_operator(eq), BackendMismatch);
  CHECK_THROWS_AS(harmonic_forms(eq), BackendMismatch);
  CHECK_THROWS_AS(q_form(eq, Vector::Zero(static_cast<Index>(eq.size()))), BackendMismatch);
}

TEST_CASE("quadratic form through edges and through the matrix", "[spectral][property]") {
  const auto mesh = catalog_mesh("clifford_torus", {12, 12});
  const Matrix jac = jacobi_operator(mesh);
  CHECK((jac - jac.transpose()).norm() < 1e-12);
  Rng rng = make_rng(32);
  for (int s = 0; s < 10; ++s) {
    const Vector f = gaussian_vector(rng, static_cast<Index>(mesh.size()));
    const double q = q_form(mesh, f);
    CHECK_THAT(q_form_matrix(jac, mesh, f), WithinAbs(q, 1e-9 * std::max(1.0, std::abs(q))));
  }
  CHECK_THROWS_AS(q_form(mesh, Vector::Zero(3)), InvalidInput);

  // Constants: Q(1, 1) = -integral of the potential = -4 area.
  const Vector one = Vector::Ones(static_cast<Index>(mesh.size()));
  CHECK_THAT(q_form(mesh, one), WithinRel(-4.0 * 2.0 * std::numbers::pi * std::numbers::pi, 1e-12));
}

TEST_CASE("harmonic forms", "[spectral]") {
  for (const std::string id : {"great_circle", "clifford_torus", "subtorus(2)"}) {
    INFO(id);
    const auto mesh = catalog_mesh(id);
    const auto basis = harmonic_forms(mesh);
    REQUIRE(static_cast<int>(basis.forms.size()) == mesh.b1);
    CHECK(basis.kernel_dim == mesh.b1);
    for (double r : basis.residuals) CHECK(r < kHodgeResidualTol);
    for (std::size_t a = 0; a < basis.forms.size(); ++a) {
      for (std::size_t b = 0; b < basis.forms.size(); ++b) {
        double ip = 0.0;
        for (std::size_t v = 0; v < mesh.size(); ++v) {
          ip += mesh.metric_weights[v] * basis.forms[a].sharp[v].dot(basis.forms[b].sharp[v]);
        }
        CHECK_THAT(ip, WithinAbs(a == b ? 1.0 : 0.0, 1e-12));
      }
    }
  }
  CHECK_THROWS_AS(coordinate_form(catalog_mesh("great_circle", {16}), Vector::Zero(2)), InvalidInput);
}

TEST_CASE("Hodge Laplacian kernel on a small torus", "[spectral]") {
  const Matrix lap = Matrix(detail::hodge_laplacian_1({6, 6}, {1.0, 1.0}, {2.0 * std::numbers::pi, 2.0 * std::numbers::pi}));
  CHECK((lap - lap.transpose()).norm() < 1e-12);
  const Vector ev = symmetric_eigenvalues(lap);
  CHECK((ev.array().abs() < 1e-8).count() == 2);
  CHECK(ev.minCoeff() > -1e-10);
}

TEST_CASE("test sections and the ACS identity converge at second order", "[spectral]") {
  const auto pair = make_pair_ptr(SpaceSpec::sphere(3));
  const ImmersionContext ctx(pair);
  double previous = 0.0;
  for (int n : {64, 128}) {
    const auto mesh = build_hypersurface(pair, "great_circle", {n});
    const auto basis = harmonic_forms(mesh);
    const auto sections = test_sections(mesh, basis.forms[0], ctx);
    CHECK(static_cast<Index>(sections.size()) == ctx.binom());
    const auto id = acs_integral_identity(mesh, basis.forms[0], ctx);
    CHECK(std::abs(id.rhs) < 1e-10);
    if (n == 128) CHECK_THAT(previous / id.residual, WithinAbs(4.0, 0.8));
    previous = id.residual;
  }
  CHECK(acs_integral_identity(build_hypersurface(pair, "great_circle", {16}),
                              zero_form(build_hypersurface(pair, "great_circle", {16})), ctx)
            .residual == 0.0);
}

TEST_CASE("rigidity diagnostics", "[spectral]") {
  SECTION("flat subtorus") {
    const auto mesh = catalog_mesh("subtorus(2)", {16, 16});
    const ImmersionContext ctx(mesh.space);
    for (const auto& f : harmonic_forms(mesh).forms) {
      const auto r = rigidity_conditions(mesh, f, ctx);
      CHECK(r.res_a < 1e-10);
      CHECK(r.res_b < 1e-10);
      CHECK(r.res_c < 1e-10);
      CHECK(r.conditions_hold());
    }
  }
  SECTION("Clifford torus") {
    const auto mesh = catalog_mesh("clifford_torus", {16, 16});
    const ImmersionContext ctx(mesh.space);
    const auto r = rigidity_conditions(mesh, coordinate_form(mesh, Vector::Unit(2, 0)), ctx);
    CHECK(r.res_a < 1e-6);
    CHECK_THAT(r.r_omega_n_unit_min, WithinAbs(1.0, 1e-10));
    CHECK_THAT(r.r_omega_n_unit_max, WithinAbs(1.0, 1e-10));
    CHECK(r.res_b > 1e-2);
    CHECK_FALSE(r.conditions_hold());
    CHECK(r.to_json()["conditions_hold"] == false);
  }
}

TEST_CASE("test sections satisfy the Lagrange identity", "[spectral][property]") {
  for (const std::string id : {"great_circle", "clifford_torus"}) {
    INFO(id);
    const auto mesh = catalog_mesh(id, id == "great_circle" ? std::vector<int>{64} : std::vector<int>{16, 16});
    const ImmersionContext ctx(mesh.space);
    const auto basis = harmonic_forms(mesh);
    for (const auto& form : basis.forms) {
      const auto f = test_sections(mesh, form, ctx);
      for (std::size_t v = 0; v < mesh.size(); ++v) {
        double sum = 0.0;
        for (const auto& fij : f) sum += fij(static_cast<Index>(v)) * fij(static_cast<Index>(v));
        CHECK_THAT(sum, WithinAbs(form.sharp[v].squaredNorm(), 1e-10));
        if (id == "great_circle") CHECK_THAT(sum, WithinAbs(1.0 / (2.0 * std::numbers::pi), 1e-10));
      }
    }
  }
}

TEST_CASE("quadratic form examples", "[spectral]") {
  const auto circle = catalog_mesh("great_circle", {64});
  const Vector c = Vector::Constant(64, 1.5);
  CHECK_THAT(q_form(circle, c), WithinRel(-2.0 * std::numbers::pi * 1.5 * 1.5, 1e-12));
  CHECK(q_form(circle, Vector::Zero(64)) == 0.0);

  // First Laplace eigenfunction on the Clifford torus: grid eigenvector of the
  // periodic stencil, so Q / |f|^2 is the discrete eigenvalue 2 lambda_h - 4.
  const int n = 32;
  const auto torus = catalog_mesh("clifford_torus", {n, n});
  Vector f(static_cast<Index>(torus.size()));
  for (std::size_t v = 0; v < torus.size(); ++v) f(static_cast<Index>(v)) = std::cos(torus.params[v][0]);
  double norm2 = 0.0;
  for (std::size_t v = 0; v < torus.size(); ++v) norm2 += torus.metric_weights[v] * f(static_cast<Index>(v)) * f(static_cast<Index>(v));
  const double discrete = 2.0 * oracle::periodic_second_difference(1, n, 2.0 * std::numbers::pi / n) - 4.0;
  CHECK_THAT(q_form(torus, f) / norm2, WithinAbs(discrete, 1e-10));
  CHECK_THAT(q_form(torus, f) / norm2, WithinAbs(-2.0, 0.01));
}

TEST_CASE("sum of Q over test sections stays below the spectral tolerance", "[spectral][property]") {
  for (const std::string id : {"great_circle", "clifford_torus", "subtorus(2)"}) {
    INFO(id);
    const auto mesh = catalog_mesh(id);
    const ImmersionContext ctx(mesh.space);
    const auto [h, coef] = detail::spacing_and_coefficients(mesh);
    const double tol = std::max(kSpectralFloor, kSpectralFactor * h * h * coef);
    for (const auto& form : harmonic_forms(mesh).forms) {
      const auto id_val = acs_integral_identity(mesh, form, ctx);
      CHECK(id_val.lhs <= tol);
    }
  }
}
