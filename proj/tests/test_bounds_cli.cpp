#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "symvi/cli.hpp"

using namespace symvi;
using Catch::Matchers::WithinAbs;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "symvi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kS2 = R"({"family":"sphere","n":3})";
const char* kS3 = R"({"family":"sphere","n":4})";
const char* kT3 = R"({"family":"flat_torus","n":3})";
const char* kS2S2 = R"({"family":"product","factors":[{"family":"sphere","n":3},{"family":"sphere","n":3}]})";

}  // namespace

TEST_CASE("linear bound on the catalog", "[bounds]") {
  struct Case {
    std::string id;
    std::vector<int> res;
    int d, b1;
  };
  for (const auto& c : std::vector<Case>{{"great_circle", {64}, 3, 1},
                                         {"clifford_torus", {16, 16}, 6, 2},
                                         {"subtorus(2)", {16, 16}, 3, 2},
                                         {"equator", {}, 6, 0},
                                         {"circle_x_sphere", {}, 6, 1}}) {
    INFO(c.id);
    const auto mesh = build_hypersurface(catalog_space(c.id), c.id, c.res);
    const ImmersionContext ctx(mesh.space);
    const auto r = linear_bound_report(mesh, ctx);
    CHECK(r.d == c.d);
    CHECK(r.binom_const == oracle::binom2(c.d));
    CHECK(r.b1 == c.b1);
    CHECK_THAT(r.linear_bound_rhs, WithinAbs(double(c.b1) / oracle::binom2(c.d), 1e-15));
    CHECK(r.linear_pass);
    CHECK(r.all_pass());
  }
}

TEST_CASE("affine and cross reports", "[bounds]") {
  const auto s2s2 = make_pair_ptr(SpaceSpec::product(SpaceSpec::sphere(3), SpaceSpec::sphere(3)));
  const auto cs = build_hypersurface(s2s2, "circle_x_sphere");
  const ImmersionContext ctx(s2s2);
  const auto prod = affine_bound_report(cs, ctx, "product");
  CHECK(*prod.affine_D == 3);
  CHECK_THAT(*prod.affine_rhs, WithinAbs((1.0 - 3.0) / 15.0, 1e-15));
  CHECK(*prod.affine_pass);
  CHECK_FALSE(prod.empirical_D.has_value());

  const auto t3 = make_pair_ptr(SpaceSpec::flat_torus(3));
  const auto sub = build_hypersurface(t3, "subtorus(2)", {16, 16});
  const ImmersionContext tctx(t3);
  // Principal curvatures coincide everywhere on a flat subtorus.
  try {
    affine_bound_report(sub, tctx, "generic");
    FAIL("expected HypothesisNotMet");
  } catch (const HypothesisNotMet& e) {
    CHECK(e.hypothesis() == "genericity");
  }
  try {
    affine_bound_report(sub, tctx, "product");
    FAIL("expected HypothesisNotMet");
  } catch (const HypothesisNotMet& e) {
    CHECK(e.hypothesis() == "product");
  }

  const auto s3 = make_pair_ptr(SpaceSpec::sphere(4));
  const auto cliff = build_hypersurface(s3, "clifford_torus", {16, 16});
  const ImmersionContext sctx(s3);
  try {
    affine_bound_report(cliff, sctx, "generic");
    FAIL("expected HypothesisNotMet");
  } catch (const HypothesisNotMet& e) {
    CHECK(e.hypothesis() == "rank");
  }
  CHECK_THROWS_AS(affine_bound_report(cliff, sctx, "other"), InvalidInput);

  const auto cross = cross_corollary_report(cliff, sctx);
  CHECK(*cross.center_dim == 0);
  CHECK_THAT(*cross.cross_rhs, WithinAbs(2.0 / 15.0, 1e-15));
  CHECK(*cross.cross_pass);

  const auto s2 = make_pair_ptr(SpaceSpec::sphere(3));
  const auto circle = build_hypersurface(s2, "great_circle", {64});
  const auto c2 = cross_corollary_report(circle, ImmersionContext(s2));
  CHECK(*c2.center_dim == 1);
  CHECK_THAT(*c2.cross_rhs, WithinAbs(0.0, 1e-15));
  CHECK(*c2.cross_pass);

  CHECK_THROWS_AS(cross_corollary_report(sub, tctx), InvalidInput);
}

TEST_CASE("bound report JSON round trip is byte identical", "[bounds]") {
  const auto s2s2 = make_pair_ptr(SpaceSpec::product(SpaceSpec::sphere(3), SpaceSpec::sphere(3)));
  const ImmersionContext ctx(s2s2);
  const auto r = affine_bound_report(build_hypersurface(s2s2, "circle_x_sphere"), ctx, "product");
  const std::string first = r.to_json().dump();
  CHECK(BoundReport::from_json(nlohmann::json::parse(first)).to_json().dump() == first);

  const auto s2 = make_pair_ptr(SpaceSpec::sphere(3));
  const auto c = cross_corollary_report(build_hypersurface(s2, "great_circle", {32}), ImmersionContext(s2));
  const std::string second = c.to_json().dump(2);
  CHECK(BoundReport::from_json(nlohmann::json::parse(second)).to_json().dump(2) == second);

  CHECK_THROWS_AS(BoundReport::from_json(nlohmann::json::parse(R"({"space": "x"})")), InvalidInput);
  CHECK_THROWS_AS(BoundReport::from_json(nlohmann::json::parse(R"([1, 2])")), InvalidInput);
}

TEST_CASE("cli verify", "[cli]") {
  const auto r = run({"verify", "--space", kS2, "--samples", "40"});
  CHECK(r.code == kExitPass);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["acs_max"].get<double>() < 1e-10);
  CHECK(j["identities"].contains("gauss"));
}

TEST_CASE("cli spectrum and csv", "[cli]") {
  const std::string csv = "symvi_test_spectrum.csv";
  const auto r = run({"spectrum", "--space", kS2, "--surface", "great_circle", "--res", "64", "--k", "4", "--csv", csv});
  CHECK(r.code == kExitPass);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["index"] == 1);
  CHECK(j["nullity"] == 2);
  CHECK(j["eigenvalues"].size() == 4);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,lambda");
  in.close();
  std::remove(csv.c_str());

  const auto two = run({"spectrum", "--space", kS3, "--surface", "clifford_torus", "--res", "12", "12"});
  CHECK(two.code == kExitPass);
  CHECK(nlohmann::json::parse(two.out)["resolution"] == nlohmann::json::array({12, 12}));
}

TEST_CASE("cli bound", "[cli]") {
  const auto lin = run({"bound", "--space", kS2, "--surface", "great_circle", "--res", "64"});
  CHECK(lin.code == kExitPass);
  const auto j = nlohmann::json::parse(lin.out);
  CHECK(j["linear"]["linear_pass"] == true);
  CHECK(j.contains("cross"));

  const auto prod = run({"bound", "--space", kS2S2, "--surface", "circle_x_sphere", "--affine", "product"});
  CHECK(prod.code == kExitPass);
  CHECK(nlohmann::json::parse(prod.out)["affine"]["affine_D"] == 3);

  const auto hyp = run({"bound", "--space", kS3, "--surface", "clifford_torus", "--res", "12", "--affine", "generic"});
  CHECK(hyp.code == kExitHypothesis);
  const auto err = nlohmann::json::parse(hyp.err);
  CHECK(err["error"] == "HypothesisNotMet");
  CHECK(err["hypothesis"] == "rank");
}

TEST_CASE("cli rigidity and export", "[cli]") {
  const auto rig = run({"rigidity", "--space", kT3, "--surface", "subtorus(2)", "--res", "12", "--form", "1"});
  CHECK(rig.code == kExitPass);
  CHECK(nlohmann::json::parse(rig.out)["conditions_hold"] == true);

  const auto bad_form = run({"rigidity", "--space", kT3, "--surface", "subtorus(2)", "--res", "12", "--form", "5"});
  CHECK(bad_form.code == kExitUsage);

  const auto csv = run({"export-mesh", "--space", kS2, "--surface", "great_circle", "--res", "8", "--format", "csv"});
  CHECK(csv.code == kExitPass);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 10);

  const auto js = run({"export-mesh", "--space", kS2, "--surface", "great_circle", "--res", "8"});
  CHECK(nlohmann::json::parse(js.out)["vertices"].size() == 8);
}

TEST_CASE("cli usage errors", "[cli]") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"verify"}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"verify", "--space", R"({"family":"projective","n":2})"}).code == kExitUsage);
  CHECK(run({"verify", "--space", "{oops"}).code == kExitUsage);
  CHECK(run({"spectrum", "--space", kS2, "--surface", "clifford_torus"}).code == kExitUsage);
  CHECK(run({"spectrum", "--space", kS2, "--surface", "great_circle", "--res", "4"}).code == kExitUsage);
  CHECK(run({"bound", "--space", kS2, "--surface", "great_circle", "--affine", "sideways"}).code == kExitUsage);
  const auto mismatch = run({"rigidity", "--space", kS3, "--surface", "equator", "--form", "0"});
  CHECK(mismatch.code == kExitUsage);
  CHECK(nlohmann::json::parse(mismatch.err)["error"] == "BackendMismatch");
  CHECK(run({"--help"}).code == kExitPass);
}
