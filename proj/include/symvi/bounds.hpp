#pragma once

// Index bound reports: the linear bound ind_0 >= b1 / binom(d, 2), the affine
// bound ind >= (b1 - D) / binom(d, 2) and the CROSS corollary.

#include <optional>
#include <string>

#include "json.hpp"

#include "symvi/spectral.hpp"

namespace symvi {

inline constexpr double kBoundSlack = 1e-12;

struct BoundReport {
  std::string space;
  std::string surface;
  int d = 0;
  std::optional<int> dim_isom;
  int binom_const = 0;
  int b1 = 0;
  int index = 0;
  int nullity = 0;
  int extended_index = 0;
  double linear_bound_rhs = 0.0;
  bool linear_pass = false;

  std::optional<std::string> affine_mode;
  std::optional<int> affine_D;
  std::optional<double> affine_rhs;
  std::optional<bool> affine_pass;
  /// Harmonic basis forms passing the rigidity conditions, and the budget
  /// dim H_1 + dim z(h) it must not exceed.
  std::optional<int> empirical_D;
  std::optional<int> rigidity_budget;

  std::optional<int> center_dim;
  std::optional<double> cross_rhs;
  std::optional<bool> cross_pass;

  nlohmann::json residual_summary = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["space"] = space;
    j["surface"] = surface;
    j["d"] = d;
    if (dim_isom) j["dim_isom"] = *dim_isom;
    j["binom_const"] = binom_const;
    j["b1"] = b1;
    j["index"] = index;
    j["nullity"] = nullity;
    j["extended_index"] = extended_index;
    j["linear_bound_rhs"] = linear_bound_rhs;
    j["linear_pass"] = linear_pass;
    if (affine_mode) j["affine_mode"] = *affine_mode;
    if (affine_D) j["affine_D"] = *affine_D;
    if (affine_rhs) j["affine_rhs"] = *affine_rhs;
    if (affine_pass) j["affine_pass"] = *affine_pass;
    if (empirical_D) j["empirical_D"] = *empirical_D;
    if (rigidity_budget) j["rigidity_budget"] = *rigidity_budget;
    if (center_dim) j["center_dim"] = *center_dim;
    if (cross_rhs) j["cross_rhs"] = *cross_rhs;
    if (cross_pass) j["cross_pass"] = *cross_pass;
    j["residual_summary"] = residual_summary;
    return j;
  }

  static BoundReport from_json(const nlohmann::json& j) {
    BoundReport r;
    try {
      r.space = j.at("space").get<std::string>();
      r.surface = j.at("surface").get<std::string>();
      r.d = j.at("d").get<int>();
      r.binom_const = j.at("binom_const").get<int>();
      r.b1 = j.at("b1").get<int>();
      r.index = j.at("index").get<int>();
      r.nullity = j.at("nullity").get<int>();
      r.extended_index = j.at("extended_index").get<int>();
      r.linear_bound_rhs = j.at("linear_bound_rhs").get<double>();
      r.linear_pass = j.at("linear_pass").get<bool>();
      auto opt = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
      };
      opt("dim_isom", r.dim_isom);
      opt("affine_mode", r.affine_mode);
      opt("affine_D", r.affine_D);
      opt("affine_rhs", r.affine_rhs);
      opt("affine_pass", r.affine_pass);
      opt("empirical_D", r.empirical_D);
      opt("rigidity_budget", r.rigidity_budget);
      opt("center_dim", r.center_dim);
      opt("cross_rhs", r.cross_rhs);
      opt("cross_pass", r.cross_pass);
      if (j.contains("residual_summary")) r.residual_summary = j.at("residual_summary");
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("BoundReport: ") + e.what());
    }
    return r;
  }

  /// Every bound that was evaluated holds.
  bool all_pass() const {
    return linear_pass && affine_pass.value_or(true) && cross_pass.value_or(true);
  }
};

/// Spectral and topological data of one mesh, computed once and shared by the
/// individual reports.
struct SurfaceAnalysis {
  const HypersurfaceMesh* mesh = nullptr;
  SpectralReport spectrum;
  std::optional<HarmonicBasis> harmonic;
  std::vector<RigidityReport> rigidity;

  static SurfaceAnalysis run(const HypersurfaceMesh& mesh, const ImmersionContext& ctx) {
    SurfaceAnalysis a;
    a.mesh = &mesh;
    a.spectrum = symvi::spectrum(mesh);
    if (mesh.backend == Backend::grid) {
      a.harmonic = harmonic_forms(mesh);
      for (const auto& f : a.harmonic->forms) a.rigidity.push_back(rigidity_conditions(mesh, f, ctx));
    }
    return a;
  }
};

namespace detail {

inline BoundReport base_report(const SurfaceAnalysis& a, const ImmersionContext& ctx) {
  const auto& mesh = *a.mesh;
  BoundReport r;
  r.space = mesh.space->family_tag;
  r.surface = mesh.catalog_id;
  r.d = static_cast<int>(ctx.d);
  // Every catalog space is G/H with G the identity component of its isometry
  // group, so dim Isom = dim g.
  r.dim_isom = r.d;
  r.binom_const = static_cast<int>(ctx.binom());
  r.b1 = a.harmonic ? static_cast<int>(a.harmonic->forms.size()) : mesh.b1;
  r.index = a.spectrum.index;
  r.nullity = a.spectrum.nullity;
  r.extended_index = a.spectrum.extended_index;

  const auto res = mesh_residuals(mesh);
  r.residual_summary["minimality"] = res.minimality;
  r.residual_summary["normal_norm"] = res.normal_norm;
  r.residual_summary["normal_tangent"] = res.normal_tangent;
  r.residual_summary["area_rel"] = res.area_rel;
  r.residual_summary["spectral_tol"] = a.spectrum.tol;
  r.residual_summary["backend"] = a.spectrum.backend;
  if (a.harmonic) {
    double worst = 0.0;
    for (double x : a.harmonic->residuals) worst = std::max(worst, x);
    r.residual_summary["hodge_residual"] = worst;
    r.residual_summary["hodge_kernel_dim"] = a.harmonic->kernel_dim;
  }
  return r;
}

}  // namespace detail

/// ind_0 >= binom(d, 2)^{-1} b1, compared against the raw fraction.
inline BoundReport linear_bound_report(const SurfaceAnalysis& a, const ImmersionContext& ctx) {
  BoundReport r = detail::base_report(a, ctx);
  r.linear_bound_rhs = static_cast<double>(r.b1) / r.binom_const;
  r.linear_pass = r.extended_index >= r.linear_bound_rhs - kBoundSlack;
  return r;
}

/// Adds the affine bound ind >= (b1 - D) / binom(d, 2). Mode "generic" needs
/// rank >= 2 and a point with distinct principal curvatures; mode "product"
/// needs a product of two spheres.
inline BoundReport affine_bound_report(const SurfaceAnalysis& a, const ImmersionContext& ctx, const std::string& mode) {
  BoundReport r = linear_bound_report(a, ctx);
  const auto& mesh = *a.mesh;
  const auto& pair = *mesh.space;
  int big_d = 0;
  if (mode == "generic") {
    if (pair.rank < 2) {
      throw HypothesisNotMet("rank", "affine bound (generic): rank " + std::to_string(pair.rank) + " < 2");
    }
    const auto gen = genericity_check(mesh);
    if (!gen.holds) {
      throw HypothesisNotMet("genericity", "affine bound (generic): no point with distinct principal curvatures");
    }
    big_d = affine_constant_a(pair);
  } else if (mode == "product") {
    try {
      big_d = affine_constant_b(pair);
    } catch (const InvalidInput& e) {
      throw HypothesisNotMet("product", std::string("affine bound (product): ") + e.what());
    }
  } else {
    throw InvalidInput("affine_bound_report: mode must be \"generic\" or \"product\"");
  }
  r.affine_mode = mode;
  r.affine_D = big_d;
  r.affine_rhs = static_cast<double>(r.b1 - big_d) / r.binom_const;
  r.affine_pass = r.index >= *r.affine_rhs - kBoundSlack;

  if (a.harmonic) {
    int passing = 0, h1 = 0;
    for (const auto& rig : a.rigidity) {
      if (rig.conditions_hold()) ++passing;
      if (rig.res_a < rig.fd_tol && std::abs(rig.r_omega_n) < kRigidityTol) ++h1;
    }
    r.empirical_D = passing;
    r.rigidity_budget = h1 + center_dimension(pair);
  }
  return r;
}

/// Single-sphere spaces: ind >= binom(d, 2)^{-1} b1 when dim M > 2 (h is
/// centerless), ind >= b1 - 1 when dim M = 2.
inline BoundReport cross_corollary_report(const SurfaceAnalysis& a, const ImmersionContext& ctx) {
  BoundReport r = linear_bound_report(a, ctx);
  const auto& pair = *a.mesh->space;
  if (pair.spec.family != Family::sphere || pair.dim_M < 2) {
    throw InvalidInput("cross_corollary_report: space must be a sphere of dimension >= 2");
  }
  r.center_dim = center_dimension(pair);
  if (pair.dim_M > 2) {
    r.cross_rhs = static_cast<double>(r.b1) / r.binom_const;
    r.cross_pass = *r.center_dim == 0 && r.index >= *r.cross_rhs - kBoundSlack;
  } else {
    r.cross_rhs = static_cast<double>(r.b1 - 1);
    r.cross_pass = r.index >= *r.cross_rhs - kBoundSlack;
  }
  return r;
}

inline BoundReport linear_bound_report(const HypersurfaceMesh& mesh, const ImmersionContext& ctx) {
  return linear_bound_report(SurfaceAnalysis::run(mesh, ctx), ctx);
}

inline BoundReport affine_bound_report(const HypersurfaceMesh& mesh, const ImmersionContext& ctx,
                                       const std::string& mode) {
  return affine_bound_report(SurfaceAnalysis::run(mesh, ctx), ctx, mode);
}

inline BoundReport cross_corollary_report(const HypersurfaceMesh& mesh, const ImmersionContext& ctx) {
  return cross_corollary_report(SurfaceAnalysis::run(mesh, ctx), ctx);
}

}  // namespace symvi
