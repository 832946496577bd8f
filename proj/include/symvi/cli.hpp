#pragma once

// Command-line front end. Exit codes: 0 pass, 1 bound or residual failure,
// 2 usage error, 3 hypothesis not met.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "symvi/bounds.hpp"

namespace symvi {

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitUsage = 2, kExitHypothesis = 3 };

namespace detail {

struct CliStreams {
  std::ostream& out;
  std::ostream& err;
};

inline void emit(const CliStreams& io, const std::string& text, const std::string& path) {
  if (path.empty()) {
    io.out << text << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write \"" + path + "\"");
  f << text << '\n';
}

/// A single --res value applies to every axis.
inline std::vector<int> expand_resolution(const std::vector<int>& res, const PairPtr& space, const std::string& id) {
  if (res.size() != 1) return res;
  return std::vector<int>(detail::catalog_entry(*space, id).default_resolution.size(), res.front());
}

inline void print_error(const CliStreams& io, const Error& e) {
  nlohmann::json j = {{"error", e.kind()}, {"message", e.what()}};
  if (const auto* h = dynamic_cast<const HypothesisNotMet*>(&e)) j["hypothesis"] = h->hypothesis();
  io.err << j.dump() << '\n';
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const detail::CliStreams io{out, err};
  CLI::App app{"Virtual immersions of symmetric spaces and index bounds for minimal hypersurfaces", "symvi"};
  app.require_subcommand(1);

  std::string space_arg, surface, out_path, csv_path, affine_mode, format = "json";
  int samples = 500, k = 0, form = -1;
  double fd_step = 1e-3;
  std::vector<int> res;

  auto* verify = app.add_subcommand("verify", "Check the fundamental identities and the ACS quantity");
  verify->add_option("--space", space_arg, "Space spec (inline JSON or path)")->required();
  verify->add_option("--samples", samples, "Random samples per identity")->check(CLI::PositiveNumber);
  verify->add_option("--fd-step", fd_step, "Finite-difference step")->check(CLI::PositiveNumber);
  verify->add_option("--out", out_path, "Write the report to a file");

  auto add_surface = [&](CLI::App* sub) {
    sub->add_option("--space", space_arg, "Space spec (inline JSON or path)")->required();
    sub->add_option("--surface", surface, "Catalog surface id")->required();
    sub->add_option("--res", res, "Grid resolution per axis (one value applies to all axes)");
    sub->add_option("--out", out_path, "Write the report to a file");
  };

  auto* spec_cmd = app.add_subcommand("spectrum", "Spectrum of the Jacobi operator");
  add_surface(spec_cmd);
  spec_cmd->add_option("--k", k, "Number of eigenvalues to report (default all)");
  spec_cmd->add_option("--csv", csv_path, "Also write eigenvalues as CSV");

  auto* bound = app.add_subcommand("bound", "Index bound reports");
  add_surface(bound);
  bound->add_option("--affine", affine_mode, "Affine bound mode")->check(CLI::IsMember({"generic", "product"}));

  auto* rigidity = app.add_subcommand("rigidity", "Rigidity conditions for one harmonic basis form");
  add_surface(rigidity);
  rigidity->add_option("--form", form, "Index of the harmonic basis form")->required();

  auto* export_mesh = app.add_subcommand("export-mesh", "Dump mesh vertices, normals and principal curvatures");
  add_surface(export_mesh);
  export_mesh->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    const PairPtr space = make_pair_ptr(SpaceSpec::parse(space_arg));

    if (verify->parsed()) {
      const auto report = verify_fundamental(space, samples, fd_step);
      const double acs_max = sample_acs(space, 2 * samples);
      nlohmann::json j = {{"space", space->family_tag},
                          {"identities", report.to_json()},
                          {"acs_max", acs_max},
                          {"acs_pass", acs_max < kAlgebraicTol}};
      const bool pass = report.all_pass() && acs_max < kAlgebraicTol;
      j["pass"] = pass;
      detail::emit(io, j.dump(2), out_path);
      return pass ? kExitPass : kExitFailure;
    }

    const auto mesh = build_hypersurface(space, surface, detail::expand_resolution(res, space, surface));
    const ImmersionContext ctx(space);

    if (spec_cmd->parsed()) {
      const auto report = spectrum(mesh, k);
      detail::emit(io, report.to_json().dump(2), out_path);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        if (!f) throw InvalidInput("cannot write \"" + csv_path + "\"");
        f << report.to_csv();
      }
      return kExitPass;
    }

    if (bound->parsed()) {
      const auto analysis = SurfaceAnalysis::run(mesh, ctx);
      nlohmann::json j;
      const auto linear = linear_bound_report(analysis, ctx);
      j["linear"] = linear.to_json();
      bool pass = linear.all_pass();
      if (space->spec.family == Family::sphere && space->dim_M >= 2) {
        const auto cross = cross_corollary_report(analysis, ctx);
        j["cross"] = cross.to_json();
        pass = pass && cross.all_pass();
      }
      if (!affine_mode.empty()) {
        const auto affine = affine_bound_report(analysis, ctx, affine_mode);
        j["affine"] = affine.to_json();
        pass = pass && affine.all_pass();
      }
      j["linear_pass"] = linear.linear_pass;
      j["pass"] = pass;
      detail::emit(io, j.dump(2), out_path);
      return pass ? kExitPass : kExitFailure;
    }

    if (rigidity->parsed()) {
      const auto basis = harmonic_forms(mesh);
      if (form < 0 || form >= static_cast<int>(basis.forms.size())) {
        throw InvalidInput("--form must lie in [0, " + std::to_string(basis.forms.size()) + ")");
      }
      const auto report = rigidity_conditions(mesh, basis.forms[static_cast<std::size_t>(form)], ctx);
      nlohmann::json j = report.to_json();
      j["space"] = space->family_tag;
      j["surface"] = mesh.catalog_id;
      j["form"] = form;
      detail::emit(io, j.dump(2), out_path);
      return kExitPass;
    }

    if (export_mesh->parsed()) {
      detail::emit(io, format == "csv" ? mesh.to_csv() : mesh.to_json().dump(), out_path);
      return kExitPass;
    }
  } catch (const HypothesisNotMet& e) {
    detail::print_error(io, e);
    return kExitHypothesis;
  } catch (const RankTooSmall& e) {
    detail::print_error(io, e);
    return kExitHypothesis;
  } catch (const InvalidInput& e) {
    detail::print_error(io, e);
    return kExitUsage;
  } catch (const UnsupportedSpace& e) {
    detail::print_error(io, e);
    return kExitUsage;
  } catch (const UnsupportedHypersurface& e) {
    detail::print_error(io, e);
    return kExitUsage;
  } catch (const BackendMismatch& e) {
    detail::print_error(io, e);
    return kExitUsage;
  } catch (const Error& e) {
    detail::print_error(io, e);
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace symvi
