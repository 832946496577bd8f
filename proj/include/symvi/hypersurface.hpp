#pragma once

// Catalog of closed minimal hypersurfaces with explicit coset lifts on
// uniform parameter grids.
//
// Every entry gives a lift u -> g(u), its left-trivialized derivatives
// L_a = g^{-1} dg/du_a and the unit normal N(u) as m-coordinates. Since
// d/du_a Omega(Y) = Ad_g([L_a, Y] + dY/du_a), the induced metric, the
// Levi-Civita derivative of N and the second fundamental form of the
// hypersurface follow without any numerical differentiation.

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "symvi/virtual_immersion.hpp"

namespace symvi {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kGapTol = 1e-6;

enum class Backend { grid, analytic };

inline std::string to_string(Backend b) { return b == Backend::grid ? "grid" : "analytic"; }

struct HypersurfaceMesh {
  PairPtr space;
  std::string catalog_id;
  Backend backend = Backend::grid;
  std::vector<int> grid_shape;
  /// Parameter domain per axis: u_a in [lo_a, lo_a + length_a); periodic axes
  /// have length 2 pi.
  std::vector<double> axis_lo, axis_length;
  std::vector<bool> periodic;
  int sigma_dim = 0;

  std::vector<std::vector<double>> params;
  std::vector<SpacePoint> vertices;
  /// N(u) as m-coordinates.
  std::vector<Vector> unit_normal;
  /// Columns (L_a)_m: images of the coordinate vectors d/du_a in m.
  std::vector<Matrix> coordinate_tangents;
  /// Columns: orthonormal frame of T Sigma in m-coordinates.
  std::vector<Matrix> tangent_frame_sigma;
  /// Induced metric g_ab and second fundamental form h_ab = -<nabla_a N, d_b>.
  std::vector<Matrix> metric, second_form;
  std::vector<double> metric_weights;
  std::vector<Vector> shape_eigs;
  std::vector<double> A_norm_sq;
  std::vector<double> ricci_N;
  int b1 = 0;
  /// Exact area of the catalog surface.
  double catalog_area = 0.0;

  std::size_t size() const { return vertices.size(); }
  double spacing(int axis) const { return axis_length[axis] / grid_shape[axis]; }

  /// Flat vertex index of a multi-index; last axis varies fastest.
  std::size_t flat_index(const std::vector<int>& idx) const {
    std::size_t k = 0;
    for (std::size_t a = 0; a < grid_shape.size(); ++a) k = k * grid_shape[a] + static_cast<std::size_t>(idx[a]);
    return k;
  }

  std::vector<int> multi_index(std::size_t k) const {
    std::vector<int> idx(grid_shape.size());
    for (std::size_t a = grid_shape.size(); a-- > 0;) {
      idx[a] = static_cast<int>(k % static_cast<std::size_t>(grid_shape[a]));
      k /= static_cast<std::size_t>(grid_shape[a]);
    }
    return idx;
  }

  /// Periodic neighbour of vertex k along `axis` (offset +-1).
  std::size_t neighbour(std::size_t k, int axis, int offset) const {
    auto idx = multi_index(k);
    const int n = grid_shape[static_cast<std::size_t>(axis)];
    idx[static_cast<std::size_t>(axis)] = ((idx[static_cast<std::size_t>(axis)] + offset) % n + n) % n;
    return flat_index(idx);
  }

  double total_weight() const {
    double s = 0.0;
    for (double w : metric_weights) s += w;
    return s;
  }

  /// V = |A|^2 + Ric(N, N), the potential of the Jacobi operator.
  double potential(std::size_t k) const { return A_norm_sq[k] + ricci_N[k]; }

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

namespace detail {

/// Closed-form description of one catalog entry.
struct CatalogEntry {
  std::string id;
  Backend backend = Backend::grid;
  std::vector<int> default_resolution;
  std::vector<double> lo, length;
  std::vector<bool> periodic;
  /// Cell-centred samples on non-periodic axes (avoids coordinate poles).
  bool midpoint = false;
  int b1 = 0;
  double area = 0.0;
  std::function<Matrix(const std::vector<double>&)> lift;
  std::function<std::vector<Matrix>(const std::vector<double>&)> left_derivatives;
  std::function<Vector(const std::vector<double>&)> normal;
  /// dN/du_a in m-coordinates; all catalog normals are constant.
  std::function<std::vector<Vector>(const std::vector<double>&)> normal_derivatives;
};

/// Rotation by angle t in the (i, j) coordinate plane, sending e_i towards e_j.
inline Matrix plane_rotation(Index n, Index i, Index j, double t) {
  Matrix r = Matrix::Identity(n, n);
  r(i, i) = std::cos(t);
  r(j, j) = std::cos(t);
  r(j, i) = std::sin(t);
  r(i, j) = -std::sin(t);
  return r;
}

/// Generator of plane_rotation(n, i, j, .), i.e. -E_ij.
inline Matrix rotation_generator(Index n, Index i, Index j) { return -elementary_skew(n, i, j); }

inline bool is_sphere(const SpaceSpec& s, int n) { return s.family == Family::sphere && s.n == n; }

/// Lift of the unit 2-sphere chart p = (cos th, sin th cos ph, sin th sin ph, ...)
/// inside so(n) at matrix offset `off`: g = R_{12}(ph) R_{01}(th).
inline Matrix sphere_chart_lift(Index n, Index off, double th, double ph) {
  Matrix g = Matrix::Identity(n, n);
  g *= plane_rotation(n, off + 1, off + 2, ph);
  g *= plane_rotation(n, off, off + 1, th);
  return g;
}

/// L_th = -E_01 and L_ph = Ad_{R_01(-th)}(-E_12) = -(sin th E_02 + cos th E_12).
inline std::vector<Matrix> sphere_chart_derivatives(Index n, Index off, double th) {
  return {rotation_generator(n, off, off + 1),
          -(std::sin(th) * elementary_skew(n, off, off + 2) + std::cos(th) * elementary_skew(n, off + 1, off + 2))};
}

inline std::vector<Vector> zero_derivatives(Index dm, std::size_t k) { return std::vector<Vector>(k, Vector::Zero(dm)); }

inline Matrix clifford_g0() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix g0 = Matrix::Zero(4, 4);
  g0.col(0) << r, 0, r, 0;
  g0.col(1) = Vector::Unit(4, 1);
  g0.col(2) = Vector::Unit(4, 3);
  g0.col(3) << r, 0, -r, 0;
  if (g0.determinant() < 0.0) g0.col(2) = -g0.col(2);
  return g0;
}

inline std::optional<int> parse_subtorus(const std::string& id) {
  if (id == "subtorus") return std::nullopt;
  const std::string prefix = "subtorus(";
  if (id.rfind(prefix, 0) != 0 || id.back() != ')') return std::nullopt;
  try {
    return std::stoi(id.substr(prefix.size(), id.size() - prefix.size() - 1));
  } catch (const std::exception&) {
    throw InvalidInput("catalog id: malformed \"" + id + "\"");
  }
}

inline CatalogEntry catalog_entry(const SymmetricPair& space, const std::string& id) {
  const SpaceSpec& s = space.spec;
  const Index dm = space.dim_M;
  CatalogEntry e;
  e.id = id;
  auto incompatible = [&]() {
    return UnsupportedHypersurface("catalog entry \"" + id + "\" is not available in " + space.family_tag);
  };

  if (id == "great_circle") {
    if (!is_sphere(s, 3)) throw incompatible();
    e.default_resolution = {256};
    e.lo = {0.0};
    e.length = {kTwoPi};
    e.periodic = {true};
    e.b1 = 1;
    e.area = kTwoPi;
    e.lift = [](const std::vector<double>& u) { return plane_rotation(3, 0, 1, u[0]); };
    e.left_derivatives = [](const std::vector<double>&) { return std::vector<Matrix>{rotation_generator(3, 0, 1)}; };
    e.normal = [dm](const std::vector<double>&) { return Vector(Vector::Unit(dm, 1)); };
    e.normal_derivatives = [dm](const std::vector<double>&) { return zero_derivatives(dm, 1); };
  } else if (id == "clifford_torus") {
    if (!is_sphere(s, 4)) throw incompatible();
    e.default_resolution = {64, 64};
    e.lo = {0.0, 0.0};
    e.length = {kTwoPi, kTwoPi};
    e.periodic = {true, true};
    e.b1 = 2;
    e.area = 2.0 * std::numbers::pi * std::numbers::pi;
    const Matrix g0 = clifford_g0();
    const Matrix ls = g0.transpose() * rotation_generator(4, 0, 1) * g0;
    const Matrix lt = g0.transpose() * rotation_generator(4, 2, 3) * g0;
    e.lift = [g0](const std::vector<double>& u) {
      return Matrix(plane_rotation(4, 0, 1, u[0]) * plane_rotation(4, 2, 3, u[1]) * g0);
    };
    e.left_derivatives = [ls, lt](const std::vector<double>&) { return std::vector<Matrix>{ls, lt}; };
    e.normal = [dm](const std::vector<double>&) { return Vector(Vector::Unit(dm, 2)); };
    e.normal_derivatives = [dm](const std::vector<double>&) { return zero_derivatives(dm, 2); };
  } else if (id == "equator") {
    if (!is_sphere(s, 4)) throw incompatible();
    e.backend = Backend::analytic;
    e.default_resolution = {32, 32};
    e.lo = {0.0, 0.0};
    e.length = {std::numbers::pi, kTwoPi};
    e.periodic = {false, true};
    e.midpoint = true;
    e.b1 = 0;
    e.area = 4.0 * std::numbers::pi;
    e.lift = [](const std::vector<double>& u) { return sphere_chart_lift(4, 0, u[0], u[1]); };
    e.left_derivatives = [](const std::vector<double>& u) { return sphere_chart_derivatives(4, 0, u[0]); };
    e.normal = [dm](const std::vector<double>&) { return Vector(Vector::Unit(dm, 2)); };
    e.normal_derivatives = [dm](const std::vector<double>&) { return zero_derivatives(dm, 2); };
  } else if (id == "circle_x_sphere") {
    if (s.family != Family::product || s.factors.size() != 2 || !is_sphere(s.factors[0], 3) ||
        !is_sphere(s.factors[1], 3)) {
      throw incompatible();
    }
    e.backend = Backend::analytic;
    e.default_resolution = {16, 32, 32};
    e.lo = {0.0, 0.0, 0.0};
    e.length = {kTwoPi, std::numbers::pi, kTwoPi};
    e.periodic = {true, false, true};
    e.midpoint = true;
    e.b1 = 1;
    e.area = kTwoPi * 4.0 * std::numbers::pi;
    e.lift = [](const std::vector<double>& u) {
      Matrix g = plane_rotation(6, 0, 1, u[0]);
      return Matrix(g * sphere_chart_lift(6, 3, u[1], u[2]));
    };
    e.left_derivatives = [](const std::vector<double>& u) {
      auto sph = sphere_chart_derivatives(6, 3, u[1]);
      return std::vector<Matrix>{rotation_generator(6, 0, 1), sph[0], sph[1]};
    };
    e.normal = [dm](const std::vector<double>&) { return Vector(Vector::Unit(dm, 1)); };
    e.normal_derivatives = [dm](const std::vector<double>&) { return zero_derivatives(dm, 3); };
  } else if (id.rfind("subtorus", 0) == 0) {
    if (s.family != Family::flat_torus) throw incompatible();
    const int k = parse_subtorus(id).value_or(s.n - 1);
    if (k != s.n - 1 || k < 1) {
      throw UnsupportedHypersurface("subtorus(" + std::to_string(k) + ") is not a hypersurface of " + space.family_tag);
    }
    const Index n2 = 2 * static_cast<Index>(s.n);
    e.id = "subtorus(" + std::to_string(k) + ")";
    e.default_resolution.assign(static_cast<std::size_t>(k), 32);
    e.lo.assign(static_cast<std::size_t>(k), 0.0);
    e.length.assign(static_cast<std::size_t>(k), kTwoPi);
    e.periodic.assign(static_cast<std::size_t>(k), true);
    e.b1 = k;
    e.area = std::pow(kTwoPi, k);
    e.lift = [n2, k](const std::vector<double>& u) {
      Matrix g = Matrix::Identity(n2, n2);
      for (int a = 0; a < k; ++a) g *= plane_rotation(n2, 2 * a, 2 * a + 1, u[static_cast<std::size_t>(a)]);
      return g;
    };
    e.left_derivatives = [n2, k](const std::vector<double>&) {
      std::vector<Matrix> out;
      for (int a = 0; a < k; ++a) out.push_back(rotation_generator(n2, 2 * a, 2 * a + 1));
      return out;
    };
    e.normal = [dm](const std::vector<double>&) { return Vector(Vector::Unit(dm, dm - 1)); };
    e.normal_derivatives = [dm, k](const std::vector<double>&) { return zero_derivatives(dm, static_cast<std::size_t>(k)); };
  } else {
    throw UnsupportedHypersurface("unknown catalog entry \"" + id + "\"");
  }
  return e;
}

}  // namespace detail

inline const std::vector<std::string>& catalog_ids() {
  static const std::vector<std::string> ids = {"great_circle", "clifford_torus", "equator", "circle_x_sphere",
                                               "subtorus"};
  return ids;
}

/// Default catalog space for a surface id (used by the CLI and tests).
inline SpaceSpec catalog_space(const std::string& id) {
  if (id == "great_circle") return SpaceSpec::sphere(3);
  if (id == "clifford_torus" || id == "equator") return SpaceSpec::sphere(4);
  if (id == "circle_x_sphere") return SpaceSpec::product(SpaceSpec::sphere(3), SpaceSpec::sphere(3));
  if (id.rfind("subtorus", 0) == 0) return SpaceSpec::flat_torus(detail::parse_subtorus(id).value_or(2) + 1);
  throw UnsupportedHypersurface("unknown catalog entry \"" + id + "\"");
}

inline HypersurfaceMesh build_hypersurface(const PairPtr& space, const std::string& catalog_id,
                                           std::vector<int> resolution = {}) {
  const auto entry = detail::catalog_entry(*space, catalog_id);
  const std::size_t k = entry.default_resolution.size();
  if (resolution.empty()) resolution = entry.default_resolution;
  if (resolution.size() != k) {
    throw InvalidInput("build_hypersurface: " + entry.id + " needs " + std::to_string(k) + " resolution values");
  }
  for (int r : resolution) {
    if (r < 8) throw InvalidInput("build_hypersurface: resolution must be >= 8 per axis");
  }

  const auto& pair = *space;
  const auto& alg = pair.algebra;
  const Index dm = pair.dim_M;

  HypersurfaceMesh mesh;
  mesh.space = space;
  mesh.catalog_id = entry.id;
  mesh.backend = entry.backend;
  mesh.grid_shape = resolution;
  mesh.axis_lo = entry.lo;
  mesh.axis_length = entry.length;
  mesh.periodic = entry.periodic;
  mesh.sigma_dim = static_cast<int>(k);
  mesh.b1 = entry.b1;
  mesh.catalog_area = entry.area;

  std::size_t total = 1;
  for (int r : resolution) total *= static_cast<std::size_t>(r);

  // Base-point curvature data; R is Ad-invariant so Ric(N, N) only needs N.
  const SpacePoint origin = base_point(space);
  const Matrix frame_m = Matrix::Identity(dm, dm);

  for (std::size_t v = 0; v < total; ++v) {
    const auto idx = mesh.multi_index(v);
    std::vector<double> u(k);
    for (std::size_t a = 0; a < k; ++a) {
      const double h = entry.length[a] / resolution[a];
      u[a] = entry.lo[a] + (idx[a] + (entry.midpoint && !entry.periodic[a] ? 0.5 : 0.0)) * h;
    }
    const SpacePoint point(space, entry.lift(u));
    const auto ls = entry.left_derivatives(u);
    const Vector n = entry.normal(u);
    const auto dn = entry.normal_derivatives(u);

    Matrix tang(dm, static_cast<Index>(k));
    std::vector<Vector> l_coords;
    for (std::size_t a = 0; a < k; ++a) {
      l_coords.push_back(alg.coordinates(ls[a]));
      tang.col(static_cast<Index>(a)) = pair.m_coords.transpose() * l_coords.back();
    }
    const Matrix g = tang.transpose() * tang;

    // nabla_a N = P_m([L_a, N] + dN/du_a), then h_ab = -<nabla_a N, d_b>.
    const Vector n_alg = pair.m_coords * n;
    Matrix h(static_cast<Index>(k), static_cast<Index>(k));
    for (std::size_t a = 0; a < k; ++a) {
      const Vector nabla = pair.m_coords.transpose() * alg.bracket_coords(l_coords[a], n_alg) + dn[a];
      for (std::size_t b = 0; b < k; ++b) h(static_cast<Index>(a), static_cast<Index>(b)) = -nabla.dot(tang.col(static_cast<Index>(b)));
    }
    h = 0.5 * (h + h.transpose());

    // Orthonormal frame from the coordinate tangents; principal curvatures
    // are the eigenvalues of the shape operator in that frame.
    const Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) throw InvalidInput("build_hypersurface: degenerate parametrization");
    const Matrix lower = llt.matrixL();
    const Matrix frame = lower.triangularView<Eigen::Lower>().solve(tang.transpose()).transpose();
    const Matrix lower_inv = lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(g.rows(), g.cols()));
    const Matrix shape = lower_inv * h * lower_inv.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape, Eigen::EigenvaluesOnly);

    double ric = 0.0;
    for (Index i = 0; i < dm; ++i) ric += riemann_tensor(origin, frame_m.col(i), n, frame_m.col(i), n);

    double w = std::sqrt(g.determinant());
    for (std::size_t a = 0; a < k; ++a) w *= entry.length[a] / resolution[a];

    mesh.params.push_back(u);
    mesh.vertices.push_back(point);
    mesh.unit_normal.push_back(n);
    mesh.coordinate_tangents.push_back(tang);
    mesh.tangent_frame_sigma.push_back(frame);
    mesh.metric.push_back(g);
    mesh.second_form.push_back(h);
    mesh.metric_weights.push_back(w);
    mesh.shape_eigs.push_back(es.eigenvalues());
    mesh.A_norm_sq.push_back(es.eigenvalues().squaredNorm());
    mesh.ricci_N.push_back(ric);
  }
  return mesh;
}

inline HypersurfaceMesh build_hypersurface(const SpaceSpec& spec, const std::string& catalog_id,
                                           std::vector<int> resolution = {}) {
  return build_hypersurface(make_pair_ptr(spec), catalog_id, std::move(resolution));
}

struct MeshResiduals {
  double minimality = 0.0;     // max |trace S_N|
  double normal_norm = 0.0;    // max | |N| - 1 |
  double normal_tangent = 0.0; // max |<N, frame>|
  double area_rel = 0.0;       // |sum w - area| / area
};

inline MeshResiduals mesh_residuals(const HypersurfaceMesh& mesh) {
  MeshResiduals r;
  for (std::size_t v = 0; v < mesh.size(); ++v) {
    r.minimality = std::max(r.minimality, std::abs(mesh.shape_eigs[v].sum()));
    r.normal_norm = std::max(r.normal_norm, std::abs(mesh.unit_normal[v].norm() - 1.0));
    r.normal_tangent =
        std::max(r.normal_tangent, (mesh.tangent_frame_sigma[v].transpose() * mesh.unit_normal[v]).cwiseAbs().maxCoeff());
  }
  r.area_rel = std::abs(mesh.total_weight() - mesh.catalog_area) / mesh.catalog_area;
  return r;
}

struct GenericityResult {
  bool holds = false;
  double best_gap = 0.0;
  std::size_t witness_vertex = 0;
};

/// Whether some vertex has pairwise distinct principal curvatures (min gap
/// above 1e-6). With a single principal curvature the condition is vacuous.
inline GenericityResult genericity_check(const HypersurfaceMesh& mesh) {
  GenericityResult out;
  if (mesh.sigma_dim <= 1) {
    out.holds = true;
    out.best_gap = std::numeric_limits<double>::infinity();
    return out;
  }
  out.best_gap = -1.0;
  for (std::size_t v = 0; v < mesh.size(); ++v) {
    const Vector& e = mesh.shape_eigs[v];  // ascending
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i + 1 < e.size(); ++i) gap = std::min(gap, e(i + 1) - e(i));
    if (gap > out.best_gap) {
      out.best_gap = gap;
      out.witness_vertex = v;
    }
  }
  out.holds = out.best_gap > kGapTol;
  return out;
}

inline int center_dimension(const SymmetricPair& space) {
  return static_cast<int>(center_of_subalgebra(space.algebra, space.h_basis).size());
}

/// D = 2r - 3 + dim z(h).
inline int affine_constant_a(const SymmetricPair& space) {
  if (space.rank < 2) throw RankTooSmall("affine_constant_a: rank " + std::to_string(space.rank) + " < 2");
  return 2 * space.rank - 3 + center_dimension(space);
}

/// D = 1 + number of two-dimensional factors of a product of two spheres.
inline int affine_constant_b(const SymmetricPair& space) {
  const auto& s = space.spec;
  if (s.family != Family::product || s.factors.size() != 2) {
    throw InvalidInput("affine_constant_b: space must be a product of exactly two factors");
  }
  int two_dim = 0;
  for (const auto& f : s.factors) {
    if (f.family != Family::sphere || f.n < 3) {
      throw InvalidInput("affine_constant_b: factors must be spheres of dimension >= 2");
    }
    if (f.n == 3) ++two_dim;
  }
  return 1 + two_dim;
}

inline nlohmann::json HypersurfaceMesh::to_json() const {
  nlohmann::json j;
  j["space"] = space->family_tag;
  j["catalog_id"] = catalog_id;
  j["backend"] = to_string(backend);
  j["grid_shape"] = grid_shape;
  j["b1"] = b1;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (std::size_t v = 0; v < size(); ++v) {
    const Matrix& g = vertices[v].lift();
    std::vector<double> lift;
    for (Index r = 0; r < g.rows(); ++r) {
      for (Index c = 0; c < g.cols(); ++c) lift.push_back(g(r, c));
    }
    verts.push_back({{"u", params[v]},
                     {"lift", lift},
                     {"normal", std::vector<double>(unit_normal[v].data(), unit_normal[v].data() + unit_normal[v].size())},
                     {"shape_eigs", std::vector<double>(shape_eigs[v].data(), shape_eigs[v].data() + shape_eigs[v].size())},
                     {"weight", metric_weights[v]}});
  }
  return j;
}

inline std::string HypersurfaceMesh::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  const Index n = space->algebra.matrix_size();
  out << "vertex";
  for (int a = 0; a < sigma_dim; ++a) out << ",u" << a;
  for (Index i = 0; i < n * n; ++i) out << ",g" << i;
  for (Index i = 0; i < space->dim_M; ++i) out << ",N" << i;
  for (int a = 0; a < sigma_dim; ++a) out << ",kappa" << a;
  out << ",weight\n";
  for (std::size_t v = 0; v < size(); ++v) {
    out << v;
    for (double u : params[v]) out << ',' << u;
    const Matrix& g = vertices[v].lift();
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) out << ',' << g(r, c);
    }
    for (Index i = 0; i < unit_normal[v].size(); ++i) out << ',' << unit_normal[v](i);
    for (Index i = 0; i < shape_eigs[v].size(); ++i) out << ',' << shape_eigs[v](i);
    out << ',' << metric_weights[v] << '\n';
  }
  return out.str();
}

}  // namespace symvi
