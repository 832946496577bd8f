#pragma once

// The canonical virtual immersion Omega_0([g, X]) = Ad_g X of a symmetric
// space into its Lie algebra, its extrinsic invariants, and residual checks
// for the fundamental equations.
//
// Conventions. Tangent vectors at [g] are given by coordinates over the
// orthonormal basis of m; the coordinate vector X stands for the velocity of
// t -> [g exp(tX)]. Vectors of V = g are coordinates over the (orthonormal)
// algebra basis. Curvature follows R(X,Y)Z = [[X,Y],Z] and
// R(X,Y,Z,W) = <R(X,Y)Z, W>, so R(X,Y,X,Y) is the sectional curvature.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "symvi/symmetric_space.hpp"

namespace symvi {

inline constexpr double kNormalTol = 1e-8;

/// Omega at a point: Ad_g applied to sum X_i m_i.
inline AmbientVector omega(const SpacePoint& point, const Vector& x) {
  return {point.tangent_basis() * x, point};
}

/// Orthogonal decomposition v = v^T + v^perp with v^T in Ad_g m.
inline std::pair<AmbientVector, AmbientVector> split(const AmbientVector& v) {
  const Matrix& t = v.at.tangent_basis();
  const Matrix& n = v.at.normal_basis();
  return {AmbientVector{t * (t.transpose() * v.value), v.at}, AmbientVector{n * (n.transpose() * v.value), v.at}};
}

/// Tangent part of an ambient vector as m-coordinates.
inline Vector tangent_coords(const SpacePoint& point, const Vector& v) { return point.tangent_basis().transpose() * v; }

/// Ad_g^{-1} v in algebra coordinates.
inline Vector pull_back(const SpacePoint& point, const Vector& v) { return point.ad().transpose() * v; }

inline Vector m_to_algebra(const SymmetricPair& pair, const Vector& x) { return pair.m_coords * x; }

/// II([g,X],[g,Y]) = Ad_g [X, Y].
inline AmbientVector second_fundamental_form(const SpacePoint& point, const Vector& x, const Vector& y) {
  const auto& pair = point.pair();
  const Vector br = pair.algebra.bracket_coords(m_to_algebra(pair, x), m_to_algebra(pair, y));
  return {point.ad() * br, point};
}

namespace detail {

inline void require_normal(const AmbientVector& eta, const char* who) {
  const Vector tang = tangent_coords(eta.at, eta.value);
  if (tang.norm() > kNormalTol * std::max(1.0, eta.value.norm())) {
    throw InvalidInput(std::string(who) + ": vector is not normal at the point");
  }
}

}  // namespace detail

/// S_eta(X) = -Ad_g [X, Ad_g^{-1} eta].
inline AmbientVector shape_operator(const SpacePoint& point, const AmbientVector& eta, const Vector& x) {
  detail::require_normal(eta, "shape_operator");
  const auto& pair = point.pair();
  const Vector br = pair.algebra.bracket_coords(m_to_algebra(pair, x), pull_back(point, eta.value));
  return {-(point.ad() * br), point};
}

/// Matrix of S_eta on m-coordinates (column j is S_eta(m_j)).
inline Matrix shape_operator_matrix(const SpacePoint& point, const AmbientVector& eta) {
  const auto dm = point.pair().dim_M;
  Matrix s(dm, dm);
  for (Index j = 0; j < dm; ++j) s.col(j) = tangent_coords(point, shape_operator(point, eta, Vector::Unit(dm, j)).value);
  return s;
}

/// R(X,Y,Z,W) through the Gauss form <II(X,Y), II(Z,W)>.
inline double curvature(const SpacePoint& point, const Vector& x, const Vector& y, const Vector& z, const Vector& w) {
  return second_fundamental_form(point, x, y).value.dot(second_fundamental_form(point, z, w).value);
}

/// R(X,Y)Z = [[X,Y],Z] evaluated with matrix brackets of the Omega images,
/// an independent route to the curvature tensor. Returns m-coordinates.
inline Vector riemann_vector(const SpacePoint& point, const Vector& x, const Vector& y, const Vector& z) {
  const auto& alg = point.pair().algebra;
  const Matrix ox = omega(point, x).matrix();
  const Matrix oy = omega(point, y).matrix();
  const Matrix oz = omega(point, z).matrix();
  const Matrix r = bracket(bracket(ox, oy), oz);
  return tangent_coords(point, alg.coordinates(r));
}

inline double riemann_tensor(const SpacePoint& point, const Vector& x, const Vector& y, const Vector& z,
                             const Vector& w) {
  return riemann_vector(point, x, y, z).dot(w);
}

/// R^perp(X,Y) eta = Ad_g [[X,Y], Ad_g^{-1} eta].
inline AmbientVector normal_curvature(const SpacePoint& point, const Vector& x, const Vector& y,
                                      const AmbientVector& eta) {
  detail::require_normal(eta, "normal_curvature");
  const auto& pair = point.pair();
  const auto& alg = pair.algebra;
  const Vector xy = alg.bracket_coords(m_to_algebra(pair, x), m_to_algebra(pair, y));
  return {point.ad() * alg.bracket_coords(xy, pull_back(point, eta.value)), point};
}

/// The ACS quantity, transcribed term by term. `frame` holds orthonormal
/// m-coordinate vectors as columns (defaults to the standard frame).
inline double acs(const SpacePoint& point, const Vector& x, const Vector& y, const Matrix& frame) {
  auto trace_term = [&](const Vector& v) {
    double s = 0.0;
    for (Index k = 0; k < frame.cols(); ++k) {
      const Vector e = frame.col(k);
      s += second_fundamental_form(point, e, v).value.squaredNorm() - riemann_tensor(point, e, v, e, v);
    }
    return s;
  };
  const double mixed = second_fundamental_form(point, x, y).value.squaredNorm() - riemann_tensor(point, x, y, x, y);
  return y.squaredNorm() * trace_term(x) + x.squaredNorm() * trace_term(y) - mixed -
         second_fundamental_form(point, y, y).value.squaredNorm();
}

inline double acs(const SpacePoint& point, const Vector& x, const Vector& y) {
  const auto dm = point.pair().dim_M;
  return acs(point, x, y, Matrix::Identity(dm, dm));
}

/// Wedge products over an orthonormal basis theta_i of V, indexed by i < j.
struct ImmersionContext {
  PairPtr pair;
  Index d = 0;
  std::vector<std::pair<Index, Index>> wedge_basis;

  explicit ImmersionContext(PairPtr p) : pair(std::move(p)), d(pair->d()) {
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) wedge_basis.emplace_back(i, j);
    }
  }

  Index binom() const { return static_cast<Index>(wedge_basis.size()); }

  /// <a ^ b, theta_i ^ theta_j> = a_i b_j - a_j b_i for every i < j.
  Vector wedge_coordinates(const Vector& a, const Vector& b) const {
    Vector out(binom());
    for (std::size_t k = 0; k < wedge_basis.size(); ++k) {
      const auto [i, j] = wedge_basis[k];
      out(static_cast<Index>(k)) = a(i) * b(j) - a(j) * b(i);
    }
    return out;
  }

  /// <a ^ b, c ^ e> = <a,c><b,e> - <a,e><b,c>.
  static double wedge_inner(const Vector& a, const Vector& b, const Vector& c, const Vector& e) {
    return a.dot(c) * b.dot(e) - a.dot(e) * b.dot(c);
  }
};

// ---------------------------------------------------------------------------
// Residual verification

struct IdentityResidual {
  std::string kind = "algebraic";  // "algebraic" or "finite_difference"
  double max_residual = 0.0;
  int n_samples = 0;
  double fd_step = 0.0;
  /// Finite-difference identities: residual at fd_step / 2, their ratio and
  /// the constant C = max_residual / fd_step^2.
  double half_step_residual = 0.0;
  double ratio = 0.0;
  double constant = 0.0;
  bool exact = false;
  bool pass = false;
};

inline constexpr double kAlgebraicTol = 1e-10;
inline constexpr double kRatioLo = 3.5;
inline constexpr double kRatioHi = 4.5;
/// Finite-difference residuals below this are round-off; the identity then
/// holds exactly and no convergence ratio is measured.
inline constexpr double kExactFloor = 1e-11;

struct ResidualReport {
  std::string space;
  std::map<std::string, IdentityResidual> identities;

  bool all_pass() const {
    return std::all_of(identities.begin(), identities.end(), [](const auto& kv) { return kv.second.pass; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, r] : identities) {
      nlohmann::json e = {{"kind", r.kind}, {"max_residual", r.max_residual}, {"n_samples", r.n_samples},
                          {"fd_step", r.fd_step}, {"pass", r.pass}};
      if (r.kind == "finite_difference") {
        e["half_step_residual"] = r.half_step_residual;
        e["ratio"] = r.ratio;
        e["constant"] = r.constant;
        e["exact"] = r.exact;
      }
      j[name] = e;
    }
    return j;
  }
};

namespace detail {

inline Vector random_unit(Rng& rng, Index n) {
  Vector v = gaussian_vector(rng, n);
  return v / v.norm();
}

/// Velocity field data along the curve k(t) = g exp(tX): Omega of the field
/// [k(t), Y(t)] for a polynomial Y(t) = sum_p t^p Y_p in m.
struct CurveField {
  std::vector<Vector> coeffs;  // m-coordinates
  Vector at(double t) const {
    Vector y = Vector::Zero(coeffs.front().size());
    double tp = 1.0;
    for (const auto& c : coeffs) {
      y += tp * c;
      tp *= t;
    }
    return y;
  }
};

class GeodesicProbe {
 public:
  GeodesicProbe(const PairPtr& pair, const Matrix& g, const Vector& x)
      : pair_(pair), g_(g), xm_(pair->m_matrix(x)) {}

  SpacePoint point(double t) const { return SpacePoint(pair_, g_ * exp_matrix(t * xm_)); }

  /// Covariant derivative nabla_X Y at t = 0: tangent part of the central
  /// difference of Omega(Y(t)).
  Vector covariant(const CurveField& y, double h) const {
    const SpacePoint p0 = point(0.0);
    const Vector plus = omega(point(h), y.at(h)).value;
    const Vector minus = omega(point(-h), y.at(-h)).value;
    return tangent_coords(p0, (plus - minus) / (2.0 * h));
  }

 private:
  PairPtr pair_;
  Matrix g_;
  Matrix xm_;
};

inline void finish_fd(IdentityResidual& r, double full, double half, double h) {
  r.kind = "finite_difference";
  r.max_residual = full;
  r.half_step_residual = half;
  r.fd_step = h;
  r.constant = full / (h * h);
  r.exact = full < kExactFloor && half < kExactFloor;
  r.ratio = half > 0.0 ? full / half : 0.0;
  r.pass = r.exact || (r.ratio > kRatioLo && r.ratio < kRatioHi);
}

}  // namespace detail

/// Max residuals of the defining conditions and the fundamental equations over
/// random samples. Algebraic identities must stay below 1e-10; identities that
/// need derivatives use central differences and must converge at second
/// order (residual ratio in (3.5, 4.5) when fd_step is halved).
inline ResidualReport verify_fundamental(const PairPtr& pair, int n_samples, double fd_step) {
  if (n_samples < 1) throw InvalidInput("verify_fundamental: n_samples must be >= 1");
  if (!(fd_step > 0.0)) throw InvalidInput("verify_fundamental: fd_step must be positive");
  using detail::random_unit;

  ResidualReport report;
  report.space = pair->family_tag;
  const Index dm = pair->dim_M;
  const Index dh = static_cast<Index>(pair->h_basis.size());
  const auto& alg = pair->algebra;
  Rng rng = make_rng(0x56455249ULL);

  std::map<std::string, double> alg_max;
  for (const char* name : {"isometry", "weingarten", "gauss", "ricci", "ii_skew", "ii_normal", "sectional_gauss",
                           "bianchi_cyclic", "curvature_ad_invariance"}) {
    alg_max[name] = 0.0;
  }
  double tangency[2] = {0.0, 0.0}, codazzi[2] = {0.0, 0.0}, parallel_r[2] = {0.0, 0.0};
  const double steps[2] = {fd_step, fd_step / 2.0};
  const SpacePoint identity = base_point(pair);

  for (int s = 0; s < n_samples; ++s) {
    const SpacePoint p = random_point(pair, rng);
    const Vector x = random_unit(rng, dm), y = random_unit(rng, dm), z = random_unit(rng, dm),
                 w = random_unit(rng, dm);

    // Isometry: <Omega X, Omega Y> = <X, Y>.
    alg_max["isometry"] =
        std::max({alg_max["isometry"], std::abs(omega(p, x).value.dot(omega(p, y).value) - x.dot(y)),
                  std::abs(omega(p, x).value.squaredNorm() - 1.0)});

    const Vector ii_xy = second_fundamental_form(p, x, y).value;
    const Vector ii_yx = second_fundamental_form(p, y, x).value;
    alg_max["ii_skew"] = std::max(alg_max["ii_skew"], (ii_xy + ii_yx).norm());
    alg_max["ii_normal"] = std::max(alg_max["ii_normal"], tangent_coords(p, ii_xy).norm());

    // Gauss: R(X,Y,Z,W) = <II(Y,W),II(X,Z)> - <II(X,W),II(Y,Z)>, with R from
    // the bracket route.
    const double r_xyzw = riemann_tensor(p, x, y, z, w);
    const double gauss_rhs = curvature(p, y, w, x, z) - curvature(p, x, w, y, z);
    alg_max["gauss"] = std::max(alg_max["gauss"], std::abs(r_xyzw - gauss_rhs));
    alg_max["sectional_gauss"] =
        std::max(alg_max["sectional_gauss"], std::abs(riemann_tensor(p, x, y, x, y) - ii_xy.squaredNorm()));
    alg_max["bianchi_cyclic"] = std::max(
        alg_max["bianchi_cyclic"],
        std::abs(curvature(p, x, y, z, w) + curvature(p, y, z, x, w) + curvature(p, z, x, y, w)));
    alg_max["curvature_ad_invariance"] = std::max(alg_max["curvature_ad_invariance"],
                                                  std::abs(curvature(p, x, y, z, w) - curvature(identity, x, y, z, w)));

    if (dh > 0) {
      const AmbientVector eta{p.normal_basis() * random_unit(rng, dh), p};
      // Weingarten: <S_eta X, Y> = <II(X,Y), eta>.
      alg_max["weingarten"] = std::max(
          alg_max["weingarten"], std::abs(shape_operator(p, eta, x).value.dot(omega(p, y).value) - ii_xy.dot(eta.value)));
      // Ricci, as a vector identity over a normal frame:
      // <R^perp(X,Y) eta, zeta_k> = -<(S_eta^t S_zeta_k - S_zeta_k^t S_eta) X, Y>.
      const Matrix s_eta = shape_operator_matrix(p, eta);
      const AmbientVector rperp = normal_curvature(p, x, y, eta);
      Vector from_shape = Vector::Zero(alg.dim());
      for (Index k = 0; k < dh; ++k) {
        const AmbientVector zk{p.normal_basis().col(k), p};
        const Matrix s_z = shape_operator_matrix(p, zk);
        const double c = -((s_eta.transpose() * s_z - s_z.transpose() * s_eta) * x).dot(y);
        from_shape += c * zk.value;
      }
      alg_max["ricci"] = std::max(alg_max["ricci"], (rperp.value - from_shape).norm());
    }

    // Finite differences, identical samples at both step sizes.
    const Vector y1 = random_unit(rng, dm), z1 = random_unit(rng, dm), w1 = random_unit(rng, dm),
                 t1 = random_unit(rng, dm), y2 = random_unit(rng, dm), t0 = random_unit(rng, dm);
    const double s0 = uniform(rng, 0.3, 1.0), tt0 = uniform(rng, 0.3, 1.0);
    const Matrix xm = pair->m_matrix(x), ym = pair->m_matrix(y);
    for (int k = 0; k < 2; ++k) {
      const double h = steps[k];

      // Condition (b): d Omega(d_s, d_t) is normal, in the chart
      // (s, t) -> [g exp(sX) exp(tY)] around (s0, t0).
      {
        auto lift = [&](double ss, double tt) { return Matrix(p.lift() * exp_matrix(ss * xm) * exp_matrix(tt * ym)); };
        auto omega_dt = [&](double ss, double tt) {
          return Vector(SpacePoint(pair, lift(ss, tt)).ad() * (pair->m_coords * y));
        };
        auto omega_ds = [&](double ss, double tt) {
          // Velocity of s -> [k exp(s Ad_{exp(-tY)} X)]: its m-part.
          const Matrix e = exp_matrix(-tt * ym);
          const Vector xs = pair->m_coords.transpose() * alg.coordinates(e * xm * e.transpose());
          return Vector(SpacePoint(pair, lift(ss, tt)).ad() * (pair->m_coords * xs));
        };
        const Vector d_omega = (omega_dt(s0 + h, tt0) - omega_dt(s0 - h, tt0)) / (2.0 * h) -
                               (omega_ds(s0, tt0 + h) - omega_ds(s0, tt0 - h)) / (2.0 * h);
        const SpacePoint k0(pair, lift(s0, tt0));
        tangency[k] = std::max(tangency[k], tangent_coords(k0, d_omega).norm());
      }

      const detail::GeodesicProbe probe(pair, p.lift(), x);

      // Codazzi in the form (D_X II)(Y,Z) = -R(Y,Z)X with non-parallel fields.
      {
        const detail::CurveField yf{{y, y1}}, zf{{z, z1}};
        auto ii_at = [&](double t) {
          return second_fundamental_form(probe.point(t), yf.at(t), zf.at(t)).value;
        };
        const Vector d_ii = (ii_at(h) - ii_at(-h)) / (2.0 * h);
        const Vector ny = probe.covariant(yf, h), nz = probe.covariant(zf, h);
        const Vector lhs = d_ii - second_fundamental_form(p, ny, z).value - second_fundamental_form(p, y, nz).value;
        const Vector rhs = -omega(p, riemann_vector(p, y, z, x)).value;
        codazzi[k] = std::max(codazzi[k], (lhs - rhs).norm());
      }

      // nabla R = 0 by differencing R(Y,Z,W,T) along the geodesic.
      {
        const detail::CurveField yf{{y, y1, y2}}, zf{{z, z1}}, wf{{w, w1}}, tf{{t0, t1}};
        auto r_at = [&](double t) {
          return curvature(probe.point(t), yf.at(t), zf.at(t), wf.at(t), tf.at(t));
        };
        const double dr = (r_at(h) - r_at(-h)) / (2.0 * h);
        const Vector ny = probe.covariant(yf, h), nz = probe.covariant(zf, h), nw = probe.covariant(wf, h),
                     nt = probe.covariant(tf, h);
        const double nabla_r = dr - curvature(p, ny, z, w, t0) - curvature(p, y, nz, w, t0) -
                               curvature(p, y, z, nw, t0) - curvature(p, y, z, w, nt);
        parallel_r[k] = std::max(parallel_r[k], std::abs(nabla_r));
      }
    }
  }

  for (const auto& [name, v] : alg_max) {
    IdentityResidual r;
    r.max_residual = v;
    r.n_samples = n_samples;
    r.pass = v < kAlgebraicTol;
    report.identities[name] = r;
  }
  auto fd = [&](const char* name, const double (&res)[2]) {
    IdentityResidual r;
    r.n_samples = n_samples;
    detail::finish_fd(r, res[0], res[1], fd_step);
    report.identities[name] = r;
  };
  fd("domega_tangency", tangency);
  fd("codazzi", codazzi);
  fd("parallel_curvature", parallel_r);
  return report;
}

/// Max |ACS(x, y)| over random orthonormal pairs at random points.
inline double sample_acs(const PairPtr& pair, int n_samples, std::uint64_t salt = 0x414353ULL) {
  Rng rng = make_rng(salt);
  const Index dm = pair->dim_M;
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const SpacePoint p = random_point(pair, rng);
    Vector x = detail::random_unit(rng, dm);
    Vector y = Vector::Zero(dm);
    if (dm >= 2) {
      y = gaussian_vector(rng, dm);
      y -= y.dot(x) * x;
      y.normalize();
    }
    worst = std::max(worst, std::abs(acs(p, x, y)));
  }
  return worst;
}

}  // namespace symvi
