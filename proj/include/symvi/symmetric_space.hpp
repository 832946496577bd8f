#pragma once

// Catalog symmetric pairs (g, h, m), metric calibration and points of G/H
// represented by coset lifts.

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "symvi/lie_core.hpp"
#include "symvi/random.hpp"

namespace symvi {

enum class Family { sphere, flat_torus, product };

/// Catalog identifier with parameters. sphere(n) is S^{n-1} = SO(n)/SO(n-1);
/// flat_torus(n) is (R/2piZ)^n acting on itself; product(a, b, ...) is the
/// Riemannian product.
struct SpaceSpec {
  Family family = Family::sphere;
  int n = 0;
  std::vector<SpaceSpec> factors;

  static SpaceSpec sphere(int n) { return {Family::sphere, n, {}}; }
  static SpaceSpec flat_torus(int n) { return {Family::flat_torus, n, {}}; }
  static SpaceSpec product(SpaceSpec a, SpaceSpec b) { return {Family::product, 0, {std::move(a), std::move(b)}}; }

  std::string tag() const {
    switch (family) {
      case Family::sphere: return "sphere(" + std::to_string(n) + ")";
      case Family::flat_torus: return "flat_torus(" + std::to_string(n) + ")";
      case Family::product: {
        std::string s = "product(";
        for (std::size_t i = 0; i < factors.size(); ++i) s += (i ? "," : "") + factors[i].tag();
        return s + ")";
      }
    }
    return {};
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (family) {
      case Family::sphere: j = {{"family", "sphere"}, {"n", n}}; break;
      case Family::flat_torus: j = {{"family", "flat_torus"}, {"n", n}}; break;
      case Family::product: {
        j["family"] = "product";
        j["factors"] = nlohmann::json::array();
        for (const auto& f : factors) j["factors"].push_back(f.to_json());
        break;
      }
    }
    return j;
  }

  static SpaceSpec from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
      throw InvalidInput("space spec: expected an object with a string \"family\"");
    }
    const auto family = j["family"].get<std::string>();
    if (family == "sphere" || family == "flat_torus") {
      if (!j.contains("n") || !j["n"].is_number_integer()) {
        throw InvalidInput("space spec: \"" + family + "\" requires integer \"n\"");
      }
      const int n = j["n"].get<int>();
      return family == "sphere" ? sphere(n) : flat_torus(n);
    }
    if (family == "product") {
      if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].size() < 2) {
        throw InvalidInput("space spec: \"product\" requires at least two \"factors\"");
      }
      SpaceSpec s{Family::product, 0, {}};
      for (const auto& f : j["factors"]) s.factors.push_back(from_json(f));
      return s;
    }
    throw UnsupportedSpace("space spec: unknown family \"" + family + "\"");
  }

  /// Accepts inline JSON or a path to a JSON file.
  static SpaceSpec parse(const std::string& text_or_path) {
    std::string text = text_or_path;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::ifstream in(text_or_path);
      if (!in) throw InvalidInput("space spec: cannot open \"" + text_or_path + "\"");
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("space spec: ") + e.what());
    }
    return from_json(j);
  }
};

/// Position of one irreducible (or flat) factor inside the product data.
struct FactorInfo {
  Family family = Family::sphere;
  int n = 0;
  Index matrix_offset = 0, matrix_size = 0;
  Index m_offset = 0, m_dim = 0;
  Index h_offset = 0, h_dim = 0;
  /// Sectional curvature of the target geometry (unit spheres 1, flat 0).
  double target_curvature = 0.0;
  /// Base point p0 of the factor's linear model, used for the isometry
  /// calibration: e_1 for spheres, (1,0,1,0,...) for the circles of a torus.
  Vector base_point;
};

struct SymmetricPair {
  LieAlgebraData algebra;
  std::vector<Matrix> h_basis;
  std::vector<Matrix> m_basis;
  int dim_M = 0;
  int rank = 0;
  std::string family_tag;
  SpaceSpec spec;
  std::vector<FactorInfo> factors;
  /// Coordinates of m_basis / h_basis over algebra.basis() (columns).
  Matrix m_coords;
  Matrix h_coords;

  Index d() const { return algebra.dim(); }
  Matrix m_matrix(const Vector& x) const {
    Matrix out = Matrix::Zero(algebra.matrix_size(), algebra.matrix_size());
    for (Index i = 0; i < x.size(); ++i) out += x(i) * m_basis[static_cast<std::size_t>(i)];
    return out;
  }
};

using PairPtr = std::shared_ptr<const SymmetricPair>;

namespace detail {

struct RawFactor {
  FactorInfo info;
  std::vector<Matrix> basis;  // full g basis in factor-local matrices
  std::vector<Matrix> m, h;
  bool abelian = false;
};

inline RawFactor raw_factor(const SpaceSpec& s) {
  RawFactor f;
  f.info.family = s.family;
  f.info.n = s.n;
  if (s.family == Family::sphere) {
    if (s.n < 2) throw InvalidInput("sphere(n) requires n >= 2");
    const Index n = s.n;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        Matrix e = elementary_skew(n, i, j);
        f.basis.push_back(e);
        (i == 0 ? f.m : f.h).push_back(e);
      }
    }
    f.info.matrix_size = n;
    f.info.target_curvature = n >= 3 ? 1.0 : 0.0;
    f.info.base_point = Vector::Unit(n, 0);
  } else if (s.family == Family::flat_torus) {
    if (s.n < 1) throw InvalidInput("flat_torus(n) requires n >= 1");
    const Index n = 2 * static_cast<Index>(s.n);
    f.info.base_point = Vector::Zero(n);
    for (Index k = 0; k < s.n; ++k) {
      Matrix j = elementary_skew(n, 2 * k + 1, 2 * k);
      f.basis.push_back(j);
      f.m.push_back(j);
      f.info.base_point(2 * k) = 1.0;
    }
    f.info.matrix_size = n;
    f.info.target_curvature = 0.0;
    f.abelian = true;
  } else {
    throw UnsupportedSpace("raw_factor: products are flattened before this point");
  }
  f.info.m_dim = static_cast<Index>(f.m.size());
  f.info.h_dim = static_cast<Index>(f.h.size());
  return f;
}

inline void flatten(const SpaceSpec& s, std::vector<SpaceSpec>& out) {
  if (s.family == Family::product) {
    if (s.factors.size() < 2) throw InvalidInput("product requires at least two factors");
    for (const auto& f : s.factors) flatten(f, out);
  } else {
    out.push_back(s);
  }
}

inline Matrix embed(const Matrix& local, Index offset, Index total) {
  Matrix out = Matrix::Zero(total, total);
  out.block(offset, offset, local.rows(), local.cols()) = local;
  return out;
}

/// Scale that makes the factor's metric match its target geometry, computed
/// from the base form alone so that repeated calibration is idempotent.
inline double calibrate_factor(const FormBlock& blk, const FactorInfo& info,
                               const std::vector<Matrix>& m_global) {
  // Base form of this block only (scale 1).
  auto base = [&](const Matrix& a, const Matrix& b) {
    const auto ab = a.block(blk.offset, blk.offset, blk.size, blk.size);
    const auto bb = b.block(blk.offset, blk.offset, blk.size, blk.size);
    return blk.base_weight() * -(ab * bb).trace();
  };
  const auto m0 = static_cast<std::size_t>(info.m_offset);
  const auto md = static_cast<std::size_t>(info.m_dim);
  if (md == 0) throw CalibrationFailure("factor has a zero-dimensional tangent space");

  // Isometry condition: |X p0| (speed of the one-parameter orbit) equals the
  // form norm of X.
  const Matrix& x0 = m_global[m0];
  const Vector p0 = info.base_point;
  const Matrix xl = x0.block(blk.offset, blk.offset, blk.size, blk.size);
  const double speed2 = (xl * p0).squaredNorm();
  const double base2 = base(x0, x0);
  if (speed2 <= 0.0 || base2 <= 0.0) throw CalibrationFailure("degenerate tangent generator");
  const double lambda_isometry = speed2 / base2;

  // Largest sectional curvature K_1 of coordinate planes at scale 1; the
  // curvature at scale lambda is K_1 / lambda.
  double k1 = 0.0;
  for (std::size_t a = 0; a < md; ++a) {
    for (std::size_t b = a + 1; b < md; ++b) {
      const Matrix& x = m_global[m0 + a];
      const Matrix& y = m_global[m0 + b];
      const double area = base(x, x) * base(y, y) - base(x, y) * base(x, y);
      const Matrix br = x * y - y * x;
      k1 = std::max(k1, base(br, br) / area);
    }
  }
  if (info.target_curvature > 0.0) {
    if (k1 <= kRankTol) throw CalibrationFailure("curved target but the pair is flat");
    const double lambda = k1 / info.target_curvature;
    if (std::abs(lambda - lambda_isometry) > 1e-12 * lambda) {
      throw CalibrationFailure("curvature and isometry calibrations disagree");
    }
    return lambda;
  }
  if (k1 > kRankTol) throw CalibrationFailure("flat target but the pair has curvature");
  return lambda_isometry;
}

inline std::vector<Matrix> normalized(const LieAlgebraData& alg, const std::vector<Matrix>& v) {
  std::vector<Matrix> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x / alg.norm(x));
  return out;
}

inline Matrix coords_of(const LieAlgebraData& alg, const std::vector<Matrix>& v) {
  Matrix c(alg.dim(), static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) c.col(static_cast<Index>(i)) = alg.coordinates(v[i]);
  return c;
}

}  // namespace detail

/// Per-factor scales lambda such that the calibrated immersion has the target
/// geometry: sectional curvature 1 for spheres of dimension >= 2, unit-speed
/// isometry for circles and flat tori.
inline std::vector<double> calibrate_scale(const SymmetricPair& pair) {
  std::vector<double> out;
  const auto& blocks = pair.algebra.blocks();
  for (std::size_t i = 0; i < pair.factors.size(); ++i) {
    out.push_back(detail::calibrate_factor(blocks[i], pair.factors[i], pair.m_basis));
  }
  return out;
}

inline int rank_of(const SymmetricPair& pair);

inline SymmetricPair build_space(const SpaceSpec& spec) {
  std::vector<SpaceSpec> leaves;
  detail::flatten(spec, leaves);
  std::vector<detail::RawFactor> raws;
  Index total = 0;
  for (const auto& leaf : leaves) {
    raws.push_back(detail::raw_factor(leaf));
    total += raws.back().info.matrix_size;
  }

  SymmetricPair pair;
  pair.spec = spec;
  pair.family_tag = spec.tag();
  std::vector<Matrix> basis, m, h;
  std::vector<FormBlock> blocks;
  Index offset = 0;
  for (auto& rf : raws) {
    rf.info.matrix_offset = offset;
    rf.info.m_offset = static_cast<Index>(m.size());
    rf.info.h_offset = static_cast<Index>(h.size());
    for (const auto& b : rf.basis) basis.push_back(detail::embed(b, offset, total));
    for (const auto& b : rf.m) m.push_back(detail::embed(b, offset, total));
    for (const auto& b : rf.h) h.push_back(detail::embed(b, offset, total));
    blocks.push_back(FormBlock{offset, rf.info.matrix_size, 1.0, rf.abelian});
    pair.factors.push_back(rf.info);
    offset += rf.info.matrix_size;
  }

  // Provisional pair at scale 1, then calibrate and normalize.
  pair.algebra = LieAlgebraData(basis, blocks);
  pair.m_basis = m;
  pair.h_basis = h;
  const auto scales = calibrate_scale(pair);
  const LieAlgebraData scaled = pair.algebra.with_scales(scales);
  pair.algebra = LieAlgebraData(detail::normalized(scaled, basis), scaled.blocks());
  pair.m_basis = detail::normalized(pair.algebra, m);
  pair.h_basis = detail::normalized(pair.algebra, h);
  pair.m_coords = detail::coords_of(pair.algebra, pair.m_basis);
  pair.h_coords = detail::coords_of(pair.algebra, pair.h_basis);
  pair.dim_M = static_cast<int>(pair.m_basis.size());
  pair.rank = rank_of(pair);
  return pair;
}

/// Residuals of the Cartan relations and of the orthogonal splitting.
struct CartanResiduals {
  double orthogonality = 0.0;   // max |<h_i, m_j>|
  double dimension_gap = 0.0;   // |dim h + dim m - dim g|
  double mm_in_h = 0.0;         // [m, m] outside h
  double hm_in_m = 0.0;         // [h, m] outside m
  double hh_in_h = 0.0;         // [h, h] outside h
  Index span_mm_rank = 0;       // dim span [m, m]

  double max() const { return std::max({orthogonality, dimension_gap, mm_in_h, hm_in_m, hh_in_h}); }
};

inline CartanResiduals cartan_residuals(const SymmetricPair& pair) {
  const auto& alg = pair.algebra;
  CartanResiduals r;
  for (const auto& x : pair.h_basis) {
    for (const auto& y : pair.m_basis) r.orthogonality = std::max(r.orthogonality, std::abs(alg.form(x, y)));
  }
  r.dimension_gap = std::abs(static_cast<double>(pair.h_basis.size() + pair.m_basis.size()) -
                             static_cast<double>(alg.dim()));
  auto outside = [&](const Matrix& v, const std::vector<Matrix>& sub) {
    Matrix res = v;
    for (const auto& q : sub) res -= alg.form(q, v) * q;
    return alg.norm(res);
  };
  std::vector<Matrix> mm;
  for (std::size_t i = 0; i < pair.m_basis.size(); ++i) {
    for (std::size_t j = i + 1; j < pair.m_basis.size(); ++j) {
      const Matrix b = bracket(pair.m_basis[i], pair.m_basis[j]);
      r.mm_in_h = std::max(r.mm_in_h, outside(b, pair.h_basis));
      mm.push_back(b);
    }
  }
  for (const auto& x : pair.h_basis) {
    for (const auto& y : pair.m_basis) r.hm_in_m = std::max(r.hm_in_m, outside(bracket(x, y), pair.m_basis));
    for (const auto& y : pair.h_basis) r.hh_in_h = std::max(r.hh_in_h, outside(bracket(x, y), pair.h_basis));
  }
  r.span_mm_rank = static_cast<Index>(orthonormalize(alg, mm).size());
  return r;
}

/// Dimension of a maximal abelian subspace of m. Greedy: start from a random
/// X in m and repeatedly add a random direction of m that commutes with, and
/// is orthogonal to, everything chosen so far. Best of 20 seeded restarts.
inline int rank_of(const SymmetricPair& pair) {
  const auto dm = static_cast<Index>(pair.m_basis.size());
  if (dm == 0) return 0;
  const Index n = pair.algebra.matrix_size();
  const Index n2 = n * n;
  int best = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(0x52414e4bULL + seed);
    std::vector<Matrix> chosen;
    chosen.push_back(pair.m_matrix(gaussian_vector(rng, dm)));
    for (;;) {
      const auto na = static_cast<Index>(chosen.size());
      Matrix constraints(na * n2 + na, dm);
      for (Index i = 0; i < dm; ++i) {
        const Matrix& mi = pair.m_basis[static_cast<std::size_t>(i)];
        for (Index a = 0; a < na; ++a) {
          const Matrix b = bracket(mi, chosen[static_cast<std::size_t>(a)]);
          constraints.block(a * n2, i, n2, 1) = Eigen::Map<const Vector>(b.data(), n2);
          constraints(na * n2 + a, i) = pair.algebra.form(mi, chosen[static_cast<std::size_t>(a)]);
        }
      }
      Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      const double smax = sv.size() > 0 ? sv(0) : 0.0;
      std::vector<Index> kernel;
      for (Index c = 0; c < dm; ++c) {
        const double s = c < sv.size() ? sv(c) : 0.0;
        if (s <= kRankTol * std::max(smax, 1.0)) kernel.push_back(c);
      }
      if (kernel.empty()) break;
      Vector y = Vector::Zero(dm);
      for (Index c : kernel) y += uniform(rng, -1.0, 1.0) * svd.matrixV().col(c);
      chosen.push_back(pair.m_matrix(y));
    }
    best = std::max(best, static_cast<int>(chosen.size()));
  }
  return best;
}

/// A point [g] of M = G/H, stored through an orthogonal lift g. Cheap to copy;
/// the lift and its adjoint matrix are shared and immutable.
class SpacePoint {
 public:
  SpacePoint() = default;

  SpacePoint(PairPtr pair, const Matrix& lift) {
    if (!pair) throw InvalidInput("SpacePoint: null pair");
    const Index n = pair->algebra.matrix_size();
    if (lift.rows() != n || lift.cols() != n) throw InvalidInput("SpacePoint: lift has the wrong size");
    auto impl = std::make_shared<Impl>();
    impl->lift = nearest_orthogonal(lift);
    const auto& alg = pair->algebra;
    const Index d = alg.dim();
    impl->ad.resize(d, d);
    for (Index j = 0; j < d; ++j) {
      impl->ad.col(j) = alg.coordinates(impl->lift * alg.basis()[static_cast<std::size_t>(j)] * impl->lift.transpose());
    }
    impl->tangent = impl->ad * pair->m_coords;
    impl->normal = impl->ad * pair->h_coords;
    impl->pair = std::move(pair);
    impl_ = std::move(impl);
  }

  const SymmetricPair& pair() const { return *impl_->pair; }
  const PairPtr& pair_ptr() const { return impl_->pair; }
  const Matrix& lift() const { return impl_->lift; }
  /// Matrix of Ad_g on coordinates over the algebra basis.
  const Matrix& ad() const { return impl_->ad; }
  /// Columns: coordinates of Ad_g m_i (orthonormal tangent frame in V).
  const Matrix& tangent_basis() const { return impl_->tangent; }
  /// Columns: coordinates of Ad_g h_i (orthonormal normal frame in V).
  const Matrix& normal_basis() const { return impl_->normal; }

 private:
  struct Impl {
    PairPtr pair;
    Matrix lift, ad, tangent, normal;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Element of V = g attached to a point, in coordinates over the algebra basis.
struct AmbientVector {
  Vector value;
  SpacePoint at;

  Matrix matrix() const { return at.pair().algebra.from_coordinates(value); }
  double norm() const { return std::sqrt(std::max(0.0, at.pair().algebra.inner_coords(value, value))); }
};

inline SpacePoint base_point(const PairPtr& pair) {
  return SpacePoint(pair, Matrix::Identity(pair->algebra.matrix_size(), pair->algebra.matrix_size()));
}

/// Random point exp(X) with X Gaussian in g.
inline SpacePoint random_point(const PairPtr& pair, Rng& rng, double spread = 2.0) {
  const Vector c = spread * gaussian_vector(rng, pair->d());
  return SpacePoint(pair, exp_matrix(pair->algebra.from_coordinates(c)));
}

/// Random element exp(Y) of H with Y Gaussian in h.
inline Matrix random_isotropy_element(const SymmetricPair& pair, Rng& rng) {
  const Index n = pair.algebra.matrix_size();
  Matrix y = Matrix::Zero(n, n);
  for (const auto& hb : pair.h_basis) y += 2.0 * gaussian_vector(rng, 1)(0) * hb;
  return exp_matrix(y);
}

inline std::vector<AmbientVector> tangent_frame(const SpacePoint& point) {
  std::vector<AmbientVector> out;
  for (Index i = 0; i < point.tangent_basis().cols(); ++i) out.push_back({point.tangent_basis().col(i), point});
  return out;
}

/// p v^T - v p^T, the wedge realization of so(n).
inline Matrix wedge_matrix(const Vector& p, const Vector& v) { return p * v.transpose() - v * p.transpose(); }

inline PairPtr make_pair_ptr(const SpaceSpec& spec) { return std::make_shared<const SymmetricPair>(build_space(spec)); }

}  // namespace symvi
