#pragma once

// Matrix Lie algebra kernel: brackets, invariant forms, adjoint actions,
// centers of subalgebras and orthonormal bases. Every algebra handled here is
// realized by real skew-symmetric matrices acting on R^n, possibly as a
// block-diagonal direct sum of factors.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "symvi/errors.hpp"

namespace symvi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative threshold for every numerical rank decision.
inline constexpr double kRankTol = 1e-10;
/// Residual below which Gram-Schmidt drops a vector.
inline constexpr double kDropTol = 1e-12;

inline Matrix bracket(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw InvalidInput("bracket: operands must be square matrices of equal size");
  }
  return a * b - b * a;
}

/// E_ij = e_i e_j^T - e_j e_i^T in so(n), zero-based indices.
inline Matrix elementary_skew(Index n, Index i, Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  e(j, i) = -1.0;
  return e;
}

/// One diagonal block of the algebra together with the multiplier applied to
/// its base form. Non-abelian blocks use -trace(AB); abelian blocks (tori
/// realized as so(2) x ... x so(2)) use -trace(AB)/2, which is the Euclidean
/// dot product on the coefficients of the standard rotation generators.
struct FormBlock {
  Index offset = 0;
  Index size = 0;
  double scale = 1.0;
  bool abelian = false;

  double base_weight() const { return abelian ? 0.5 : 1.0; }
};

/// A matrix realization of a compact Lie algebra g with an Ad-invariant
/// inner product. Immutable once constructed.
class LieAlgebraData {
 public:
  LieAlgebraData() = default;

  LieAlgebraData(std::vector<Matrix> basis, std::vector<FormBlock> blocks)
      : basis_(std::move(basis)), blocks_(std::move(blocks)) {
    if (basis_.empty()) throw InvalidInput("LieAlgebraData: empty basis");
    matrix_size_ = basis_.front().rows();
    for (const auto& b : basis_) {
      if (b.rows() != matrix_size_ || b.cols() != matrix_size_) {
        throw InvalidInput("LieAlgebraData: basis matrices must share one square size");
      }
      if ((b + b.transpose()).norm() > 1e-14 * std::max(1.0, b.norm())) {
        throw InvalidInput("LieAlgebraData: basis matrices must be skew-symmetric");
      }
    }
    if (blocks_.empty()) blocks_.push_back(FormBlock{0, matrix_size_, 1.0, false});
    for (const auto& blk : blocks_) {
      if (blk.scale <= 0.0) throw InvalidInput("LieAlgebraData: form scale must be positive");
    }
    const auto d = dim();
    gram_.resize(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = i; j < d; ++j) gram_(i, j) = gram_(j, i) = form(basis_[i], basis_[j]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram_);
    if (es.eigenvalues().minCoeff() <= kRankTol * std::max(1.0, es.eigenvalues().maxCoeff())) {
      throw InvalidInput("LieAlgebraData: Gram matrix is not positive definite");
    }
    gram_llt_ = gram_.llt();
    build_structure_constants();
  }

  Index dim() const { return static_cast<Index>(basis_.size()); }
  Index matrix_size() const { return matrix_size_; }
  const std::vector<Matrix>& basis() const { return basis_; }
  const Matrix& gram() const { return gram_; }
  const std::vector<FormBlock>& blocks() const { return blocks_; }

  /// The invariant form: sum over blocks of scale * base form.
  double form(const Matrix& a, const Matrix& b) const {
    double s = 0.0;
    for (const auto& blk : blocks_) {
      const auto ab = a.block(blk.offset, blk.offset, blk.size, blk.size);
      const auto bb = b.block(blk.offset, blk.offset, blk.size, blk.size);
      s += blk.scale * blk.base_weight() * -(ab * bb).trace();
    }
    return s;
  }

  double norm(const Matrix& a) const { return std::sqrt(std::max(0.0, form(a, a))); }

  /// Coefficients of `a` over the basis (exact for a in span(basis)).
  Vector coordinates(const Matrix& a) const {
    Vector rhs(dim());
    for (Index i = 0; i < dim(); ++i) rhs(i) = form(basis_[i], a);
    return gram_llt_.solve(rhs);
  }

  Matrix from_coordinates(const Vector& c) const {
    Matrix m = Matrix::Zero(matrix_size_, matrix_size_);
    for (Index i = 0; i < dim(); ++i) {
      if (c(i) != 0.0) m += c(i) * basis_[i];
    }
    return m;
  }

  /// Inner product of coefficient vectors.
  double inner_coords(const Vector& x, const Vector& y) const { return x.dot(gram_ * y); }

  /// Bracket computed on coefficient vectors through structure constants.
  Vector bracket_coords(const Vector& x, const Vector& y) const {
    Vector out(dim());
    for (Index k = 0; k < dim(); ++k) out(k) = x.dot(structure_[k] * y);
    return out;
  }

  /// Structure constants: [B_i, B_j] = sum_k structure()[k](i, j) B_k.
  const std::vector<Matrix>& structure() const { return structure_; }

  /// Same basis with new per-block multipliers; callers re-orthonormalize.
  LieAlgebraData with_scales(const std::vector<double>& scales) const {
    if (scales.size() != blocks_.size()) throw InvalidInput("with_scales: one scale per block required");
    auto blocks = blocks_;
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].scale = scales[i];
    return LieAlgebraData(basis_, std::move(blocks));
  }

 private:
  void build_structure_constants() {
    const auto d = dim();
    structure_.assign(static_cast<std::size_t>(d), Matrix::Zero(d, d));
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) {
        const Vector c = coordinates(basis_[i] * basis_[j] - basis_[j] * basis_[i]);
        for (Index k = 0; k < d; ++k) {
          structure_[k](i, j) = c(k);
          structure_[k](j, i) = -c(k);
        }
      }
    }
  }

  std::vector<Matrix> basis_;
  std::vector<FormBlock> blocks_;
  Index matrix_size_ = 0;
  Matrix gram_;
  Eigen::LLT<Matrix> gram_llt_;
  std::vector<Matrix> structure_;
};

inline double inner(const LieAlgebraData& alg, const Matrix& a, const Matrix& b) { return alg.form(a, b); }

/// Ad_g X = g X g^{-1}.
inline Matrix adjoint(const Matrix& g, const Matrix& x) {
  if (g.rows() != g.cols() || g.rows() != x.rows() || x.rows() != x.cols()) {
    throw InvalidInput("adjoint: size mismatch");
  }
  Eigen::FullPivLU<Matrix> lu(g);
  if (!lu.isInvertible()) throw InvalidInput("adjoint: group element is not invertible");
  return g * x * lu.inverse();
}

/// Modified Gram-Schmidt (two passes) in the invariant form. Vectors whose
/// residual falls below kDropTol (relative to their own norm) are dropped.
inline std::vector<Matrix> orthonormalize(const LieAlgebraData& alg, const std::vector<Matrix>& vectors) {
  std::vector<Matrix> out;
  for (const auto& v : vectors) {
    const double n0 = alg.norm(v);
    if (n0 == 0.0) continue;
    Matrix r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) r -= alg.form(q, r) * q;
    }
    const double nr = alg.norm(r);
    if (nr < kDropTol * std::max(1.0, n0)) continue;
    out.push_back(r / nr);
  }
  return out;
}

/// Largest residual of [h_i, h_j] after projecting onto span(h), relative to
/// the size of the bracket. `h` must be orthonormal.
inline double closure_residual(const LieAlgebraData& alg, const std::vector<Matrix>& h) {
  double worst = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      const Matrix b = bracket(h[i], h[j]);
      Matrix r = b;
      for (const auto& q : h) r -= alg.form(q, b) * q;
      worst = std::max(worst, r.norm() / std::max(1.0, b.norm()));
    }
  }
  return worst;
}

/// Orthonormal basis of z(h) = {x in h : [x, y] = 0 for all y in h}.
inline std::vector<Matrix> center_of_subalgebra(const LieAlgebraData& alg, const std::vector<Matrix>& h_basis) {
  const auto h = orthonormalize(alg, h_basis);
  if (h.empty()) return {};
  if (closure_residual(alg, h) >= kRankTol) {
    throw NotASubalgebra("center_of_subalgebra: span is not closed under the bracket");
  }
  const auto k = static_cast<Index>(h.size());
  const Index n2 = alg.matrix_size() * alg.matrix_size();
  // Column i stacks vec([h_i, h_j]) over all j.
  Matrix op(n2 * k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      const Matrix b = bracket(h[i], h[j]);
      op.block(j * n2, i, n2, 1) = Eigen::Map<const Vector>(b.data(), n2);
    }
  }
  Eigen::JacobiSVD<Matrix> svd(op, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  std::vector<Matrix> kernel;
  for (Index c = 0; c < k; ++c) {
    const double s = c < sv.size() ? sv(c) : 0.0;
    if (smax == 0.0 || s < kRankTol * smax) {
      Matrix z = Matrix::Zero(alg.matrix_size(), alg.matrix_size());
      for (Index i = 0; i < k; ++i) z += svd.matrixV()(i, c) * h[static_cast<std::size_t>(i)];
      kernel.push_back(std::move(z));
    }
  }
  return orthonormalize(alg, kernel);
}

/// Matrix exponential; for skew-symmetric input the result is orthogonal.
inline Matrix exp_matrix(const Matrix& x) { return x.exp(); }

/// Closest orthogonal matrix (polar factor).
inline Matrix nearest_orthogonal(const Matrix& g) {
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace symvi
