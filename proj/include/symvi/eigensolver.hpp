#pragma once

// Dense symmetric eigenvalues: Householder tridiagonalization (Eigen) followed
// by implicit QL with Wilkinson shifts on the tridiagonal matrix.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "symvi/errors.hpp"
#include "symvi/lie_core.hpp"

namespace symvi {

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e` (size n - 1), in ascending order.
inline Vector tridiagonal_eigenvalues(Vector d, const Vector& sub) {
  const Index n = d.size();
  if (n == 0) return d;
  if (sub.size() != n - 1) throw InvalidInput("tridiagonal_eigenvalues: subdiagonal must have n - 1 entries");
  Vector e = Vector::Zero(n);
  e.head(n - 1) = sub;
  const double eps = std::numeric_limits<double>::epsilon();

  for (Index l = 0; l < n; ++l) {
    int iter = 0;
    Index m = l;
    for (;;) {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > 60) throw InvalidInput("tridiagonal_eigenvalues: QL iteration did not converge");

      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool deflated = false;
      for (Index i = m - 1; i >= l; --i) {
        double f = s * e(i);
        const double b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;
        if (r == 0.0) {
          d(i + 1) -= p;
          e(m) = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
      }
      if (deflated) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;
    }
  }
  std::sort(d.data(), d.data() + n);
  return d;
}

/// All eigenvalues of a dense symmetric matrix, ascending.
inline Vector symmetric_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInput("symmetric_eigenvalues: matrix must be square");
  if (a.rows() == 0) return Vector();
  if (a.rows() == 1) return Vector::Constant(1, a(0, 0));
  Eigen::Tridiagonalization<Matrix> tri(a);
  return tridiagonal_eigenvalues(tri.diagonal(), tri.subDiagonal());
}

}  // namespace symvi
