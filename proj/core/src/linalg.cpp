#include "rpg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "rpg/error.hpp"

namespace rpg {

namespace {

constexpr double kPivotFloor = 1e-14;
constexpr int kMaxJacobiSweeps = 50;
constexpr int kTaylorDegree = 12;

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw BadDimensions(std::string(what) + ": matrix must be square, got " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

Matrix dense_inverse(const Matrix& m) {
  require_square(m, "dense_inverse");
  const Eigen::Index n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::Identity(n, n);

  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (std::abs(a(pivot, col)) < kPivotFloor) {
      throw SingularMatrix("dense_inverse: pivot below 1e-14 in column " +
                           std::to_string(col));
    }
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      inv.row(pivot).swap(inv.row(col));
    }
    const double scale = 1.0 / a(col, col);
    a.row(col) *= scale;
    inv.row(col) *= scale;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      a.row(r) -= factor * a.row(col);
      inv.row(r) -= factor * inv.row(col);
    }
  }
  return inv;
}

double dense_det(const Matrix& m) {
  require_square(m, "dense_det");
  const Eigen::Index n = m.rows();
  Matrix a = m;
  double det = 1.0;
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (a(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      det = -det;
    }
    det *= a(col, col);
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      a.row(r).tail(n - col) -= factor * a.row(col).tail(n - col);
    }
  }
  return det;
}

SvdResult svd(const Matrix& m) {
  require_square(m, "svd");
  const Eigen::Index n = m.rows();
  Matrix w = m;
  Matrix v = Matrix::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double wp = w(r, p);
          const double wq = w(r, q);
          w(r, p) = c * wp - s * wq;
          w(r, q) = s * wp + c * wq;
          const double vp = v(r, p);
          const double vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    throw NoConvergence("svd: one-sided Jacobi did not converge in 50 sweeps");
  }

  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) norms[static_cast<std::size_t>(i)] = w.col(i).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
  });

  SvdResult out{Matrix::Zero(n, n), Vector::Zero(n), Matrix::Zero(n, n)};
  const double s_max = n > 0 ? norms[static_cast<std::size_t>(order[0])] : 0.0;
  const double zero_floor = std::max(s_max, 1.0) * static_cast<double>(n) * eps;
  std::vector<Eigen::Index> incomplete;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    const double sigma = norms[static_cast<std::size_t>(src)];
    out.s(k) = sigma;
    out.v.col(k) = v.col(src);
    if (sigma > zero_floor) {
      out.u.col(k) = w.col(src) / sigma;
    } else {
      incomplete.push_back(k);
    }
  }

  // Complete U for (numerically) zero singular values with Gram-Schmidt
  // against canonical basis vectors.
  std::vector<bool> filled(static_cast<std::size_t>(n), true);
  for (Eigen::Index k : incomplete) filled[static_cast<std::size_t>(k)] = false;
  Eigen::Index next_basis = 0;
  for (Eigen::Index k : incomplete) {
    while (true) {
      if (next_basis >= n) throw NoConvergence("svd: failed to complete orthonormal basis");
      Vector cand = Vector::Unit(n, next_basis++);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (filled[static_cast<std::size_t>(j)]) cand -= out.u.col(j).dot(cand) * out.u.col(j);
        }
      }
      const double norm = cand.norm();
      if (norm > 1e-6) {
        out.u.col(k) = cand / norm;
        filled[static_cast<std::size_t>(k)] = true;
        break;
      }
    }
  }
  return out;
}

Matrix matrix_exp(const Matrix& a) {
  require_square(a, "matrix_exp");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix b = a / std::ldexp(1.0, squarings);

  // Horner evaluation of sum_{k<=12} B^k / k!.
  const Matrix id = Matrix::Identity(n, n);
  Matrix e = id;
  for (int k = kTaylorDegree; k >= 1; --k) {
    e = id + (b * e) / static_cast<double>(k);
  }
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace rpg
