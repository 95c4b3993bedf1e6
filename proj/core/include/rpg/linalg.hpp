#pragma once

// Dense linear algebra used as the numerical oracle layer. Production paths
// never materialize n x n matrices; these routines back the test suites and
// the small-n verification commands.

#include <Eigen/Dense>

namespace rpg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
/// Throws SingularMatrix when a pivot falls below 1e-14 in magnitude.
Matrix dense_inverse(const Matrix& m);

/// Determinant by pivoted LU elimination. Returns 0 for singular input.
double dense_det(const Matrix& m);

struct SvdResult {
  Matrix u;
  Vector s;  // non-negative, descending
  Matrix v;
};

/// One-sided (Hestenes) Jacobi SVD of a square matrix, M = U diag(s) V^T.
/// Columns of U belonging to zero singular values are completed to an
/// orthonormal basis. Throws NoConvergence after 50 sweeps.
SvdResult svd(const Matrix& m);

/// exp(A) by scaling and squaring with a degree-12 Taylor polynomial.
Matrix matrix_exp(const Matrix& a);

/// Largest absolute entry; 0 for empty input.
double max_abs(const Matrix& m);

bool all_finite(const Vector& v);

}  // namespace rpg
