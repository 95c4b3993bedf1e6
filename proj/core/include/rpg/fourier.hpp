#pragma once

// Truncated cosine/sine bases and the low-frequency scaling/rotation map
//   u(theta) = Diag(Omega * omega_tilde) * R(sigma_tilde) * theta,
//   R = Omega Sc Omega^T - Phi Ss Omega^T + I - Omega Omega^T.
// R is applied matrix-free in O(n * m_tilde).

#include <cmath>
#include <span>
#include <vector>

#include "rpg/autodiff.hpp"
#include "rpg/linalg.hpp"

namespace rpg {

struct FourierPair {
  int n = 0;
  int m_tilde = 0;
  Matrix omega;  // n x m_tilde, column i-1 = sqrt(2/n) cos(2 pi i j / n)
  Matrix phi;    // n x m_tilde, column i-1 = sqrt(2/n) sin(2 pi i j / n)
  double gram_error = 0.0;  // max |B^T B - I| over both bases
};

struct TransformParams {
  Vector omega_tilde;  // scaling amplitudes
  Vector sigma_tilde;  // rotation phases (radians, taken mod 2 pi)
};

/// Frequencies i = 1..m_tilde. Throws BadDimensions unless 1 <= m_tilde < n.
FourierPair build_fourier_pair(int n, int m_tilde);

/// The exactly orthonormal real-DFT frame (frequencies 1..n/2-1, n even).
FourierPair full_fourier_frame(int n);

/// A small retained-frequency count for dimension n: clamp(n / 4, 1, 4).
int default_m_tilde(int n);

Vector scaling_vector(const FourierPair& fp, const Vector& omega_tilde);
Vector rotate(const FourierPair& fp, const Vector& sigma_tilde, const Vector& x);
Vector build_u(const FourierPair& fp, const TransformParams& tp, const Vector& theta);

/// Dense R for oracle checks only.
Matrix rotation_matrix(const FourierPair& fp, const Vector& sigma_tilde);

/// Max-entry deviation between exp(A) and U Sc U^T - V Ss U^T built from the
/// SVD of the antisymmetric A. Antisymmetric spectra come in equal pairs, so
/// degeneracy is judged between distinct pair values: throws
/// DegenerateSpectrum when two of them are closer than 1e-6.
double check_exp_decomposition(const Matrix& a);

template <class T>
std::vector<T> rotate_generic(const FourierPair& fp, std::span<const T> sigma_tilde,
                              std::span<const T> x) {
  using std::cos;
  using std::sin;
  const int n = fp.n;
  const int m = fp.m_tilde;
  std::vector<T> r(x.begin(), x.end());
  for (int i = 0; i < m; ++i) {
    T c = 0.0;
    for (int j = 0; j < n; ++j) c += fp.omega(j, i) * x[static_cast<std::size_t>(j)];
    const T cos_part = cos(sigma_tilde[static_cast<std::size_t>(i)]) * c - c;
    const T sin_part = sin(sigma_tilde[static_cast<std::size_t>(i)]) * c;
    for (int j = 0; j < n; ++j) {
      r[static_cast<std::size_t>(j)] += fp.omega(j, i) * cos_part - fp.phi(j, i) * sin_part;
    }
  }
  return r;
}

template <class T>
std::vector<T> scaling_generic(const FourierPair& fp, std::span<const T> omega_tilde) {
  std::vector<T> w(static_cast<std::size_t>(fp.n), T(0.0));
  for (int j = 0; j < fp.n; ++j) {
    T acc = 0.0;
    for (int i = 0; i < fp.m_tilde; ++i) acc += fp.omega(j, i) * omega_tilde[static_cast<std::size_t>(i)];
    w[static_cast<std::size_t>(j)] = acc;
  }
  return w;
}

/// u = omega o (R theta): scaling applied after rotation.
template <class T>
std::vector<T> build_u_generic(const FourierPair& fp, std::span<const T> omega_tilde,
                               std::span<const T> sigma_tilde, std::span<const T> theta) {
  std::vector<T> u = rotate_generic<T>(fp, sigma_tilde, theta);
  const std::vector<T> w = scaling_generic<T>(fp, omega_tilde);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = w[j] * u[j];
  return u;
}

}  // namespace rpg
