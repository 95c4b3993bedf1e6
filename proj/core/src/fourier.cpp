#include "rpg/fourier.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "rpg/error.hpp"

namespace rpg {

namespace {

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_len(const Vector& v, int len, const char* what) {
  if (v.size() != len) {
    throw BadDimensions(std::string(what) + ": expected length " + std::to_string(len) +
                        ", got " + std::to_string(v.size()));
  }
}

double gram_deviation(const Matrix& b) {
  const Matrix gram = b.transpose() * b;
  return max_abs(gram - Matrix::Identity(gram.rows(), gram.cols()));
}

}  // namespace

FourierPair build_fourier_pair(int n, int m_tilde) {
  if (m_tilde < 1 || m_tilde >= n) {
    throw BadDimensions("build_fourier_pair: need 1 <= m_tilde < n (n=" + std::to_string(n) +
                        ", m_tilde=" + std::to_string(m_tilde) + ")");
  }
  FourierPair fp;
  fp.n = n;
  fp.m_tilde = m_tilde;
  fp.omega.resize(n, m_tilde);
  fp.phi.resize(n, m_tilde);
  const double norm = std::sqrt(2.0 / n);
  for (int i = 1; i <= m_tilde; ++i) {
    for (int j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * i * j / n;
      fp.omega(j, i - 1) = norm * std::cos(angle);
      fp.phi(j, i - 1) = norm * std::sin(angle);
    }
  }
  fp.gram_error = std::max(gram_deviation(fp.omega), gram_deviation(fp.phi));
  return fp;
}

FourierPair full_fourier_frame(int n) {
  if (n < 4 || n % 2 != 0) throw BadDimensions("full_fourier_frame: n must be even and >= 4");
  return build_fourier_pair(n, n / 2 - 1);
}

int default_m_tilde(int n) { return std::clamp(n / 4, 1, 4); }

Vector scaling_vector(const FourierPair& fp, const Vector& omega_tilde) {
  require_len(omega_tilde, fp.m_tilde, "scaling_vector");
  return to_vector(scaling_generic<double>(fp, as_span(omega_tilde)));
}

Vector rotate(const FourierPair& fp, const Vector& sigma_tilde, const Vector& x) {
  require_len(sigma_tilde, fp.m_tilde, "rotate");
  require_len(x, fp.n, "rotate");
  return to_vector(rotate_generic<double>(fp, as_span(sigma_tilde), as_span(x)));
}

Vector build_u(const FourierPair& fp, const TransformParams& tp, const Vector& theta) {
  require_len(tp.omega_tilde, fp.m_tilde, "build_u");
  require_len(tp.sigma_tilde, fp.m_tilde, "build_u");
  require_len(theta, fp.n, "build_u");
  return to_vector(build_u_generic<double>(fp, as_span(tp.omega_tilde), as_span(tp.sigma_tilde),
                                           as_span(theta)));
}

Matrix rotation_matrix(const FourierPair& fp, const Vector& sigma_tilde) {
  require_len(sigma_tilde, fp.m_tilde, "rotation_matrix");
  const Vector c = sigma_tilde.array().cos().matrix();
  const Vector s = sigma_tilde.array().sin().matrix();
  return fp.omega * c.asDiagonal() * fp.omega.transpose() -
         fp.phi * s.asDiagonal() * fp.omega.transpose() + Matrix::Identity(fp.n, fp.n) -
         fp.omega * fp.omega.transpose();
}

double check_exp_decomposition(const Matrix& a) {
  if (a.rows() != a.cols()) throw BadDimensions("check_exp_decomposition: matrix must be square");
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, max_abs(a));
  if (max_abs(a + a.transpose()) > 1e-12 * scale) {
    throw BadDimensions("check_exp_decomposition: matrix is not antisymmetric");
  }

  const SvdResult dec = svd(a);

  // Singular values of an antisymmetric matrix are (l1, l1, l2, l2, ..., [0]).
  std::vector<double> distinct;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) distinct.push_back(0.5 * (dec.s(k) + dec.s(k + 1)));
  if (n % 2 == 1) distinct.push_back(dec.s(n - 1));
  for (std::size_t k = 1; k < distinct.size(); ++k) {
    if (distinct[k - 1] - distinct[k] < 1e-6) {
      throw DegenerateSpectrum("check_exp_decomposition: singular-value gap below 1e-6");
    }
  }

  const Vector c = dec.s.array().cos().matrix();
  const Vector s = dec.s.array().sin().matrix();
  const Matrix composed = dec.u * c.asDiagonal() * dec.u.transpose() -
                          dec.v * s.asDiagonal() * dec.u.transpose();
  return max_abs(composed - matrix_exp(a));
}

}  // namespace rpg
