#include "rpg/fields.hpp"

#include <string>

#include "rpg/error.hpp"

namespace rpg {

Vector eval_checked(const VectorField& field, const Vector& theta, const char* what) {
  Vector out = field(theta);
  if (!all_finite(out)) throw NonFiniteField(std::string(what) + ": field returned non-finite values");
  return out;
}

Vector fd_gradient(const ScalarField& f, const Vector& theta, double step) {
  const Eigen::Index n = theta.size();
  Vector g(n);
  Vector probe = theta;
  for (Eigen::Index i = 0; i < n; ++i) {
    probe(i) = theta(i) + step;
    const double hi = f(probe);
    probe(i) = theta(i) - step;
    const double lo = f(probe);
    probe(i) = theta(i);
    g(i) = (hi - lo) / (2.0 * step);
  }
  return g;
}

}  // namespace rpg
