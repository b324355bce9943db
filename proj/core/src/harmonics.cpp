#include "slownav/harmonics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slownav {
namespace {

double hermite_physicists(int n, double x) {
  // H_0 = 1, H_1 = 2x, H_{k+1} = 2x H_k - 2k H_{k-1}
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double chebyshev_t(int n, double x) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double harmonic_eval(const HarmonicReference& ref, double s) {
  if (ref.index < 1) throw std::invalid_argument("harmonic index must be >= 1");
  switch (ref.kind) {
    case HarmonicKind::uniform_cosine: {
      if (!(ref.length > 0)) throw std::invalid_argument("harmonic length must be positive");
      const double tol = 1e-12 * ref.length;
      if (s < -tol || s > ref.length + tol)
        throw std::domain_error("uniform_cosine harmonic evaluated outside [0, L]");
      return std::numbers::sqrt2 * std::cos(ref.index * std::numbers::pi * s / ref.length);
    }
    case HarmonicKind::hermite: {
      double norm = 1.0;
      for (int k = 1; k <= ref.index; ++k) norm *= 2.0 * k;
      return hermite_physicists(ref.index, s / std::numbers::sqrt2) / std::sqrt(norm);
    }
  }
  throw std::logic_error("unknown harmonic kind");
}

Eigen::VectorXd harmonic_eval(const HarmonicReference& ref, const Eigen::VectorXd& s) {
  Eigen::VectorXd out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = harmonic_eval(ref, s(i));
  return out;
}

double chebyshev_compose(int i, double g1) {
  if (i < 1) throw std::invalid_argument("chebyshev index must be >= 1");
  return std::numbers::sqrt2 * chebyshev_t(i, g1 / std::numbers::sqrt2);
}

Eigen::VectorXd chebyshev_compose(int i, const Eigen::VectorXd& g1) {
  Eigen::VectorXd out(g1.size());
  for (Eigen::Index k = 0; k < g1.size(); ++k) out(k) = chebyshev_compose(i, g1(k));
  return out;
}

}  // namespace slownav
