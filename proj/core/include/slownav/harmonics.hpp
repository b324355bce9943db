#pragma once

#include <Eigen/Core>

namespace slownav {

// Closed-form reference solutions for a single 1D source.
//   uniform_cosine: sqrt(2) * cos(i * pi * s / L) on [0, L]
//                   (uniformly explored interval of length L)
//   hermite:        (1 / sqrt(2^i i!)) * H_i(s / sqrt(2))
//                   (standard-normal stationary source)
enum class HarmonicKind { uniform_cosine, hermite };

struct HarmonicReference {
  HarmonicKind kind = HarmonicKind::uniform_cosine;
  int index = 1;       // i >= 1
  double length = 1;   // L, uniform_cosine only
};

double harmonic_eval(const HarmonicReference& ref, double s);
Eigen::VectorXd harmonic_eval(const HarmonicReference& ref, const Eigen::VectorXd& s);

// Higher harmonics from the first one: sqrt(2) * T_i(g1 / sqrt(2)), i.e. the
// Chebyshev composition under the sqrt(2) cosine amplitude convention.
double chebyshev_compose(int i, double g1);
Eigen::VectorXd chebyshev_compose(int i, const Eigen::VectorXd& g1);

}  // namespace slownav
