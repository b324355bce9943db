#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "slownav/time_series.hpp"

namespace slownav {

enum class Basis { monomial, legendre };

// One expansion term: the nonzero exponents of a multi-index, stored as
// (coordinate, exponent) pairs. Terms are ordered graded-lexicographically
// (total degree ascending, first coordinate's exponent descending within a
// grade), so serialized models are portable. The constant term is excluded;
// mean removal handles offsets.
struct ExpansionTerm {
  std::vector<std::pair<int, int>> factors;
};

class ExpansionSpec {
 public:
  ExpansionSpec() = default;

  static ExpansionSpec monomial(int input_dim, int degree);

  // Legendre basis with an affine rescale of each coordinate to [-1, 1].
  static ExpansionSpec legendre(int input_dim, int degree,
                                Eigen::VectorXd lower, Eigen::VectorXd upper);

  // Legendre spec with bounds taken from the training data's per-coordinate
  // min/max. Out-of-range queries later clamp rather than extrapolate:
  // Legendre polynomials explode outside [-1, 1] at high degree.
  static ExpansionSpec legendre_from_data(const TimeSeries& train, int degree);

  Basis basis() const { return basis_; }
  int degree() const { return degree_; }
  int input_dim() const { return input_dim_; }
  Eigen::Index output_dim() const { return static_cast<Eigen::Index>(terms_.size()); }
  const std::vector<ExpansionTerm>& terms() const { return terms_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  // Number of legendre evaluations that fell outside the stored bounds and
  // were clamped. Copies of this object share the counter.
  std::uint64_t clamp_warnings() const { return clamp_counter_->load(); }

  void expand_row(const Eigen::VectorXd& input, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd expand_point(const Eigen::VectorXd& input) const;

 private:
  ExpansionSpec(Basis basis, int input_dim, int degree);

  Basis basis_ = Basis::monomial;
  int degree_ = 1;
  int input_dim_ = 1;
  Eigen::VectorXd lower_, upper_;  // legendre rescale bounds
  std::vector<ExpansionTerm> terms_;
  std::shared_ptr<std::atomic<std::uint64_t>> clamp_counter_;
};

// Row-wise basis evaluation of a whole series.
TimeSeries expand(const TimeSeries& series, const ExpansionSpec& spec);

// Multi-indices (i_1..i_n) with 1 <= sum i_k <= degree in graded
// lexicographic order.
std::vector<ExpansionTerm> graded_lex_terms(int input_dim, int degree);

// Count of those multi-indices: C(n + d, d) - 1.
Eigen::Index expansion_output_dim(int input_dim, int degree);

}  // namespace slownav
