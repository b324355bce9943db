#include "slownav/expansion.hpp"

#include <stdexcept>

namespace slownav {
namespace {

void enumerate_terms(int dim, int remaining, int coord, std::vector<std::pair<int, int>>& prefix,
                     std::vector<ExpansionTerm>& out) {
  if (coord == dim - 1) {
    ExpansionTerm term;
    term.factors = prefix;
    if (remaining > 0) term.factors.emplace_back(coord, remaining);
    out.push_back(std::move(term));
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    if (e > 0) prefix.emplace_back(coord, e);
    enumerate_terms(dim, remaining - e, coord + 1, prefix, out);
    if (e > 0) prefix.pop_back();
  }
}

}  // namespace

std::vector<ExpansionTerm> graded_lex_terms(int input_dim, int degree) {
  std::vector<ExpansionTerm> terms;
  std::vector<std::pair<int, int>> prefix;
  for (int total = 1; total <= degree; ++total)
    enumerate_terms(input_dim, total, 0, prefix, terms);
  return terms;
}

Eigen::Index expansion_output_dim(int input_dim, int degree) {
  // C(n + d, d) - 1, computed incrementally to avoid overflow for sane sizes
  long double count = 1.0L;
  for (int i = 1; i <= degree; ++i)
    count = count * (input_dim + i) / i;
  return static_cast<Eigen::Index>(count + 0.5L) - 1;
}

ExpansionSpec::ExpansionSpec(Basis basis, int input_dim, int degree)
    : basis_(basis),
      degree_(degree),
      input_dim_(input_dim),
      terms_(graded_lex_terms(input_dim, degree)),
      clamp_counter_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (degree < 1) throw std::invalid_argument("expansion degree must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("expansion input_dim must be >= 1");
}

ExpansionSpec ExpansionSpec::monomial(int input_dim, int degree) {
  return ExpansionSpec(Basis::monomial, input_dim, degree);
}

ExpansionSpec ExpansionSpec::legendre(int input_dim, int degree,
                                      Eigen::VectorXd lower, Eigen::VectorXd upper) {
  ExpansionSpec spec(Basis::legendre, input_dim, degree);
  if (lower.size() != input_dim || upper.size() != input_dim)
    throw std::invalid_argument("legendre bounds must match input_dim");
  for (int i = 0; i < input_dim; ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) || !(upper(i) > lower(i)))
      throw std::invalid_argument("legendre bounds must be finite with positive width");
  }
  spec.lower_ = std::move(lower);
  spec.upper_ = std::move(upper);
  return spec;
}

ExpansionSpec ExpansionSpec::legendre_from_data(const TimeSeries& train, int degree) {
  if (train.len() < 2) throw std::invalid_argument("need at least two rows to fit bounds");
  return legendre(static_cast<int>(train.dim()), degree,
                  train.values.colwise().minCoeff().transpose(),
                  train.values.colwise().maxCoeff().transpose());
}

void ExpansionSpec::expand_row(const Eigen::VectorXd& input,
                               Eigen::Ref<Eigen::VectorXd> out) const {
  if (input.size() != input_dim_)
    throw std::invalid_argument("expansion input dimension mismatch");

  // per-coordinate table of basis values up to the degree
  thread_local std::vector<double> table;
  table.assign(static_cast<size_t>(input_dim_) * (degree_ + 1), 1.0);
  for (int c = 0; c < input_dim_; ++c) {
    double* row = table.data() + static_cast<size_t>(c) * (degree_ + 1);
    if (basis_ == Basis::monomial) {
      const double x = input(c);
      for (int d = 1; d <= degree_; ++d) row[d] = row[d - 1] * x;
    } else {
      double t = 2.0 * (input(c) - lower_(c)) / (upper_(c) - lower_(c)) - 1.0;
      if (t < -1.0 || t > 1.0) {
        clamp_counter_->fetch_add(1, std::memory_order_relaxed);
        t = t < -1.0 ? -1.0 : 1.0;
      }
      // Legendre recurrence (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
      row[0] = 1.0;
      if (degree_ >= 1) row[1] = t;
      for (int k = 1; k + 1 <= degree_; ++k)
        row[k + 1] = ((2 * k + 1) * t * row[k] - k * row[k - 1]) / (k + 1);
    }
  }

  for (size_t i = 0; i < terms_.size(); ++i) {
    double v = 1.0;
    for (const auto& [coord, exp] : terms_[i].factors)
      v *= table[static_cast<size_t>(coord) * (degree_ + 1) + exp];
    out(static_cast<Eigen::Index>(i)) = v;
  }
}

Eigen::VectorXd ExpansionSpec::expand_point(const Eigen::VectorXd& input) const {
  Eigen::VectorXd out(output_dim());
  expand_row(input, out);
  return out;
}

TimeSeries expand(const TimeSeries& series, const ExpansionSpec& spec) {
  if (series.dim() != spec.input_dim())
    throw std::invalid_argument("expansion input dimension mismatch");
  TimeSeries out;
  out.values.resize(series.len(), spec.output_dim());
  Eigen::VectorXd row(spec.output_dim());
  for (Eigen::Index t = 0; t < series.len(); ++t) {
    spec.expand_row(series.values.row(t).transpose(), row);
    out.values.row(t) = row.transpose();
  }
  return out;
}

}  // namespace slownav
