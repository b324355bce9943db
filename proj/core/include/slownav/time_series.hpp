#pragma once

#include <Eigen/Core>
#include <string>

namespace slownav {

// A finite, equidistant sequence of real vectors: one row per time step.
// The step size is normalized to 1 everywhere.
struct TimeSeries {
  Eigen::MatrixXd values;  // len x dim

  TimeSeries() = default;
  explicit TimeSeries(Eigen::MatrixXd v) : values(std::move(v)) {}

  Eigen::Index len() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
  bool all_finite() const { return values.allFinite(); }
};

// makes a one-column series from a vector
TimeSeries scalar_series(const Eigen::VectorXd& v);

// CSV format: header "t,c0,c1,...", one row per step, full round-trip
// precision decimal floats.
void write_series_csv(const TimeSeries& series, const std::string& path);
TimeSeries read_series_csv(const std::string& path);

// Formats a double with enough digits to round-trip exactly.
std::string format_double(double x);

}  // namespace slownav
