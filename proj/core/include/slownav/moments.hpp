#pragma once

#include <Eigen/Core>

#include "slownav/expansion.hpp"
#include "slownav/time_series.hpp"

namespace slownav {

// Streaming two-pass statistics over an expanded signal. The expansion is
// evaluated chunk by chunk so the full expanded series is never held in
// memory; all products are accumulated mean-removed in double precision to
// limit cancellation.

class MeanAccumulator {
 public:
  explicit MeanAccumulator(Eigen::Index dim) : sum_(Eigen::VectorXd::Zero(dim)) {}
  void add(const Eigen::MatrixXd& rows);
  Eigen::VectorXd mean() const;
  long count() const { return count_; }

 private:
  Eigen::VectorXd sum_;
  long count_ = 0;
};

// Second pass: with the mean fixed, accumulates
//   cov      = <(h - m)(h - m)^T>            over all rows
//   dcov     = <dh dh^T>, dh(t) = h(t+1) - h(t)
//   lag(j,k) = <(h(t-j) - m)(h(t-k) - m)^T>  over targets t >= max(p, q)
//   hu(j,k)  = <(h(t-j) - m) u(t-k)^T>       j in 0..p, k in 1..q
//   uu(j,k)  = <u(t-j) u(t-k)^T>             j, k in 1..q
// Chunks must be passed in time order; u rows are aligned with h rows
// (u may be one row shorter, covering t = 0..len-2). set_mean must be
// called before the first add.
class LaggedMomentAccumulator {
 public:
  LaggedMomentAccumulator(Eigen::Index dim, Eigen::Index control_dim, int p, int q);

  void add(const Eigen::MatrixXd& h_rows, const Eigen::MatrixXd& u_rows);
  void set_mean(const Eigen::VectorXd& mean) { mean_ = mean; }

  Eigen::MatrixXd covariance() const;
  Eigen::MatrixXd derivative_covariance() const;
  Eigen::MatrixXd lag(int j, int k) const;  // j, k in 0..max(p,q)... valid 0..p
  Eigen::MatrixXd hu(int j, int k) const;   // j in 0..p, k in 1..q
  Eigen::MatrixXd uu(int j, int k) const;   // j, k in 1..q
  long target_count() const { return target_count_; }
  long row_count() const { return row_count_; }
  int p() const { return p_; }
  int q() const { return q_; }

 private:
  Eigen::Index idx(int j, int k, int stride) const { return j * stride + k; }

  Eigen::Index dim_, nu_;
  int p_, q_, maxlag_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_sum_, dcov_sum_;
  std::vector<Eigen::MatrixXd> lag_sum_;  // (p+1) x (p+1) blocks, j <= k stored
  std::vector<Eigen::MatrixXd> hu_sum_;   // (p+1) x q blocks
  std::vector<Eigen::MatrixXd> uu_sum_;   // q x q blocks
  long row_count_ = 0;
  long deriv_count_ = 0;
  long target_count_ = 0;
  Eigen::MatrixXd h_tail_, u_tail_;  // history carried across chunks
};

// Expands a raw sensor series chunk by chunk and feeds both accumulators.
// Returns the number of rows processed.
long expand_through(const TimeSeries& raw, const ExpansionSpec& spec,
                    MeanAccumulator* mean_pass, LaggedMomentAccumulator* moment_pass,
                    const TimeSeries* controls = nullptr,
                    Eigen::Index chunk_rows = 8192);

}  // namespace slownav
