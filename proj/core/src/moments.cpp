#include "slownav/moments.hpp"

#include <stdexcept>

namespace slownav {

void MeanAccumulator::add(const Eigen::MatrixXd& rows) {
  if (rows.cols() != sum_.size()) throw std::invalid_argument("mean accumulator: dim mismatch");
  sum_ += rows.colwise().sum().transpose();
  count_ += rows.rows();
}

Eigen::VectorXd MeanAccumulator::mean() const {
  if (count_ == 0) throw std::runtime_error("mean accumulator: no data");
  return sum_ / static_cast<double>(count_);
}

LaggedMomentAccumulator::LaggedMomentAccumulator(Eigen::Index dim, Eigen::Index control_dim,
                                                 int p, int q)
    : dim_(dim), nu_(control_dim), p_(p), q_(q), maxlag_(std::max(p, q)) {
  if (p < 1 || q < 1) throw std::invalid_argument("prediction orders must be >= 1");
  mean_ = Eigen::VectorXd::Zero(dim);
  cov_sum_ = Eigen::MatrixXd::Zero(dim, dim);
  dcov_sum_ = Eigen::MatrixXd::Zero(dim, dim);
  lag_sum_.assign(static_cast<size_t>((p + 1) * (p + 1)), Eigen::MatrixXd());
  for (int j = 0; j <= p; ++j)
    for (int k = j; k <= p; ++k)
      lag_sum_[idx(j, k, p + 1)] = Eigen::MatrixXd::Zero(dim, dim);
  hu_sum_.assign(static_cast<size_t>((p + 1) * (q + 1)), Eigen::MatrixXd());
  for (int j = 0; j <= p; ++j)
    for (int k = 1; k <= q; ++k)
      hu_sum_[idx(j, k, q + 1)] = Eigen::MatrixXd::Zero(dim, control_dim);
  uu_sum_.assign(static_cast<size_t>((q + 1) * (q + 1)), Eigen::MatrixXd());
  for (int j = 1; j <= q; ++j)
    for (int k = j; k <= q; ++k)
      uu_sum_[idx(j, k, q + 1)] = Eigen::MatrixXd::Zero(control_dim, control_dim);
  h_tail_.resize(0, dim);
  u_tail_.resize(0, control_dim);
}

void LaggedMomentAccumulator::add(const Eigen::MatrixXd& h_rows, const Eigen::MatrixXd& u_rows) {
  if (h_rows.cols() != dim_ || u_rows.cols() != nu_)
    throw std::invalid_argument("moment accumulator: dim mismatch");
  if (u_rows.rows() != h_rows.rows() && u_rows.rows() != h_rows.rows() - 1)
    throw std::invalid_argument("moment accumulator: control rows must match state rows (or be one short)");
  const Eigen::Index m = h_rows.rows();
  if (m == 0) return;

  const Eigen::MatrixXd hc = h_rows.rowwise() - mean_.transpose();

  cov_sum_.noalias() += hc.transpose() * hc;

  // forward differences, carrying the last row of the previous chunk
  if (h_tail_.rows() > 0) {
    const Eigen::RowVectorXd d0 = hc.row(0) - h_tail_.row(h_tail_.rows() - 1);
    dcov_sum_.noalias() += d0.transpose() * d0;
    ++deriv_count_;
  }
  if (m > 1) {
    const Eigen::MatrixXd diff = hc.bottomRows(m - 1) - hc.topRows(m - 1);
    dcov_sum_.noalias() += diff.transpose() * diff;
    deriv_count_ += m - 1;
  }

  // extended arrays with the carried history in front; tails are stored
  // centered, so extended row i sits at global index row_count_ - hist + i
  const Eigen::Index hist = h_tail_.rows();
  Eigen::MatrixXd he(hist + m, dim_);
  if (hist > 0) he.topRows(hist) = h_tail_;
  he.bottomRows(m) = hc;
  Eigen::MatrixXd ue(u_tail_.rows() + u_rows.rows(), nu_);
  if (u_tail_.rows() > 0) ue.topRows(u_tail_.rows()) = u_tail_;
  ue.bottomRows(u_rows.rows()) = u_rows;

  // targets are global rows t >= maxlag with u(t-1) available
  const Eigen::Index ext_start = row_count_ - hist;
  const Eigen::Index first_target = std::max(hist, maxlag_ - ext_start);
  const Eigen::Index last_target = std::min(he.rows() - 1, ue.rows());
  const Eigen::Index cnt = last_target - first_target + 1;
  if (cnt > 0) {
    const Eigen::Index a = first_target;
    for (int j = 0; j <= p_; ++j)
      for (int k = j; k <= p_; ++k)
        lag_sum_[idx(j, k, p_ + 1)].noalias() +=
            he.middleRows(a - j, cnt).transpose() * he.middleRows(a - k, cnt);
    for (int j = 0; j <= p_; ++j)
      for (int k = 1; k <= q_; ++k)
        hu_sum_[idx(j, k, q_ + 1)].noalias() +=
            he.middleRows(a - j, cnt).transpose() * ue.middleRows(a - k, cnt);
    for (int j = 1; j <= q_; ++j)
      for (int k = j; k <= q_; ++k)
        uu_sum_[idx(j, k, q_ + 1)].noalias() +=
            ue.middleRows(a - j, cnt).transpose() * ue.middleRows(a - k, cnt);
    target_count_ += cnt;
  }

  row_count_ += m;
  const Eigen::Index keep_h = std::min<Eigen::Index>(maxlag_, he.rows());
  h_tail_ = he.bottomRows(keep_h);
  const Eigen::Index keep_u = std::min<Eigen::Index>(maxlag_, ue.rows());
  u_tail_ = ue.bottomRows(keep_u);
}

Eigen::MatrixXd LaggedMomentAccumulator::covariance() const {
  if (row_count_ == 0) throw std::runtime_error("moment accumulator: no data");
  return cov_sum_ / static_cast<double>(row_count_);
}

Eigen::MatrixXd LaggedMomentAccumulator::derivative_covariance() const {
  if (deriv_count_ == 0) throw std::runtime_error("moment accumulator: no derivative samples");
  return dcov_sum_ / static_cast<double>(deriv_count_);
}

Eigen::MatrixXd LaggedMomentAccumulator::lag(int j, int k) const {
  if (target_count_ == 0) throw std::runtime_error("moment accumulator: no targets");
  if (j <= k) return lag_sum_[idx(j, k, p_ + 1)] / static_cast<double>(target_count_);
  return (lag_sum_[idx(k, j, p_ + 1)] / static_cast<double>(target_count_)).transpose();
}

Eigen::MatrixXd LaggedMomentAccumulator::hu(int j, int k) const {
  if (target_count_ == 0) throw std::runtime_error("moment accumulator: no targets");
  return hu_sum_[idx(j, k, q_ + 1)] / static_cast<double>(target_count_);
}

Eigen::MatrixXd LaggedMomentAccumulator::uu(int j, int k) const {
  if (target_count_ == 0) throw std::runtime_error("moment accumulator: no targets");
  if (j <= k) return uu_sum_[idx(j, k, q_ + 1)] / static_cast<double>(target_count_);
  return (uu_sum_[idx(k, j, q_ + 1)] / static_cast<double>(target_count_)).transpose();
}

long expand_through(const TimeSeries& raw, const ExpansionSpec& spec,
                    MeanAccumulator* mean_pass, LaggedMomentAccumulator* moment_pass,
                    const TimeSeries* controls, Eigen::Index chunk_rows) {
  if (raw.dim() != spec.input_dim())
    throw std::invalid_argument("expand_through: input dim mismatch");
  const Eigen::Index n = spec.output_dim();
  const Eigen::Index len = raw.len();
  Eigen::MatrixXd chunk;
  Eigen::VectorXd row(n);
  for (Eigen::Index start = 0; start < len; start += chunk_rows) {
    const Eigen::Index m = std::min(chunk_rows, len - start);
    chunk.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      spec.expand_row(raw.values.row(start + i).transpose(), row);
      chunk.row(i) = row.transpose();
    }
    if (mean_pass) mean_pass->add(chunk);
    if (moment_pass) {
      Eigen::MatrixXd u_chunk;
      if (controls) {
        const Eigen::Index ustart = std::min(start, controls->len());
        const Eigen::Index um =
            std::max<Eigen::Index>(0, std::min(m, controls->len() - ustart));
        u_chunk = controls->values.middleRows(ustart, um);
      } else {
        u_chunk.resize(m, 0);
      }
      moment_pass->add(chunk, u_chunk);
    }
  }
  return len;
}

}  // namespace slownav
