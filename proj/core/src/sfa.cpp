#include "slownav/sfa.hpp"

#include <stdexcept>

#include "slownav/linalg.hpp"

namespace slownav {
namespace {

// threshold separating informative directions from projected-away ones in
// the covariance of a sphered signal (eigenvalues are ~1 or ~0)
constexpr double kVarianceFloor = 1e-6;

}  // namespace

SfaModel train_sfa_from_stats(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& dcov, int r) {
  if (r < 1) throw std::invalid_argument("sfa: r must be >= 1");
  if (cov.rows() != dcov.rows()) throw std::invalid_argument("sfa: stat dim mismatch");

  const EigenDecomposition cd = symmetric_eig_ascending(cov);
  const double lam_max = cd.values.size() ? cd.values.maxCoeff() : 0.0;
  if (lam_max <= 0.0) throw std::invalid_argument("sfa: zero variance input");
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < cd.values.size(); ++i)
    if (cd.values(i) > kVarianceFloor * lam_max) ++rank;
  if (rank < r)
    throw std::invalid_argument("sfa: fewer informative directions than requested components");

  // solve in the informative subspace, rescaled to exact unit variance
  const Eigen::MatrixXd basis = cd.vectors.rightCols(rank) *
                                cd.values.tail(rank).cwiseSqrt().cwiseInverse().asDiagonal();
  const Eigen::MatrixXd reduced = basis.transpose() * dcov * basis;
  const EigenDecomposition sd = symmetric_eig_ascending(reduced);

  SfaModel model;
  model.extraction = basis * sd.vectors.leftCols(r);
  model.delta_values = sd.values.head(r);
  return model;
}

SfaModel train_sfa(const TimeSeries& sphered, int r) {
  if (!sphered.all_finite()) throw std::invalid_argument("sfa: non-finite input");
  if (r > sphered.dim()) throw std::invalid_argument("sfa: r exceeds input dimension");
  if (sphered.len() < sphered.dim() + 2)
    throw std::invalid_argument("sfa: need len >= dim + 2");

  const Eigen::Index len = sphered.len();
  const Eigen::MatrixXd& z = sphered.values;
  const Eigen::MatrixXd cov = z.transpose() * z / static_cast<double>(len);
  const Eigen::MatrixXd diff = z.bottomRows(len - 1) - z.topRows(len - 1);
  const Eigen::MatrixXd dcov = diff.transpose() * diff / static_cast<double>(len - 1);

  SfaModel model = train_sfa_from_stats(cov, dcov, r);

  // deterministic sign: positive correlation with the time index over the
  // first tenth of training
  const Eigen::Index window = std::max<Eigen::Index>(2, len / 10);
  Eigen::VectorXd tc(window);
  for (Eigen::Index t = 0; t < window; ++t) tc(t) = static_cast<double>(t);
  tc.array() -= tc.mean();
  const Eigen::MatrixXd head = z.topRows(window) * model.extraction;
  for (Eigen::Index j = 0; j < model.extraction.cols(); ++j) {
    const Eigen::VectorXd y = head.col(j).array() - head.col(j).mean();
    if (tc.dot(y) < 0.0) model.extraction.col(j) = -model.extraction.col(j);
  }
  return model;
}

SfaModel train_sfa_pipeline(const TimeSeries& raw, const ExpansionSpec& spec, int r,
                            double eigen_floor) {
  const TimeSeries expanded = expand(raw, spec);
  SpheringTransform sphering = fit_sphering(expanded, eigen_floor);
  const TimeSeries z = apply_sphering(sphering, expanded);
  SfaModel model = train_sfa(z, r);
  model.expansion = spec;
  model.sphering = std::move(sphering);
  return model;
}

TimeSeries sfa_extract(const SfaModel& model, const TimeSeries& raw) {
  TimeSeries stage = raw;
  if (model.expansion) stage = expand(stage, *model.expansion);
  if (model.sphering) stage = apply_sphering(*model.sphering, stage);
  if (stage.dim() != model.extraction.rows())
    throw std::invalid_argument("sfa_extract: dimension mismatch");
  TimeSeries out;
  out.values = stage.values * model.extraction;
  return out;
}

Eigen::VectorXd sfa_extract_point(const SfaModel& model, const Eigen::VectorXd& raw) {
  Eigen::VectorXd stage = raw;
  if (model.expansion) stage = model.expansion->expand_point(stage);
  if (model.sphering) stage = apply_sphering(*model.sphering, stage);
  if (stage.size() != model.extraction.rows())
    throw std::invalid_argument("sfa_extract: dimension mismatch");
  return model.extraction.transpose() * stage;
}

Eigen::VectorXd empirical_delta(const TimeSeries& signal) {
  if (signal.len() < 2) throw std::invalid_argument("empirical_delta: need len >= 2");
  const Eigen::Index len = signal.len();
  const Eigen::MatrixXd diff =
      signal.values.bottomRows(len - 1) - signal.values.topRows(len - 1);
  return diff.array().square().colwise().mean().transpose();
}

}  // namespace slownav
