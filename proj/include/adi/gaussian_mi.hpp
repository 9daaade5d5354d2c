#pragma once

// Kernel-weighted time-varying Gaussian model and the log-determinant
// conditional mutual information estimator built on it. All information
// values are in nats.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adi {

/// Raised when a linear-algebra step meets a singular or indefinite matrix,
/// or when assembled covariances are inconsistent. Carries a condition
/// estimate of the offending block and, when known, the time index.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& msg, double condition_estimate,
                 std::optional<std::int64_t> t = std::nullopt)
      : std::runtime_error(msg),
        condition_estimate_(condition_estimate),
        t_(t) {}

  double condition_estimate() const { return condition_estimate_; }
  std::optional<std::int64_t> time() const { return t_; }

  NumericalError at_time(std::int64_t t) const {
    return NumericalError(what(), condition_estimate_, t);
  }

 private:
  double condition_estimate_;
  std::optional<std::int64_t> t_;
};

/// Offline windows look at samples on both sides of t; causal windows use
/// only samples at or before t.
enum class WindowMode { Offline, Causal };

/// PerSample centers each scatter term at that sample's own kernel mean;
/// PerWindow centers every term at the window's mean.
enum class CenterMode { PerSample, PerWindow };

using IndexSet = std::vector<int>;

inline double rbf_kernel(double u, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rbf_kernel: h must be > 0");
  return std::exp(-(u * u) / (2.0 * h * h));
}

namespace detail {

// Kernel support is truncated at |i - t| <= 4h; the discarded tail mass is
// below 4e-4 of the total.
inline std::int64_t kernel_support_radius(double h) {
  return static_cast<std::int64_t>(std::ceil(4.0 * h));
}

inline void check_time_index(std::int64_t t, std::int64_t T,
                             const char* what) {
  if (t < 0 || t >= T)
    throw std::invalid_argument(std::string(what) +
                                ": time index outside the data range");
}

struct WindowRange {
  std::int64_t lo, hi;  // inclusive
};

inline WindowRange window_range(std::int64_t t, std::int64_t T, double h,
                                WindowMode mode) {
  const std::int64_t r = kernel_support_radius(h);
  WindowRange w;
  w.lo = t - r < 0 ? 0 : t - r;
  w.hi = mode == WindowMode::Causal ? t : (t + r >= T ? T - 1 : t + r);
  return w;
}

}  // namespace detail

/// Kernel-weighted mean of the rows of X around row t.
inline Eigen::VectorXd kernel_mean(const Eigen::MatrixXd& X, std::int64_t t,
                                   double h,
                                   WindowMode mode = WindowMode::Offline) {
  if (X.rows() == 0) throw std::domain_error("kernel_mean: empty data");
  if (!(h > 0.0)) throw std::invalid_argument("kernel_mean: h must be > 0");
  detail::check_time_index(t, X.rows(), "kernel_mean");
  const auto w = detail::window_range(t, X.rows(), h, mode);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(X.cols());
  double den = 0.0;
  for (std::int64_t i = w.lo; i <= w.hi; ++i) {
    const double k = rbf_kernel(static_cast<double>(i - t), h);
    num += k * X.row(i).transpose();
    den += k;
  }
  return num / den;
}

/// Kernel-weighted covariance of the rows of X around row t, plus ridge on
/// the diagonal. Per-sample centering subtracts each row's own kernel mean,
/// which removes slow trend from the scatter.
inline Eigen::MatrixXd kernel_cov(const Eigen::MatrixXd& X, std::int64_t t,
                                  double h, double ridge,
                                  WindowMode mode = WindowMode::Offline,
                                  CenterMode center = CenterMode::PerSample) {
  if (X.rows() < 2)
    throw std::domain_error("kernel_cov: need at least two samples");
  if (!(h > 0.0)) throw std::invalid_argument("kernel_cov: h must be > 0");
  if (ridge < 0.0)
    throw std::invalid_argument("kernel_cov: ridge must be >= 0");
  detail::check_time_index(t, X.rows(), "kernel_cov");
  const auto w = detail::window_range(t, X.rows(), h, mode);
  const Eigen::Index D = X.cols();
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(D, D);
  double den = 0.0;
  Eigen::VectorXd window_mean;
  if (center == CenterMode::PerWindow) window_mean = kernel_mean(X, t, h, mode);
  for (std::int64_t i = w.lo; i <= w.hi; ++i) {
    const double k = rbf_kernel(static_cast<double>(i - t), h);
    const Eigen::VectorXd m = center == CenterMode::PerSample
                                  ? kernel_mean(X, i, h, mode)
                                  : window_mean;
    const Eigen::VectorXd d = X.row(i).transpose() - m;
    scatter.noalias() += k * (d * d.transpose());
    den += k;
  }
  Eigen::MatrixXd cov = scatter / den;
  cov = ((cov + cov.transpose()) / 2.0).eval();
  cov.diagonal().array() += ridge;
  return cov;
}

/// Kernel-weighted mean of arbitrary rows, each tagged with its signed time
/// offset from the evaluation point (offsets need not be contiguous).
inline Eigen::VectorXd kernel_mean_at(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& offsets,
                                      double center, double h) {
  if (X.rows() == 0) throw std::domain_error("kernel_mean_at: empty data");
  if (X.rows() != offsets.size())
    throw std::invalid_argument("kernel_mean_at: offset count mismatch");
  Eigen::VectorXd num = Eigen::VectorXd::Zero(X.cols());
  double den = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double k = rbf_kernel(offsets(i) - center, h);
    num += k * X.row(i).transpose();
    den += k;
  }
  return num / den;
}

/// Kernel-weighted covariance of arbitrary offset-tagged rows, evaluated at
/// offset zero. Per-sample centering uses each row's own kernel mean over
/// the same row set.
inline Eigen::MatrixXd kernel_cov_at(const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& offsets, double h,
                                     double ridge,
                                     CenterMode center = CenterMode::PerSample) {
  if (X.rows() < 2)
    throw std::domain_error("kernel_cov_at: need at least two samples");
  if (X.rows() != offsets.size())
    throw std::invalid_argument("kernel_cov_at: offset count mismatch");
  if (ridge < 0.0)
    throw std::invalid_argument("kernel_cov_at: ridge must be >= 0");
  const Eigen::Index D = X.cols();
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(D, D);
  double den = 0.0;
  Eigen::VectorXd window_mean;
  if (center == CenterMode::PerWindow)
    window_mean = kernel_mean_at(X, offsets, 0.0, h);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double k = rbf_kernel(offsets(i), h);
    const Eigen::VectorXd m = center == CenterMode::PerSample
                                  ? kernel_mean_at(X, offsets, offsets(i), h)
                                  : window_mean;
    const Eigen::VectorXd d = X.row(i).transpose() - m;
    scatter.noalias() += k * (d * d.transpose());
    den += k;
  }
  Eigen::MatrixXd cov = scatter / den;
  cov = ((cov + cov.transpose()) / 2.0).eval();
  cov.diagonal().array() += ridge;
  return cov;
}

namespace detail {

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& cov,
                                 const IndexSet& rows, const IndexSet& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cov(rows[r], cols[c]);
  return out;
}

inline void check_indices(const Eigen::MatrixXd& cov, const IndexSet& idx,
                          const char* what) {
  for (int i : idx)
    if (i < 0 || i >= cov.rows())
      throw std::invalid_argument(std::string(what) +
                                  ": coordinate index out of range");
}

inline void check_disjoint(const IndexSet& a, const IndexSet& b,
                           const char* what) {
  for (int i : a)
    for (int j : b)
      if (i == j)
        throw std::invalid_argument(std::string(what) +
                                    ": index sets must be disjoint");
}

// Condition estimate as the eigenvalue spread of a symmetric matrix;
// infinite when the smallest eigenvalue is not positive.
inline double condition_estimate(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

inline double logdet_pd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": matrix not positive definite",
                         condition_estimate(m));
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail

/// Conditional covariance of the Y coordinates given the Z coordinates:
/// the Schur complement cov[Y,Y] - cov[Y,Z] cov[Z,Z]^-1 cov[Z,Y].
inline Eigen::MatrixXd conditional_cov(const Eigen::MatrixXd& cov,
                                       const IndexSet& Y, const IndexSet& Z) {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("conditional_cov: covariance must be square");
  detail::check_indices(cov, Y, "conditional_cov");
  detail::check_indices(cov, Z, "conditional_cov");
  detail::check_disjoint(Y, Z, "conditional_cov");
  const Eigen::MatrixXd yy = detail::submatrix(cov, Y, Y);
  if (Z.empty()) return yy;
  const Eigen::MatrixXd zz = detail::submatrix(cov, Z, Z);
  const Eigen::MatrixXd yz = detail::submatrix(cov, Y, Z);
  Eigen::LLT<Eigen::MatrixXd> llt(zz);
  if (llt.info() != Eigen::Success)
    throw NumericalError("conditional_cov: conditioning block singular",
                         detail::condition_estimate(zz));
  Eigen::MatrixXd schur = yy - yz * llt.solve(yz.transpose());
  return ((schur + schur.transpose()) / 2.0).eval();
}

/// Gaussian conditional mutual information I(X; Y | Z) in nats from a joint
/// covariance: half the log-determinant ratio of Sigma_{Y|Z} to
/// Sigma_{Y|Z,X}. Small negative values from floating point clamp to zero;
/// anything below -1e-9 signals an inconsistent covariance and raises.
inline double gaussian_cmi(const Eigen::MatrixXd& cov, const IndexSet& X,
                           const IndexSet& Y, const IndexSet& Z) {
  detail::check_disjoint(X, Y, "gaussian_cmi");
  detail::check_disjoint(X, Z, "gaussian_cmi");
  detail::check_disjoint(Y, Z, "gaussian_cmi");
  IndexSet ZX = Z;
  ZX.insert(ZX.end(), X.begin(), X.end());
  const Eigen::MatrixXd a = conditional_cov(cov, Y, Z);
  const Eigen::MatrixXd b = conditional_cov(cov, Y, ZX);
  const double val = 0.5 * (detail::logdet_pd(a, "gaussian_cmi") -
                            detail::logdet_pd(b, "gaussian_cmi"));
  if (val < -1e-9)
    throw NumericalError(
        "gaussian_cmi: negative information beyond tolerance",
        detail::condition_estimate(cov));
  return val < 0.0 ? 0.0 : val;
}

}  // namespace adi
