#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "adi/gaussian_mi.hpp"

using namespace adi;

namespace {

Eigen::MatrixXd random_pd(std::mt19937_64& rng, int n, double jitter = 0.5) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = gauss(rng);
  Eigen::MatrixXd m = b * b.transpose();
  m.diagonal().array() += jitter;
  return m;
}

// Independent CMI route: I(X;Y|Z) = 0.5 ln(|S_XZ||S_YZ| / (|S_Z||S_XYZ|))
// with dense LU determinants, no Schur complements involved.
double cmi_determinant_oracle(const Eigen::MatrixXd& cov, const IndexSet& X,
                              const IndexSet& Y, const IndexSet& Z) {
  auto det_of = [&](IndexSet idx) {
    if (idx.empty()) return 1.0;
    Eigen::MatrixXd sub(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c)
        sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            cov(idx[r], idx[c]);
    return sub.determinant();
  };
  auto join = [](IndexSet a, const IndexSet& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return 0.5 * std::log(det_of(join(X, Z)) * det_of(join(Y, Z)) /
                        (det_of(Z) * det_of(join(join(X, Y), Z))));
}

}  // namespace

TEST_CASE("rbf kernel shape", "[gaussian-mi]") {
  CHECK(rbf_kernel(0.0, 3.0) == 1.0);
  CHECK(rbf_kernel(5.0, 5.0) == Catch::Approx(std::exp(-0.5)).margin(1e-15));
  CHECK(rbf_kernel(-2.5, 4.0) == rbf_kernel(2.5, 4.0));
  CHECK_THROWS_AS(rbf_kernel(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("kernel mean worked examples", "[gaussian-mi]") {
  Eigen::MatrixXd constant(5, 2);
  constant.col(0).setConstant(7.0);
  constant.col(1).setConstant(-1.5);
  const auto m = kernel_mean(constant, 2, 3.0);
  CHECK(m(0) == Catch::Approx(7.0).margin(1e-12));
  CHECK(m(1) == Catch::Approx(-1.5).margin(1e-12));

  Eigen::MatrixXd ramp(3, 1);
  ramp << 0.0, 3.0, 6.0;
  CHECK(kernel_mean(ramp, 1, 1e6)(0) == Catch::Approx(3.0).epsilon(1e-6));

  // rows [0],[1] at the first row: weights (1, e^{-1/50})
  Eigen::MatrixXd pair(2, 1);
  pair << 0.0, 1.0;
  const double r = std::exp(-1.0 / 50.0);
  CHECK(kernel_mean(pair, 0, 5.0)(0) ==
        Catch::Approx(r / (1.0 + r)).margin(1e-12));

  CHECK_THROWS_AS(kernel_mean(Eigen::MatrixXd(0, 2), 0, 5.0),
                  std::domain_error);
  CHECK_THROWS_AS(kernel_mean(pair, 5, 5.0), std::invalid_argument);
}

TEST_CASE("causal windows ignore the future", "[gaussian-mi]") {
  Eigen::MatrixXd x(6, 1);
  x << 0, 10, 20, 30, 40, 50;
  CHECK(kernel_mean(x, 0, 2.0, WindowMode::Causal)(0) == 0.0);
  const auto full = kernel_mean(x, 5, 2.0, WindowMode::Offline);
  const auto causal = kernel_mean(x, 5, 2.0, WindowMode::Causal);
  CHECK(full(0) == causal(0));  // nothing after the last row anyway
  CHECK(kernel_mean(x, 2, 2.0, WindowMode::Causal)(0) <
        kernel_mean(x, 2, 2.0, WindowMode::Offline)(0));
}

TEST_CASE("kernel support truncates at 4h", "[gaussian-mi]") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(10, 1);
  Eigen::MatrixXd b = a;
  for (int i = 5; i < 10; ++i) b(i, 0) = 1e9;  // beyond radius 4 of t=0
  CHECK(kernel_mean(a, 0, 1.0)(0) == kernel_mean(b, 0, 1.0)(0));
}

TEST_CASE("kernel covariance worked examples", "[gaussian-mi]") {
  Eigen::MatrixXd constant(6, 2);
  constant.col(0).setConstant(4.0);
  constant.col(1).setConstant(9.0);
  const auto cov = kernel_cov(constant, 3, 5.0, 1e-4);
  CHECK(cov(0, 0) == Catch::Approx(1e-4).margin(1e-16));
  CHECK(cov(1, 1) == Catch::Approx(1e-4).margin(1e-16));
  CHECK(cov(0, 1) == Catch::Approx(0.0).margin(1e-16));

  // 1-D rows [0,2], h huge, ridge 0: both per-sample means -> 1, scatter 1
  Eigen::MatrixXd pair(2, 1);
  pair << 0.0, 2.0;
  CHECK(kernel_cov(pair, 0, 1e9, 0.0)(0, 0) == Catch::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(kernel_cov(Eigen::MatrixXd(1, 1), 0, 5.0, 0.0),
                  std::domain_error);
}

TEST_CASE("huge bandwidth degenerates to the sample moments", "[gaussian-mi]") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(40, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = gauss(rng);
  const Eigen::VectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov_direct =
      centered.transpose() * centered / static_cast<double>(x.rows());

  const auto km = kernel_mean(x, 20, 1e9);
  const auto kc = kernel_cov(x, 20, 1e9, 0.0);
  for (int j = 0; j < 3; ++j)
    CHECK(km(j) == Catch::Approx(mean(j)).margin(1e-6));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      CHECK(kc(a, b) == Catch::Approx(cov_direct(a, b)).margin(1e-6));
}

TEST_CASE("kernel covariance is symmetric PSD plus ridge", "[gaussian-mi]") {
  std::mt19937_64 rng(57);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd x(25, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = gauss(rng);
    const double ridge = 1e-8;
    const auto cov = kernel_cov(x, 12, 4.0, ridge,
                                rep % 2 ? WindowMode::Causal
                                        : WindowMode::Offline,
                                rep % 3 ? CenterMode::PerWindow
                                        : CenterMode::PerSample);
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov,
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= ridge - 1e-12);
  }
}

TEST_CASE("offset-tagged windows match the contiguous path", "[gaussian-mi]") {
  // The offset-tagged helpers model the window using only the rows they are
  // given, with no inner re-truncation; the contiguous helpers truncate
  // every mean window at the support radius. The two agree exactly when no
  // pairwise row distance exceeds the radius, so the series here has r+1
  // rows. The top-level mean and the per-window covariance additionally
  // agree on any full-support window.
  std::mt19937_64 rng(73);
  std::normal_distribution<double> gauss;
  const double h = 2.0;
  const std::int64_t r = 8;  // support radius ceil(4h)
  Eigen::MatrixXd x(r + 1, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = gauss(rng);
  const std::int64_t t = 4;
  Eigen::VectorXd offsets(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    offsets(i) = static_cast<double>(i - t);

  const auto m1 = kernel_mean(x, t, h);
  const auto m2 = kernel_mean_at(x, offsets, 0.0, h);
  CHECK((m1 - m2).cwiseAbs().maxCoeff() <= 1e-12);
  for (const auto center : {CenterMode::PerSample, CenterMode::PerWindow}) {
    const auto c1 = kernel_cov(x, t, h, 1e-9, WindowMode::Offline, center);
    const auto c2 = kernel_cov_at(x, offsets, h, 1e-9, center);
    CHECK((c1 - c2).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // longer window: per-window centering still matches the contiguous path
  Eigen::MatrixXd y(2 * r + 1, 2);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = gauss(rng);
  Eigen::VectorXd yoff(y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    yoff(i) = static_cast<double>(i - r);
  const auto c1 = kernel_cov(y, r, h, 1e-9, WindowMode::Offline,
                             CenterMode::PerWindow);
  const auto c2 = kernel_cov_at(y, yoff, h, 1e-9, CenterMode::PerWindow);
  CHECK((c1 - c2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("conditional covariance identities", "[gaussian-mi]") {
  Eigen::MatrixXd rho(2, 2);
  rho << 1.0, 0.5, 0.5, 1.0;
  const auto schur = conditional_cov(rho, {0}, {1});
  CHECK(schur(0, 0) == Catch::Approx(0.75).margin(1e-12));

  Eigen::MatrixXd block = Eigen::MatrixXd::Identity(4, 4);
  block(0, 1) = block(1, 0) = 0.3;  // Y block correlated internally
  const auto yy = conditional_cov(block, {0, 1}, {2, 3});
  CHECK(yy(0, 1) == Catch::Approx(0.3).margin(1e-12));
  const auto no_z = conditional_cov(block, {0, 1}, {});
  CHECK((yy - no_z).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd singular(3, 3);
  singular << 1, 0, 0, 0, 1, 1, 0, 1, 1;  // Z block rank 1
  CHECK_THROWS_AS(conditional_cov(singular, {0}, {1, 2}), NumericalError);
  CHECK_THROWS_AS(conditional_cov(rho, {0}, {0}), std::invalid_argument);
}

TEST_CASE("gaussian CMI closed forms", "[gaussian-mi]") {
  CHECK(gaussian_cmi(Eigen::MatrixXd::Identity(3, 3), {0}, {1}, {2}) <=
        1e-12);

  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0;
  CHECK(gaussian_cmi(cov, {0}, {1}, {2}) ==
        Catch::Approx(0.5 * std::log(4.0 / 3.0)).margin(1e-9));

  // X independent of (Y, Z); Y and Z correlated
  Eigen::MatrixXd indep = Eigen::MatrixXd::Identity(3, 3);
  indep(1, 2) = indep(2, 1) = 0.6;
  CHECK(gaussian_cmi(indep, {0}, {1}, {2}) <= 1e-12);
}

TEST_CASE("CMI is non-negative on random PD covariances", "[gaussian-mi]") {
  std::mt19937_64 rng(613);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 10);  // up to 12
    const auto cov = random_pd(rng, n);
    IndexSet X{0}, Y{1}, Z;
    for (int i = 2; i < n; ++i) Z.push_back(i);
    const double val = gaussian_cmi(cov, X, Y, Z);
    CHECK(val >= 0.0);
    CHECK(std::isfinite(val));
  }
}

TEST_CASE("CMI agrees with a dense determinant oracle", "[gaussian-mi]") {
  std::mt19937_64 rng(1009);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 4);  // up to 6
    const auto cov = random_pd(rng, n);
    IndexSet X{0}, Y{1, 2}, Z;
    for (int i = 3; i < n; ++i) Z.push_back(i);
    CHECK(gaussian_cmi(cov, X, Y, Z) ==
          Catch::Approx(cmi_determinant_oracle(cov, X, Y, Z)).margin(1e-9));
  }
  // empty Z reduces to plain mutual information
  const auto cov = random_pd(rng, 4);
  CHECK(gaussian_cmi(cov, {0, 1}, {2, 3}, {}) ==
        Catch::Approx(cmi_determinant_oracle(cov, {0, 1}, {2, 3}, {}))
            .margin(1e-9));
}

TEST_CASE("CMI is invariant to invertible reparameterization of Z",
          "[gaussian-mi]") {
  std::mt19937_64 rng(2203);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5;
    const auto cov = random_pd(rng, n);
    IndexSet X{0}, Y{1}, Z{2, 3, 4};
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd zb(3, 3);
    do {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) zb(i, j) = gauss(rng);
    } while (std::abs(zb.determinant()) < 0.1);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(Z[i], Z[j]) = zb(i, j);
    const Eigen::MatrixXd cov2 = M * cov * M.transpose();
    CHECK(gaussian_cmi(cov2, X, Y, Z) ==
          Catch::Approx(gaussian_cmi(cov, X, Y, Z)).margin(1e-9));
  }
}

TEST_CASE("inconsistent covariance assembly raises with diagnostics",
          "[gaussian-mi]") {
  // Not a valid joint covariance: conditioning on Z and X leaves a negative
  // "variance" for Y.
  Eigen::MatrixXd bad(3, 3);
  bad << 1.0, 0.0, 0.9,   // X
      0.0, 1.0, 0.9,      // Y
      0.9, 0.9, 1.0;      // Z
  CHECK_THROWS_AS(gaussian_cmi(bad, {0}, {1}, {2}), NumericalError);

  const NumericalError err("probe", 42.0);
  CHECK(err.condition_estimate() == 42.0);
  CHECK_FALSE(err.time().has_value());
  const auto stamped = err.at_time(17);
  REQUIRE(stamped.time().has_value());
  CHECK(*stamped.time() == 17);
}
