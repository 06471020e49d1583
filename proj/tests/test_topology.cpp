#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dmsgd/rng.hpp"
#include "dmsgd/topology.hpp"

using namespace dmsgd;

TEST_CASE("uniform averaging matrix") {
  const MixingMatrix w = MixingMatrix::uniform(3);
  CHECK(w.dim() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(w.entries()(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    }
  }
  CHECK(spectral_gap(w) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(MixingMatrix::uniform(10).lambda0() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single worker degenerate case") {
  const MixingMatrix w = MixingMatrix::uniform(1);
  CHECK(w.entries()(0, 0) == 1.0);
  CHECK(w.lambda0() == 0.0);
}

TEST_CASE("easgd block matrix spectrum") {
  const MixingMatrix w = MixingMatrix::easgd(4, 0.1);
  CHECK(w.dim() == 5);
  // eigenvalue 1-beta with multiplicity m-1, plus 1-(m+1)beta and 1
  const Eigen::VectorXd s = w.spectrum();
  CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s[1] == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(s[2] == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(s[3] == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(s[4] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(spectral_gap(w) == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("easgd beta admissibility") {
  CHECK_THROWS_AS(MixingMatrix::easgd(4, 0.6), BadParam);   // 0.6 >= 2/5
  CHECK_THROWS_AS(MixingMatrix::easgd(4, -0.1), BadParam);
  CHECK_THROWS_AS(MixingMatrix::easgd(4, 0.0), BadParam);
  // negative anchor diagonal (beta > 1/m) is allowed while spectral
  CHECK(MixingMatrix::easgd(4, 0.3).entries()(4, 4) == doctest::Approx(-0.2));
}

TEST_CASE("gossip ring circulant gap") {
  const MixingMatrix w = MixingMatrix::gossip_ring(4, 0.25);
  CHECK(spectral_gap(w) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(MixingMatrix::gossip_ring(2, 0.25), BadParam);
}

TEST_CASE("identity rejected for multiple workers") {
  CHECK_THROWS_AS(MixingMatrix::identity(2), SpectralViolation);
  CHECK_NOTHROW(MixingMatrix::identity(1));
}

TEST_CASE("double stochasticity invariants") {
  const RngStream rng(7);
  int which = 0;
  for (const MixingMatrix& w :
       {MixingMatrix::uniform(5), MixingMatrix::gossip_ring(6, 0.3),
        MixingMatrix::easgd(4, 0.15)}) {
    ++which;
    const int d = w.dim();
    CHECK((w.entries() - w.entries().transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
    CHECK((w.entries() * ones - ones).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(d, 1.0 / d);
    CHECK((w.entries().transpose() * u - u).cwiseAbs().maxCoeff() <= 1e-12);
    (void)rng;
    (void)which;
  }
}

TEST_CASE("projection vectors") {
  const int m = 6;
  const Eigen::VectorXd u = mean_projector(m);
  CHECK(u.sum() == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd e = deviation_projector(m, i);
    CHECK(std::abs(e.sum()) <= 1e-12);
    CHECK(e[i] == doctest::Approx(1.0 - 1.0 / m));
  }
}

TEST_CASE("communication round counting") {
  CHECK(count_comm_rounds(1, 25, 10) == 2);
  CHECK(count_comm_rounds(10, 10, 10) == 1);
  CHECK(count_comm_rounds(7, 7, 10) == 0);
  CHECK(count_comm_rounds(3, 9, 10) == 0);
}

TEST_CASE("round count equals brute force with sandwich bound") {
  const RngStream rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const long long n = 1 + static_cast<long long>(rng.uniform(trial, 0) * 9999);
    const long long t = 1 + static_cast<long long>(rng.uniform(trial, 1) * static_cast<double>(n - 1));
    const long long k = 1 + static_cast<long long>(rng.uniform(trial, 2) * 99);
    long long brute = 0;
    for (long long s = t; s <= n; ++s) {
      if (s % k == 0) ++brute;
    }
    const long long c = count_comm_rounds(t, n, k);
    CHECK(c == brute);
    CHECK(c >= (n - t) / k);
    CHECK(c <= (n - t) / k + 1);
  }
}

TEST_CASE("scheduled product contraction bound") {
  // ||e_i' W_{t,n}|| <= ||e_i|| lambda0^c(t,n) for products of scheduled matrices
  const int m = 5;
  const int k = 3;
  const MixingMatrix w = MixingMatrix::gossip_ring(m, 0.3);
  const double lam0 = w.lambda0();
  const RngStream rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const long long n = 2 + static_cast<long long>(rng.uniform(trial, 0) * 40);
    const long long t = 1 + static_cast<long long>(rng.uniform(trial, 1) * static_cast<double>(n - 1));
    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(m, m);
    for (long long s = t; s <= n; ++s) {
      if (s % k == 0) prod = w.entries() * prod;
    }
    const long long c = count_comm_rounds(t, n, k);
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd e = deviation_projector(m, i);
      const double lhs = (e.transpose() * prod).norm();
      CHECK(lhs <= e.norm() * std::pow(lam0, static_cast<double>(c)) + 1e-9);
    }
  }
}
