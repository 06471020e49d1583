#include "dmsgd/topology.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace dmsgd {

namespace {
constexpr double kSymTol = 1e-12;
constexpr double kStochTol = 1e-12;
constexpr double kEigOneTol = 1e-10;
}  // namespace

MixingMatrix::MixingMatrix(MixingKind kind, int m, Eigen::MatrixXd entries,
                           std::optional<double> beta)
    : kind_(kind), m_(m), entries_(std::move(entries)), beta_(beta) {
  validate_and_decompose();
}

void MixingMatrix::validate_and_decompose() {
  const int d = dim();
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > kSymTol) {
    throw SpectralViolation("mixing matrix is not symmetric");
  }
  for (int i = 0; i < d; ++i) {
    if (std::abs(entries_.row(i).sum() - 1.0) > kStochTol ||
        std::abs(entries_.col(i).sum() - 1.0) > kStochTol) {
      throw SpectralViolation("mixing matrix is not doubly stochastic");
    }
  }
  if (kind_ == MixingKind::Uniform || kind_ == MixingKind::Gossip) {
    if (entries_.minCoeff() < -kStochTol) {
      throw SpectralViolation("negative entry in averaging matrix");
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_);
  spectrum_ = es.eigenvalues();

  int ones = 0;
  double lam0 = 0.0;
  for (int j = 0; j < d; ++j) {
    const double lam = spectrum_[j];
    if (std::abs(lam - 1.0) <= kEigOneTol) {
      ++ones;
    } else {
      lam0 = std::max(lam0, std::abs(lam));
    }
  }
  if (ones != 1) {
    std::ostringstream oss;
    oss << "expected exactly one unit eigenvalue, found " << ones;
    throw SpectralViolation(oss.str());
  }
  if (lam0 >= 1.0 - kEigOneTol) {
    throw SpectralViolation("second largest eigenvalue modulus reaches one");
  }
  lambda0_ = lam0;
}

MixingMatrix MixingMatrix::uniform(int m) {
  if (m < 1) throw BadParam("worker count must be positive");
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(m, m, 1.0 / m);
  return MixingMatrix(MixingKind::Uniform, m, std::move(w), std::nullopt);
}

MixingMatrix MixingMatrix::gossip_ring(int m, double neighbor_weight) {
  if (m < 3) throw BadParam("gossip ring needs at least 3 workers");
  if (neighbor_weight <= 0.0 || neighbor_weight >= 0.5) {
    throw BadParam("neighbor weight must lie in (0, 1/2)");
  }
  const double self = 1.0 - 2.0 * neighbor_weight;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    w(i, i) = self;
    w(i, (i + 1) % m) += neighbor_weight;
    w(i, (i + m - 1) % m) += neighbor_weight;
  }
  return MixingMatrix(MixingKind::Gossip, m, std::move(w), std::nullopt);
}

MixingMatrix MixingMatrix::easgd(int m, double beta) {
  if (m < 1) throw BadParam("worker count must be positive");
  // |1 - beta| < 1 and |1 - (m+1) beta| < 1 keep the non-unit spectrum
  // inside the unit disc.
  if (beta <= 0.0 || beta >= 2.0 / (m + 1)) {
    std::ostringstream oss;
    oss << "easgd beta must lie in (0, " << 2.0 / (m + 1) << "), got " << beta;
    throw BadParam(oss.str());
  }
  const int d = m + 1;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  w.topLeftCorner(m, m) = (1.0 - beta) * Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i) {
    w(i, m) = beta;
    w(m, i) = beta;
  }
  w(m, m) = 1.0 - m * beta;
  return MixingMatrix(MixingKind::Easgd, m, std::move(w), beta);
}

MixingMatrix MixingMatrix::identity(int m) {
  if (m != 1) {
    // Identity with m >= 2 has a repeated unit eigenvalue; only valid as
    // the implicit no-communication matrix, never as a standalone W.
    throw SpectralViolation("identity mixing is only admissible for m = 1");
  }
  return MixingMatrix(MixingKind::Identity, 1, Eigen::MatrixXd::Identity(1, 1),
                      std::nullopt);
}

double spectral_gap(const MixingMatrix& w) { return w.lambda0(); }

long long count_comm_rounds(long long t, long long n, long long k) {
  if (k < 1) throw BadParam("communication period must be positive");
  if (t < 1 || t > n) throw BadParam("need 1 <= t <= n");
  return n / k - (t - 1) / k;
}

Eigen::VectorXd mean_projector(int m) {
  return Eigen::VectorXd::Constant(m, 1.0 / m);
}

Eigen::VectorXd deviation_projector(int m, int i) {
  Eigen::VectorXd e = Eigen::VectorXd::Constant(m, -1.0 / m);
  e[i] += 1.0;
  return e;
}

}  // namespace dmsgd
