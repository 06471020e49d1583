#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dmsgd/errors.hpp"

namespace dmsgd {

enum class MixingKind { Uniform, Gossip, Easgd, Identity };

// Symmetric doubly stochastic mixing matrix with cached spectrum.
// d = m for Uniform/Gossip/Identity, d = m+1 for Easgd (anchor row last).
class MixingMatrix {
 public:
  static MixingMatrix uniform(int m);
  static MixingMatrix gossip_ring(int m, double neighbor_weight);
  static MixingMatrix easgd(int m, double beta);
  static MixingMatrix identity(int m);

  MixingKind kind() const { return kind_; }
  int workers() const { return m_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const Eigen::VectorXd& spectrum() const { return spectrum_; }  // ascending
  double lambda0() const { return lambda0_; }
  std::optional<double> beta() const { return beta_; }

 private:
  MixingMatrix(MixingKind kind, int m, Eigen::MatrixXd entries,
               std::optional<double> beta);
  void validate_and_decompose();

  MixingKind kind_;
  int m_;
  Eigen::MatrixXd entries_;
  std::optional<double> beta_;
  Eigen::VectorXd spectrum_;
  double lambda0_ = 0.0;
};

double spectral_gap(const MixingMatrix& w);

// Mixing matrix applied when n mod k == 0, identity otherwise.
struct CommSchedule {
  int period_k = 1;
  MixingMatrix matrix;

  bool mixes_at(long long n) const { return n % period_k == 0; }
};

// Number of integers in [t, n] divisible by k.
long long count_comm_rounds(long long t, long long n, long long k);

// u = (1/m, ..., 1/m); e_i has entry 1 - 1/m at i and -1/m elsewhere,
// so e_i' X = x^(i) - x_bar.
Eigen::VectorXd mean_projector(int m);
Eigen::VectorXd deviation_projector(int m, int i);

}  // namespace dmsgd
