#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dmsgd/engine.hpp"

namespace dmsgd {

struct EnsembleStats {
  std::vector<long long> grid;
  std::vector<double> mean_grad_norm_sq;
  std::vector<double> stderr_grad_norm_sq;
  std::vector<double> tams;  // running time average of mean_grad_norm_sq
  std::vector<double> mean_consensus;
  std::vector<double> stderr_consensus;
  std::vector<double> mean_loss;
  std::vector<double> stderr_loss;
  std::vector<double> mean_z_subopt;
  std::vector<double> stderr_z_subopt;
  int seeds = 0;
};

struct HittingTimeSample {
  double a0 = 0.0;
  long long tau = 0;
  bool censored = false;
  double alpha = 0.0;
  double partial_sum_at_tau = 0.0;
};

struct CcdfRow {
  long long n = 0;
  double eps_partial_sum = 0.0;
  double ccdf = 0.0;  // empirical P(tau >= n)
};

struct RateFit {
  std::vector<long long> t_grid;
  std::vector<double> subopt;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct ZSequence {
  std::vector<long long> n;
  std::vector<Eigen::VectorXd> z;
  // max |z_{j+1} - z_j + eps_j u'G_j / (1-alpha)| over retained steps,
  // only meaningful when gradient snapshots were kept
  std::optional<double> max_identity_residual;
};

EnsembleStats ensemble(const std::vector<TrajectoryRecord>& records);

// Exact per-step E||grad g(xbar_n)||^2 by enumerating every Rademacher
// noise sequence. Independent of engine::run: the recursion is coded
// directly here.
std::vector<double> exhaustive_expectation(const RunConfig& cfg);

std::vector<HittingTimeSample> hitting_times(
    const std::vector<TrajectoryRecord>& records, double a0);

std::vector<CcdfRow> tail_ccdf(const std::vector<HittingTimeSample>& samples,
                               const StepSchedule& schedule);

// Least-squares fit of log(subopt) against log(ln T / sqrt(T)).
RateFit rate_fit(const std::vector<long long>& t_grid,
                 const std::vector<double>& subopt);

struct MScalingRow {
  int m = 0;
  double prefactor = 0.0;  // exp(intercept) of a slope-1 log fit
};

std::vector<MScalingRow> m_scaling_check(const std::vector<int>& ms,
                                         const std::vector<RateFit>& fits);

ZSequence z_sequence(const TrajectoryRecord& record, double alpha);

// Single-constant envelope check for the consensus error: the measured
// ensemble mean of sum_i ||x^(i) - xbar||^2 must stay below
// C * sum_t kappa^(n-t) eps_t^2 with kappa = max(lambda0^(1/k), (1+alpha^2)/2).
// C is fitted on the first third of the grid; the rest is asserted.
struct ConsensusBoundCheck {
  double c_fit = 0.0;
  double kappa = 0.0;
  int checked = 0;
  int violations = 0;
  double worst_excess = 0.0;  // largest measured / (C * envelope) - 1
  bool pass = false;
};

ConsensusBoundCheck consensus_bound_check(const EnsembleStats& stats,
                                          const StepSchedule& schedule,
                                          double lambda0, int period_k,
                                          double alpha);

// One-sided Mann-Whitney rank-sum test (normal approximation) for
// "values in a tend to be smaller than values in b"; returns the p-value.
double rank_sum_p_less(const std::vector<double>& a,
                       const std::vector<double>& b);

// Least-squares slope of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dmsgd
