#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "dmsgd/objectives.hpp"
#include "dmsgd/schedules.hpp"
#include "dmsgd/topology.hpp"

namespace dmsgd {

enum class InitKind { ZeroConsensus, RandomBox, PerWorkerRandom };

struct RunConfig {
  CommSchedule comm;
  std::shared_ptr<const ObjectiveSpec> objective;
  NoiseModel noise;
  StepSchedule schedule;
  double alpha = 0.0;
  long long horizon = 1;
  std::uint64_t seed = 0;
  long long record_every = 1;
  bool geometric_grid = false;  // record at ~1.05^j points instead
  InitKind init = InitKind::PerWorkerRandom;
  double guard_threshold = 1e6;  // bound on ||u'X_n||, stability guard
  bool retain_mean_path = false; // keep u'X_n and u'G_n snapshots
};

// Iteration state: X holds one row per worker (plus the anchor row last
// for EASGD), v is the momentum buffer, n counts from 1.
struct SimState {
  Eigen::MatrixXd X;
  Eigen::MatrixXd v;
  long long n = 1;
  double alpha = 0.0;
  double max_u_norm = 0.0;
};

struct TrajectoryRecord {
  std::vector<long long> n;
  std::vector<double> eps;
  std::vector<double> grad_norm_sq;     // ||grad g(xbar_n)||^2
  std::vector<double> loss_avg_iterate; // g(xbar_n)
  std::vector<double> consensus_err;    // sum_i ||x^(i) - xbar||^2
  std::vector<double> u_v_norm;         // ||u' v_n||
  std::vector<double> z_subopt;         // g(z_n) - g*, NaN when unknown
  std::vector<double> wallclock_us;
  // retained only when cfg.retain_mean_path
  std::vector<Eigen::VectorXd> mean_path;       // u'X_n
  std::vector<Eigen::VectorXd> mean_grad_path;  // u'G(X_n, xi_n)
  double alpha = 0.0;
  long long horizon = 0;
  std::uint64_t seed = 0;
};

SimState init_state(const RunConfig& cfg);

// Average of worker rows; the EASGD anchor row is excluded.
Eigen::VectorXd average_iterate(const SimState& state, const RunConfig& cfg);

// One application of the momentum update:
//   v_n = alpha v_{n-1} + eps_n G(X_n, xi_n)
//   X_{n+1} = W_n (X_n - v_n)
// The buffer v is deliberately not mixed by W_n.
void step(SimState& state, const RunConfig& cfg, const RngStream& run_stream);

TrajectoryRecord run(const RunConfig& cfg);

// Recording grid for a config: multiples of record_every (or a geometric
// grid), always including 1 and horizon.
std::vector<long long> record_grid(const RunConfig& cfg);

}  // namespace dmsgd
