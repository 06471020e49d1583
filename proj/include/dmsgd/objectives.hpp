#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dmsgd/errors.hpp"
#include "dmsgd/rng.hpp"

namespace dmsgd {

enum class ObjectiveFamily { QuadraticConsensus, Logistic, SoftNonconvex };

enum class NoiseKind { Gaussian, Rademacher, None };

// Additive zero-mean per-coordinate gradient noise.
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double scale = 0.0;
};

struct AssumptionReport {
  double sigma0_sq_hat = 0.0;  // sum_i E||grad_i(x,xi) - grad_i(x)||^2
  double sigma1_sq_hat = 0.0;  // sup_x (1/m) sum_i ||grad_i(x) - grad(x)||^2
  double L_hat = 0.0;          // max Lipschitz ratio over probe pairs
  double M_hat = 0.0;          // max ||G(X)|| over probes
  int probes = 0;
};

// g(x) = (1/m) sum_i g_i(x), non-negative, continuously differentiable.
// Immutable after construction; gradient calls are pure given a stream.
class ObjectiveSpec {
 public:
  // g_i(x) = 1/2 (x - b_i)' A_i (x - b_i), A_i PSD.
  static std::shared_ptr<const ObjectiveSpec> quadratic_consensus(
      int dim, int m, double heterogeneity, std::uint64_t dataset_seed,
      double box_radius, double eig_lo = 2e-4, double eig_hi = 0.3);
  static std::shared_ptr<const ObjectiveSpec> quadratic_custom(
      std::vector<Eigen::MatrixXd> a, std::vector<Eigen::VectorXd> b,
      double box_radius);
  // Ridge-regularized logistic regression on per-worker synthetic data;
  // theta_star found by Newton descent at construction.
  static std::shared_ptr<const ObjectiveSpec> logistic(
      int dim, int m, double heterogeneity, std::uint64_t dataset_seed,
      double box_radius, int points_per_worker = 40, double ridge = 0.01);
  // g_i(x) = sum_j w_ij tanh^2(a_ij' x - c_ij): non-negative, bounded
  // gradient, non-convex with many stationary points.
  static std::shared_ptr<const ObjectiveSpec> soft_nonconvex(
      int dim, int m, double heterogeneity, std::uint64_t dataset_seed,
      double box_radius, int ridges_per_worker = 6);

  ObjectiveFamily family() const { return family_; }
  int dim() const { return dim_; }
  int workers() const { return m_; }
  double box_radius() const { return box_radius_; }
  const std::optional<Eigen::VectorXd>& theta_star() const { return theta_star_; }
  std::optional<double> g_star() const { return g_star_; }

  double eval_loss(const Eigen::VectorXd& x) const;          // g(x)
  double eval_worker_loss(int i, const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_worker(int i, const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_mean(const Eigen::VectorXd& x) const;  // grad g(x)

  // Row i of the result is grad g_i applied to row i of X.
  Eigen::MatrixXd grad_exact(const Eigen::MatrixXd& X) const;
  // grad_exact plus one noise draw per worker row; deterministic in
  // (stream, step).
  Eigen::MatrixXd grad_noisy(const NoiseModel& noise, const Eigen::MatrixXd& X,
                             const RngStream& stream, long long step) const;

  AssumptionReport estimate_assumptions(const NoiseModel& noise,
                                        int probe_count,
                                        const RngStream& stream) const;

 private:
  ObjectiveSpec() = default;

  ObjectiveFamily family_ = ObjectiveFamily::QuadraticConsensus;
  int dim_ = 0;
  int m_ = 0;
  double box_radius_ = 1.0;
  std::optional<Eigen::VectorXd> theta_star_;
  std::optional<double> g_star_;

  // QuadraticConsensus
  std::vector<Eigen::MatrixXd> quad_a_;
  std::vector<Eigen::VectorXd> quad_b_;
  // Logistic
  std::vector<Eigen::MatrixXd> logit_z_;   // per worker: points x dim
  std::vector<Eigen::VectorXd> logit_y_;   // labels in {-1, +1}
  double ridge_ = 0.0;
  // SoftNonconvex
  std::vector<Eigen::MatrixXd> ridge_dirs_;     // per worker: ridges x dim
  std::vector<Eigen::VectorXd> ridge_offsets_;  // c_ij
  std::vector<Eigen::VectorXd> ridge_weights_;  // w_ij >= 0
};

// One noise draw for worker row `worker` at `step`; zero mean by construction.
Eigen::VectorXd noise_draw(const NoiseModel& noise, int dim,
                           const RngStream& worker_stream, long long step);

}  // namespace dmsgd
