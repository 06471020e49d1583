#include "dmsgd/objectives.hpp"

#include <cmath>

namespace dmsgd {

namespace {

Eigen::VectorXd box_point(const RngStream& s, long long step, int dim,
                          double radius) {
  Eigen::VectorXd x(dim);
  for (int j = 0; j < dim; ++j) x[j] = radius * s.uniform_sym(step, j);
  return x;
}

double softplus(double t) {
  // log(1 + exp(t)) without overflow
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

Eigen::VectorXd noise_draw(const NoiseModel& noise, int dim,
                           const RngStream& worker_stream, long long step) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(dim);
  switch (noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::Gaussian:
      for (int j = 0; j < dim; ++j) {
        xi[j] = noise.scale * worker_stream.gaussian(step, j);
      }
      break;
    case NoiseKind::Rademacher:
      for (int j = 0; j < dim; ++j) {
        xi[j] = noise.scale * worker_stream.rademacher(step, j);
      }
      break;
  }
  return xi;
}

std::shared_ptr<const ObjectiveSpec> ObjectiveSpec::quadratic_consensus(
    int dim, int m, double heterogeneity, std::uint64_t dataset_seed,
    double box_radius, double eig_lo, double eig_hi) {
  if (dim < 1 || m < 1) throw BadParam("dim and m must be positive");
  if (eig_lo <= 0.0 || eig_hi < eig_lo) throw BadParam("bad eigenvalue range");
  RngStream gen(splitmix64(dataset_seed ^ 0x51A7C0DEULL));
  // Shared log-spaced curvature spectrum; per-worker heterogeneity enters
  // through the targets b_i. The near-flat directions keep the problem
  // merely convex at experiment horizons.
  Eigen::VectorXd diag(dim);
  for (int j = 0; j < dim; ++j) {
    const double t = dim > 1 ? static_cast<double>(j) / (dim - 1) : 1.0;
    diag[j] = eig_lo * std::pow(eig_hi / eig_lo, t);
  }
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::VectorXd> b;
  for (int i = 0; i < m; ++i) {
    RngStream ws = gen.child(static_cast<std::uint64_t>(i));
    Eigen::VectorXd bi(dim);
    for (int j = 0; j < dim; ++j) bi[j] = heterogeneity * ws.gaussian(1, j);
    a.push_back(diag.asDiagonal());
    b.push_back(bi);
  }
  return quadratic_custom(std::move(a), std::move(b), box_radius);
}

std::shared_ptr<const ObjectiveSpec> ObjectiveSpec::quadratic_custom(
    std::vector<Eigen::MatrixXd> a, std::vector<Eigen::VectorXd> b,
    double box_radius) {
  if (a.empty() || a.size() != b.size()) throw BadParam("need one (A_i, b_i) per worker");
  auto spec = std::shared_ptr<ObjectiveSpec>(new ObjectiveSpec());
  spec->family_ = ObjectiveFamily::QuadraticConsensus;
  spec->m_ = static_cast<int>(a.size());
  spec->dim_ = static_cast<int>(a[0].rows());
  spec->box_radius_ = box_radius;
  spec->quad_a_ = std::move(a);
  spec->quad_b_ = std::move(b);
  // theta_star solves (sum A_i) theta = sum A_i b_i
  Eigen::MatrixXd asum = Eigen::MatrixXd::Zero(spec->dim_, spec->dim_);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(spec->dim_);
  for (int i = 0; i < spec->m_; ++i) {
    asum += spec->quad_a_[i];
    rhs += spec->quad_a_[i] * spec->quad_b_[i];
  }
  Eigen::VectorXd theta = asum.norm() > 0.0
                              ? Eigen::VectorXd(asum.ldlt().solve(rhs))
                              : Eigen::VectorXd::Zero(spec->dim_).eval();
  spec->theta_star_ = theta;
  spec->g_star_ = spec->eval_loss(theta);
  return spec;
}

std::shared_ptr<const ObjectiveSpec> ObjectiveSpec::logistic(
    int dim, int m, double heterogeneity, std::uint64_t dataset_seed,
    double box_radius, int points_per_worker, double ridge) {
  if (dim < 1 || m < 1 || points_per_worker < 1) throw BadParam("bad logistic sizes");
  if (ridge <= 0.0) throw BadParam("ridge must be positive for a unique optimum");
  auto spec = std::shared_ptr<ObjectiveSpec>(new ObjectiveSpec());
  spec->family_ = ObjectiveFamily::Logistic;
  spec->dim_ = dim;
  spec->m_ = m;
  spec->box_radius_ = box_radius;
  spec->ridge_ = ridge;

  RngStream gen(splitmix64(dataset_seed ^ 0x10615C0DEULL));
  Eigen::VectorXd w_true(dim);
  for (int j = 0; j < dim; ++j) w_true[j] = gen.gaussian(0, j);
  for (int i = 0; i < m; ++i) {
    RngStream ws = gen.child(static_cast<std::uint64_t>(i) + 1);
    Eigen::VectorXd shift(dim);
    for (int j = 0; j < dim; ++j) shift[j] = heterogeneity * ws.gaussian(0, j);
    Eigen::MatrixXd z(points_per_worker, dim);
    Eigen::VectorXd y(points_per_worker);
    for (int r = 0; r < points_per_worker; ++r) {
      for (int j = 0; j < dim; ++j) {
        z(r, j) = ws.gaussian(r + 1, j) + shift[j];
      }
      const double margin = z.row(r).dot(w_true) + 0.5 * ws.gaussian(r + 1, dim);
      y[r] = margin >= 0 ? 1.0 : -1.0;
    }
    spec->logit_z_.push_back(std::move(z));
    spec->logit_y_.push_back(std::move(y));
  }

  // Newton descent to the unique ridge-regularized optimum.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd grad = spec->grad_mean(theta);
    if (grad.norm() <= 1e-12) break;
    Eigen::MatrixXd hess = ridge * Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 0; i < m; ++i) {
      const auto& z = spec->logit_z_[i];
      const auto& y = spec->logit_y_[i];
      const double scale = 1.0 / (m * z.rows());
      for (int r = 0; r < z.rows(); ++r) {
        const double t = -y[r] * z.row(r).dot(theta);
        const double sig = 1.0 / (1.0 + std::exp(-t));
        hess += scale * sig * (1.0 - sig) * z.row(r).transpose() * z.row(r);
      }
    }
    theta -= hess.ldlt().solve(grad);
  }
  if (spec->grad_mean(theta).norm() > 1e-10) {
    throw BadParam("logistic optimum solve did not reach 1e-10 gradient norm");
  }
  spec->theta_star_ = theta;
  spec->g_star_ = spec->eval_loss(theta);
  return spec;
}

std::shared_ptr<const ObjectiveSpec> ObjectiveSpec::soft_nonconvex(
    int dim, int m, double heterogeneity, std::uint64_t dataset_seed,
    double box_radius, int ridges_per_worker) {
  if (dim < 1 || m < 1 || ridges_per_worker < 1) throw BadParam("bad sizes");
  auto spec = std::shared_ptr<ObjectiveSpec>(new ObjectiveSpec());
  spec->family_ = ObjectiveFamily::SoftNonconvex;
  spec->dim_ = dim;
  spec->m_ = m;
  spec->box_radius_ = box_radius;
  RngStream gen(splitmix64(dataset_seed ^ 0x50F7C0DEULL));
  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int i = 0; i < m; ++i) {
    RngStream ws = gen.child(static_cast<std::uint64_t>(i));
    Eigen::MatrixXd dirs(ridges_per_worker, dim);
    Eigen::VectorXd offsets(ridges_per_worker);
    Eigen::VectorXd weights(ridges_per_worker);
    for (int r = 0; r < ridges_per_worker; ++r) {
      for (int j = 0; j < dim; ++j) {
        dirs(r, j) = inv_sqrt_dim * ws.gaussian(r, j);
      }
      offsets[r] = heterogeneity * ws.uniform_sym(r, 2 * dim + 1);
      weights[r] = 0.5 + ws.uniform(r, 2 * dim + 2);
    }
    spec->ridge_dirs_.push_back(std::move(dirs));
    spec->ridge_offsets_.push_back(std::move(offsets));
    spec->ridge_weights_.push_back(std::move(weights));
  }
  return spec;
}

double ObjectiveSpec::eval_worker_loss(int i, const Eigen::VectorXd& x) const {
  switch (family_) {
    case ObjectiveFamily::QuadraticConsensus: {
      const Eigen::VectorXd d = x - quad_b_[i];
      return 0.5 * d.dot(quad_a_[i] * d);
    }
    case ObjectiveFamily::Logistic: {
      const auto& z = logit_z_[i];
      const auto& y = logit_y_[i];
      double acc = 0.0;
      for (int r = 0; r < z.rows(); ++r) {
        acc += softplus(-y[r] * z.row(r).dot(x));
      }
      return acc / z.rows() + 0.5 * ridge_ * x.squaredNorm();
    }
    case ObjectiveFamily::SoftNonconvex: {
      const auto& dirs = ridge_dirs_[i];
      double acc = 0.0;
      for (int r = 0; r < dirs.rows(); ++r) {
        const double t = std::tanh(dirs.row(r).dot(x) - ridge_offsets_[i][r]);
        acc += ridge_weights_[i][r] * t * t;
      }
      return acc;
    }
  }
  return 0.0;
}

double ObjectiveSpec::eval_loss(const Eigen::VectorXd& x) const {
  double acc = 0.0;
  for (int i = 0; i < m_; ++i) acc += eval_worker_loss(i, x);
  return acc / m_;
}

Eigen::VectorXd ObjectiveSpec::grad_worker(int i, const Eigen::VectorXd& x) const {
  switch (family_) {
    case ObjectiveFamily::QuadraticConsensus:
      return quad_a_[i] * (x - quad_b_[i]);
    case ObjectiveFamily::Logistic: {
      const auto& z = logit_z_[i];
      const auto& y = logit_y_[i];
      Eigen::VectorXd g = ridge_ * x;
      for (int r = 0; r < z.rows(); ++r) {
        const double t = -y[r] * z.row(r).dot(x);
        const double sig = 1.0 / (1.0 + std::exp(-t));
        g -= (y[r] * sig / z.rows()) * z.row(r).transpose();
      }
      return g;
    }
    case ObjectiveFamily::SoftNonconvex: {
      const auto& dirs = ridge_dirs_[i];
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
      for (int r = 0; r < dirs.rows(); ++r) {
        const double u = dirs.row(r).dot(x) - ridge_offsets_[i][r];
        const double th = std::tanh(u);
        const double sech_sq = 1.0 - th * th;
        g += (2.0 * ridge_weights_[i][r] * th * sech_sq) * dirs.row(r).transpose();
      }
      return g;
    }
  }
  return Eigen::VectorXd::Zero(dim_);
}

Eigen::VectorXd ObjectiveSpec::grad_mean(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (int i = 0; i < m_; ++i) g += grad_worker(i, x);
  return g / m_;
}

Eigen::MatrixXd ObjectiveSpec::grad_exact(const Eigen::MatrixXd& X) const {
  if (X.rows() != m_ || X.cols() != dim_) {
    throw BadParam("grad_exact expects an m x N stacked matrix");
  }
  Eigen::MatrixXd g(m_, dim_);
  for (int i = 0; i < m_; ++i) {
    g.row(i) = grad_worker(i, X.row(i).transpose()).transpose();
  }
  return g;
}

Eigen::MatrixXd ObjectiveSpec::grad_noisy(const NoiseModel& noise,
                                          const Eigen::MatrixXd& X,
                                          const RngStream& stream,
                                          long long step) const {
  Eigen::MatrixXd g = grad_exact(X);
  if (noise.kind == NoiseKind::None || noise.scale == 0.0) return g;
  for (int i = 0; i < m_; ++i) {
    const RngStream ws = stream.child(static_cast<std::uint64_t>(i));
    g.row(i) += noise_draw(noise, dim_, ws, step).transpose();
  }
  return g;
}

AssumptionReport ObjectiveSpec::estimate_assumptions(
    const NoiseModel& noise, int probe_count, const RngStream& stream) const {
  if (probe_count < 100) throw BadParam("need at least 100 probes");
  AssumptionReport rep;
  rep.probes = probe_count;

  const RngStream probe_stream = stream.child(1);
  const RngStream noise_stream = stream.child(2);
  const RngStream pair_stream = stream.child(3);

  double sigma0_acc = 0.0;
  Eigen::MatrixXd prev_stack;
  Eigen::MatrixXd prev_grad;
  for (int p = 0; p < probe_count; ++p) {
    const Eigen::VectorXd x = box_point(probe_stream, p, dim_, box_radius_);
    const Eigen::VectorXd gbar = grad_mean(x);
    double dev = 0.0;
    for (int i = 0; i < m_; ++i) {
      dev += (grad_worker(i, x) - gbar).squaredNorm();
      const RngStream ws = noise_stream.child(static_cast<std::uint64_t>(i));
      sigma0_acc += noise_draw(noise, dim_, ws, p).squaredNorm();
    }
    rep.sigma1_sq_hat = std::max(rep.sigma1_sq_hat, dev / m_);

    // Stacked probe X for the Lipschitz/boundedness constants.
    Eigen::MatrixXd stack(m_, dim_);
    for (int i = 0; i < m_; ++i) {
      stack.row(i) =
          box_point(pair_stream.child(static_cast<std::uint64_t>(i)), p, dim_,
                    box_radius_)
              .transpose();
    }
    const Eigen::MatrixXd grad = grad_exact(stack);
    rep.M_hat = std::max(rep.M_hat, grad.norm());
    if (p > 0) {
      const double dx = (stack - prev_stack).norm();
      if (dx > 1e-12) {
        rep.L_hat = std::max(rep.L_hat, (grad - prev_grad).norm() / dx);
      }
    }
    prev_stack = stack;
    prev_grad = grad;
  }
  rep.sigma0_sq_hat =
      noise.kind == NoiseKind::None ? 0.0 : sigma0_acc / probe_count;
  return rep;
}

}  // namespace dmsgd
