#include "dmsgd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace dmsgd {

namespace {

bool is_easgd(const RunConfig& cfg) {
  return cfg.comm.matrix.kind() == MixingKind::Easgd;
}

// Stacked gradient, with the zero anchor row appended for EASGD.
Eigen::MatrixXd stacked_gradient(const RunConfig& cfg, const Eigen::MatrixXd& X,
                                 const RngStream& run_stream, long long n) {
  const int m = cfg.objective->workers();
  const int N = cfg.objective->dim();
  if (!is_easgd(cfg)) {
    return cfg.objective->grad_noisy(cfg.noise, X, run_stream, n);
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m + 1, N);
  g.topRows(m) =
      cfg.objective->grad_noisy(cfg.noise, X.topRows(m), run_stream, n);
  return g;
}

}  // namespace

SimState init_state(const RunConfig& cfg) {
  const int m = cfg.objective->workers();
  const int N = cfg.objective->dim();
  if (cfg.comm.matrix.workers() != m) {
    throw BadConfig("topology and objective disagree on worker count");
  }
  if (cfg.horizon < 1 || cfg.record_every < 1 || cfg.record_every > cfg.horizon) {
    throw BadConfig("need horizon >= 1 and 1 <= record_every <= horizon");
  }
  if (cfg.alpha < 0.0 || cfg.alpha >= 1.0) {
    throw BadConfig("momentum coefficient must lie in [0, 1)");
  }
  const int d = is_easgd(cfg) ? m + 1 : m;

  SimState st;
  st.alpha = cfg.alpha;
  st.n = 1;
  st.X = Eigen::MatrixXd::Zero(d, N);
  st.v = Eigen::MatrixXd::Zero(d, N);

  const RngStream init_stream = RngStream(cfg.seed).child(0xC0FFEE);
  const double r = cfg.objective->box_radius();
  switch (cfg.init) {
    case InitKind::ZeroConsensus:
      break;
    case InitKind::RandomBox: {
      // one shared random point for all workers
      for (int j = 0; j < N; ++j) {
        const double xj = r * init_stream.uniform_sym(0, j);
        for (int i = 0; i < m; ++i) st.X(i, j) = xj;
      }
      break;
    }
    case InitKind::PerWorkerRandom:
      for (int i = 0; i < m; ++i) {
        const RngStream ws = init_stream.child(static_cast<std::uint64_t>(i));
        for (int j = 0; j < N; ++j) st.X(i, j) = r * ws.uniform_sym(0, j);
      }
      break;
  }
  if (is_easgd(cfg)) {
    st.X.row(m) = st.X.topRows(m).colwise().mean();  // anchor starts at x-bar
  }
  return st;
}

Eigen::VectorXd average_iterate(const SimState& state, const RunConfig& cfg) {
  const int m = cfg.objective->workers();
  return state.X.topRows(m).colwise().mean().transpose();
}

void step(SimState& state, const RunConfig& cfg, const RngStream& run_stream) {
  const long long n = state.n;
  const double eps = cfg.schedule.step_at(n);
  const Eigen::MatrixXd g = stacked_gradient(cfg, state.X, run_stream, n);

  state.v = cfg.alpha * state.v + eps * g;
  if (cfg.comm.mixes_at(n)) {
    state.X = cfg.comm.matrix.entries() * (state.X - state.v);
  } else {
    state.X -= state.v;
  }
  state.n = n + 1;

  const double u_norm = average_iterate(state, cfg).norm();
  state.max_u_norm = std::max(state.max_u_norm, u_norm);
  if (!state.X.allFinite() || u_norm > cfg.guard_threshold) {
    std::ostringstream oss;
    oss << "trajectory diverged at step " << n << " (||u'X|| = " << u_norm << ")";
    throw NumericalDivergence(oss.str());
  }
}

std::vector<long long> record_grid(const RunConfig& cfg) {
  std::vector<long long> grid;
  grid.push_back(1);
  if (cfg.geometric_grid) {
    double x = 1.0;
    while (true) {
      x = std::max(x * 1.05, x + 1.0);
      const auto n = static_cast<long long>(x);
      if (n >= cfg.horizon) break;
      grid.push_back(n);
    }
    // decade points are always present so rate fits land on exact powers of 10
    for (long long p = 10; p < cfg.horizon; p *= 10) grid.push_back(p);
  } else {
    for (long long n = cfg.record_every; n < cfg.horizon; n += cfg.record_every) {
      if (n > 1) grid.push_back(n);
    }
  }
  grid.push_back(cfg.horizon);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

TrajectoryRecord run(const RunConfig& cfg) {
  SimState st = init_state(cfg);
  const RngStream run_stream = RngStream(cfg.seed).child(0x0DDBA11);

  TrajectoryRecord rec;
  rec.alpha = cfg.alpha;
  rec.horizon = cfg.horizon;
  rec.seed = cfg.seed;
  const std::vector<long long> grid = record_grid(cfg);
  std::size_t gpos = 0;

  const bool has_star = cfg.objective->theta_star().has_value();
  Eigen::VectorXd prev_mean = average_iterate(st, cfg);
  const auto t0 = std::chrono::steady_clock::now();

  for (long long n = 1; n <= cfg.horizon; ++n) {
    const Eigen::VectorXd xbar = average_iterate(st, cfg);
    if (gpos < grid.size() && grid[gpos] == n) {
      ++gpos;
      rec.n.push_back(n);
      rec.eps.push_back(cfg.schedule.step_at(n));
      const Eigen::VectorXd gbar = cfg.objective->grad_mean(xbar);
      rec.grad_norm_sq.push_back(gbar.squaredNorm());
      rec.loss_avg_iterate.push_back(cfg.objective->eval_loss(xbar));
      const int m = cfg.objective->workers();
      double cons = 0.0;
      for (int i = 0; i < m; ++i) {
        cons += (st.X.row(i).transpose() - xbar).squaredNorm();
      }
      rec.consensus_err.push_back(cons);
      rec.u_v_norm.push_back(
          (st.v.topRows(m).colwise().mean()).norm());
      if (has_star) {
        // z_n = (u'X_n - alpha u'X_{n-1}) / (1 - alpha); z_1 = u'X_1
        const Eigen::VectorXd z =
            n == 1 ? xbar
                   : ((xbar - cfg.alpha * prev_mean) / (1.0 - cfg.alpha));
        rec.z_subopt.push_back(cfg.objective->eval_loss(z) -
                               *cfg.objective->g_star());
      } else {
        rec.z_subopt.push_back(std::numeric_limits<double>::quiet_NaN());
      }
      rec.wallclock_us.push_back(
          std::chrono::duration<double, std::micro>(
              std::chrono::steady_clock::now() - t0)
              .count());
      if (cfg.retain_mean_path) {
        rec.mean_path.push_back(xbar);
        const Eigen::MatrixXd g = cfg.objective->grad_noisy(
            cfg.noise,
            st.X.topRows(cfg.objective->workers()), run_stream, n);
        rec.mean_grad_path.push_back(g.colwise().mean().transpose());
      }
    }
    prev_mean = xbar;
    if (n < cfg.horizon) {
      step(st, cfg, run_stream);
    }
  }
  return rec;
}

}  // namespace dmsgd
