#include "dmsgd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dmsgd {

namespace {

void mean_and_stderr(const std::vector<std::vector<double>>& per_record,
                     std::size_t grid_size, std::vector<double>& mean,
                     std::vector<double>& se) {
  const auto r = static_cast<double>(per_record.size());
  mean.assign(grid_size, 0.0);
  se.assign(grid_size, 0.0);
  for (const auto& rec : per_record) {
    for (std::size_t j = 0; j < grid_size; ++j) mean[j] += rec[j];
  }
  for (auto& v : mean) v /= r;
  if (per_record.size() < 2) return;
  for (const auto& rec : per_record) {
    for (std::size_t j = 0; j < grid_size; ++j) {
      const double d = rec[j] - mean[j];
      se[j] += d * d;
    }
  }
  for (auto& v : se) v = std::sqrt(v / (r - 1.0) / r);
}

}  // namespace

EnsembleStats ensemble(const std::vector<TrajectoryRecord>& records) {
  if (records.size() < 2) throw GridMismatch("need at least 2 records");
  const auto& grid = records[0].n;
  for (const auto& r : records) {
    if (r.n != grid) throw GridMismatch("records disagree on the grid");
  }
  EnsembleStats st;
  st.grid = grid;
  st.seeds = static_cast<int>(records.size());

  auto collect = [&](auto field) {
    std::vector<std::vector<double>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(field(r));
    return rows;
  };
  mean_and_stderr(collect([](const TrajectoryRecord& r) { return r.grad_norm_sq; }),
                  grid.size(), st.mean_grad_norm_sq, st.stderr_grad_norm_sq);
  mean_and_stderr(collect([](const TrajectoryRecord& r) { return r.consensus_err; }),
                  grid.size(), st.mean_consensus, st.stderr_consensus);
  mean_and_stderr(collect([](const TrajectoryRecord& r) { return r.loss_avg_iterate; }),
                  grid.size(), st.mean_loss, st.stderr_loss);
  mean_and_stderr(collect([](const TrajectoryRecord& r) { return r.z_subopt; }),
                  grid.size(), st.mean_z_subopt, st.stderr_z_subopt);

  // TAMS on the recorded grid: exact running average when the grid has unit
  // spacing, trapezoidal prefix integral divided by n otherwise.
  st.tams.resize(grid.size());
  double integral = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j == 0) {
      integral = st.mean_grad_norm_sq[0];
    } else {
      const auto gap = static_cast<double>(grid[j] - grid[j - 1]);
      integral +=
          0.5 * gap * (st.mean_grad_norm_sq[j] + st.mean_grad_norm_sq[j - 1]);
    }
    st.tams[j] = integral / static_cast<double>(grid[j]);
  }
  return st;
}

std::vector<double> exhaustive_expectation(const RunConfig& cfg) {
  if (cfg.noise.kind != NoiseKind::Rademacher &&
      cfg.noise.kind != NoiseKind::None) {
    throw BadParam("enumeration oracle needs Rademacher or no noise");
  }
  if (cfg.comm.matrix.kind() == MixingKind::Easgd) {
    throw BadParam("enumeration oracle covers worker-only topologies");
  }
  const int m = cfg.objective->workers();
  const int N = cfg.objective->dim();
  const long long h = cfg.horizon;
  const int bits_per_step = cfg.noise.kind == NoiseKind::None ? 0 : m * N;
  const long long total_bits = bits_per_step * h;
  if (total_bits > 24) throw TooLarge("noise sequence space exceeds 2^24");

  const long long sequences = 1LL << total_bits;
  std::vector<double> acc(static_cast<std::size_t>(h), 0.0);
  const Eigen::MatrixXd x1 = init_state(cfg).X;

  for (long long seq = 0; seq < sequences; ++seq) {
    Eigen::MatrixXd x = x1;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m, N);
    for (long long n = 1; n <= h; ++n) {
      const Eigen::VectorXd xbar = x.colwise().mean().transpose();
      acc[static_cast<std::size_t>(n - 1)] +=
          cfg.objective->grad_mean(xbar).squaredNorm();
      if (n == h) break;
      Eigen::MatrixXd g = cfg.objective->grad_exact(x);
      if (bits_per_step > 0) {
        const long long base = (n - 1) * bits_per_step;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < N; ++j) {
            const long long bit = base + i * N + j;
            g(i, j) += (seq >> bit) & 1LL ? cfg.noise.scale : -cfg.noise.scale;
          }
        }
      }
      const double eps = cfg.schedule.step_at(n);
      v = cfg.alpha * v + eps * g;
      if (cfg.comm.mixes_at(n)) {
        x = cfg.comm.matrix.entries() * (x - v);
      } else {
        x -= v;
      }
    }
  }
  for (auto& a : acc) a /= static_cast<double>(sequences);
  return acc;
}

std::vector<HittingTimeSample> hitting_times(
    const std::vector<TrajectoryRecord>& records, double a0) {
  if (a0 <= 0.0) throw BadParam("hitting threshold must be positive");
  std::vector<HittingTimeSample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    HittingTimeSample s;
    s.a0 = a0;
    s.alpha = r.alpha;
    s.censored = true;
    s.tau = r.horizon;
    for (std::size_t j = 0; j < r.n.size(); ++j) {
      if (r.grad_norm_sq[j] < a0) {
        s.tau = r.n[j];
        s.censored = false;
        break;
      }
    }
    out.push_back(s);
  }
  return out;
}

std::vector<CcdfRow> tail_ccdf(const std::vector<HittingTimeSample>& samples,
                               const StepSchedule& schedule) {
  std::size_t uncensored = 0;
  for (const auto& s : samples) {
    if (!s.censored) ++uncensored;
  }
  if (uncensored < 50) {
    throw InsufficientSamples("need at least 50 uncensored hitting times");
  }
  std::vector<long long> taus;
  long long horizon = 0;
  for (const auto& s : samples) {
    horizon = std::max(horizon, s.tau);
    if (!s.censored) taus.push_back(s.tau);
  }
  std::sort(taus.begin(), taus.end());

  std::vector<CcdfRow> rows;
  const auto total = static_cast<double>(samples.size());
  for (long long n = 1; n <= horizon; ++n) {
    const auto hit_before =
        std::lower_bound(taus.begin(), taus.end(), n) - taus.begin();
    CcdfRow row;
    row.n = n;
    row.eps_partial_sum = schedule.partial_sum(n);
    row.ccdf = (total - static_cast<double>(hit_before)) / total;
    rows.push_back(row);
    if (row.ccdf <= 0.0) break;
  }
  return rows;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw BadParam("fit needs >= 2 points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxx += (x[j] - mx) * (x[j] - mx);
    sxy += (x[j] - mx) * (y[j] - my);
    syy += (y[j] - my) * (y[j] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double e = y[j] - (f.intercept + f.slope * x[j]);
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

RateFit rate_fit(const std::vector<long long>& t_grid,
                 const std::vector<double>& subopt) {
  if (t_grid.size() != subopt.size() || t_grid.size() < 2) {
    throw BadParam("rate fit needs matching grids with >= 2 points");
  }
  std::vector<double> x, y;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (subopt[j] <= 0.0) {
      throw BadRegime("non-positive suboptimality; theta_star suspect");
    }
    const auto t = static_cast<double>(t_grid[j]);
    x.push_back(std::log(std::log(t) / std::sqrt(t)));
    y.push_back(std::log(subopt[j]));
  }
  const LineFit f = fit_line(x, y);
  RateFit rf;
  rf.t_grid = t_grid;
  rf.subopt = subopt;
  rf.slope = f.slope;
  rf.intercept = f.intercept;
  rf.r2 = f.r2;
  return rf;
}

std::vector<MScalingRow> m_scaling_check(const std::vector<int>& ms,
                                         const std::vector<RateFit>& fits) {
  if (ms.size() != fits.size()) throw BadParam("one fit per m required");
  std::vector<MScalingRow> rows;
  for (std::size_t j = 0; j < ms.size(); ++j) {
    // slope-1 fit: prefactor = geometric mean of subopt / (ln T / sqrt T)
    double acc = 0.0;
    for (std::size_t i = 0; i < fits[j].t_grid.size(); ++i) {
      const auto t = static_cast<double>(fits[j].t_grid[i]);
      acc += std::log(fits[j].subopt[i]) - std::log(std::log(t) / std::sqrt(t));
    }
    MScalingRow row;
    row.m = ms[j];
    row.prefactor = std::exp(acc / static_cast<double>(fits[j].t_grid.size()));
    rows.push_back(row);
  }
  return rows;
}

ZSequence z_sequence(const TrajectoryRecord& record, double alpha) {
  if (record.mean_path.empty()) {
    throw BadParam("record did not retain u'X snapshots");
  }
  ZSequence zs;
  zs.n = record.n;
  zs.z.reserve(record.mean_path.size());
  for (std::size_t j = 0; j < record.mean_path.size(); ++j) {
    if (j == 0 || alpha == 0.0) {
      zs.z.push_back(record.mean_path[j]);
    } else {
      zs.z.push_back((record.mean_path[j] - alpha * record.mean_path[j - 1]) /
                     (1.0 - alpha));
    }
  }
  // One-step drift identity z_{n+1} - z_n = -eps_n u'G_n / (1-alpha),
  // checkable only on a unit-spaced grid with gradient snapshots.
  if (!record.mean_grad_path.empty()) {
    double worst = 0.0;
    bool any = false;
    for (std::size_t j = 0; j + 1 < zs.z.size(); ++j) {
      if (record.n[j + 1] != record.n[j] + 1) continue;
      const Eigen::VectorXd lhs = zs.z[j + 1] - zs.z[j];
      const Eigen::VectorXd rhs =
          -record.eps[j] / (1.0 - alpha) * record.mean_grad_path[j];
      worst = std::max(worst, (lhs - rhs).norm());
      any = true;
    }
    if (any) zs.max_identity_residual = worst;
  }
  return zs;
}

ConsensusBoundCheck consensus_bound_check(const EnsembleStats& stats,
                                          const StepSchedule& schedule,
                                          double lambda0, int period_k,
                                          double alpha) {
  if (stats.grid.empty()) throw BadParam("empty ensemble");
  ConsensusBoundCheck chk;
  const double alpha1 = 0.5 * (1.0 + alpha * alpha);  // alpha^2 + (1-alpha^2)/2
  const double lam_per_step =
      lambda0 > 0.0 ? std::pow(lambda0, 1.0 / period_k) : 0.0;
  chk.kappa = std::max(lam_per_step, alpha1);

  // envelope_n = sum_t kappa^(n-t) eps_t^2, by running recursion
  const long long horizon = stats.grid.back();
  std::vector<double> envelope_on_grid(stats.grid.size());
  double s = 0.0;
  std::size_t gpos = 0;
  for (long long n = 1; n <= horizon; ++n) {
    const double eps = schedule.step_at(n);
    s = chk.kappa * s + eps * eps;
    if (gpos < stats.grid.size() && stats.grid[gpos] == n) {
      envelope_on_grid[gpos] = s;
      ++gpos;
    }
  }

  const std::size_t fit_end = std::max<std::size_t>(1, stats.grid.size() / 3);
  for (std::size_t j = 0; j < fit_end; ++j) {
    if (envelope_on_grid[j] > 0.0) {
      chk.c_fit = std::max(chk.c_fit, stats.mean_consensus[j] / envelope_on_grid[j]);
    }
  }
  for (std::size_t j = fit_end; j < stats.grid.size(); ++j) {
    ++chk.checked;
    const double bound = chk.c_fit * envelope_on_grid[j];
    if (stats.mean_consensus[j] > bound) {
      ++chk.violations;
      if (bound > 0.0) {
        chk.worst_excess =
            std::max(chk.worst_excess, stats.mean_consensus[j] / bound - 1.0);
      }
    }
  }
  chk.pass = chk.checked > 0 &&
             chk.violations <= static_cast<int>(0.05 * chk.checked) &&
             chk.worst_excess <= 0.05;
  return chk;
}

double rank_sum_p_less(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw BadParam("rank test needs samples");
  struct Tagged {
    double v;
    int group;
  };
  std::vector<Tagged> all;
  all.reserve(a.size() + b.size());
  for (double v : a) all.push_back({v, 0});
  for (double v : b) all.push_back({v, 1});
  std::sort(all.begin(), all.end(),
            [](const Tagged& x, const Tagged& y) { return x.v < y.v; });

  // midranks with tie handling
  std::vector<double> rank(all.size());
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j + 1 < all.size() && all[j + 1].v == all[i].v) ++j;
    const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) rank[k] = mid;
    i = j + 1;
  }
  double ra = 0.0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k].group == 0) ra += rank[k];
  }
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double u = ra - na * (na + 1.0) / 2.0;
  const double mean_u = na * nb / 2.0;
  const double sd_u = std::sqrt(na * nb * (na + nb + 1.0) / 12.0);
  const double z = (u - mean_u) / sd_u;
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace dmsgd
