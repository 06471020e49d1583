#include "dmsgd/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "dmsgd/svg.hpp"

namespace dmsgd {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCsvSchema = "# dmsgd-csv schema=1";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
  }
  fs::rename(tmp, path);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string cell_name(const CellKey& key) {
  std::ostringstream oss;
  oss << "alpha" << key.alpha << "_m" << key.m;
  return oss.str();
}

// log-CCDF slope against the step partial sum, restricted to rows with
// ccdf in (0.02, 0.98) so the flat head and empty tail do not dominate
double ccdf_slope(const std::vector<CcdfRow>& rows) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.ccdf > 0.02 && r.ccdf < 0.98) {
      x.push_back(r.eps_partial_sum);
      y.push_back(std::log(r.ccdf));
    }
  }
  if (x.size() < 2) return 0.0;
  return fit_line(x, y).slope;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t cell,
                             int replicate) {
  return RngStream(master_seed)
      .child(static_cast<std::uint64_t>(cell) + 1)
      .child(static_cast<std::uint64_t>(replicate) + 1)
      .seed();
}

RunConfig make_run_config(const CampaignConfig& cfg, double alpha, int m,
                          std::uint64_t seed) {
  RunConfig rc{CommSchedule{cfg.topology.k, build_topology(cfg.topology, m)},
               build_objective(cfg.objective, m),
               cfg.objective.noise,
               build_schedule(cfg.schedule, m),
               alpha,
               cfg.campaign.horizon,
               seed,
               cfg.campaign.record_every,
               cfg.campaign.geometric_grid,
               parse_init(cfg.campaign.init),
               cfg.campaign.guard_threshold,
               false};
  return rc;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  CampaignResult result;
  result.config = cfg;

  std::vector<int> ms = cfg.campaign.ms;
  if (ms.empty()) ms.push_back(cfg.topology.m);

  std::size_t index = 0;
  for (const int m : ms) {
    for (const double alpha : cfg.campaign.alphas) {
      CellResult cell;
      cell.key = CellKey{alpha, m, index++};
      cell.records.resize(cfg.campaign.seeds);
      result.cells.push_back(std::move(cell));
    }
  }

  struct Task {
    std::size_t cell;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    for (int r = 0; r < cfg.campaign.seeds; ++r) tasks.push_back({c, r});
  }

  int workers = cfg.campaign.parallelism;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  std::vector<std::string> task_errors(tasks.size());
  auto worker_fn = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      CellResult& cell = result.cells[tasks[t].cell];
      try {
        RunConfig rc = make_run_config(cfg, cell.key.alpha, cell.key.m,
                                       replicate_seed(cfg.campaign.master_seed,
                                                      cell.key.index,
                                                      tasks[t].rep));
        cell.records[tasks[t].rep] = run(rc);
      } catch (const std::exception& e) {
        task_errors[t] = e.what();
      }
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!task_errors[t].empty()) {
      CellResult& cell = result.cells[tasks[t].cell];
      if (!cell.error.empty()) cell.error += "; ";
      cell.error += task_errors[t];
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  // Post-processing: per-cell statistics by regime.
  for (auto& cell : result.cells) {
    cell.wallclock_s = wall;
    if (!cell.error.empty()) continue;
    try {
      if (cell.records.size() >= 2) cell.stats = ensemble(cell.records);
      std::optional<double> g_star;
      if (cfg.objective.family != "soft_nonconvex") {
        g_star = build_objective(cfg.objective, cell.key.m)->g_star();
      }
      if (cfg.schedule.regime == "rate" && cell.stats && g_star) {
        std::vector<long long> t_grid;
        std::vector<double> subopt;
        for (std::size_t j = 0; j < cell.stats->grid.size(); ++j) {
          const long long n = cell.stats->grid[j];
          long long p = 100;
          while (p < n) p *= 10;
          if (p == n) {
            t_grid.push_back(n);
            subopt.push_back(cell.stats->mean_loss[j] - *g_star);
          }
        }
        if (t_grid.size() >= 2) cell.fit = rate_fit(t_grid, subopt);
      }
      if (cfg.schedule.regime == "hitting" && cell.stats) {
        double a0 = cfg.campaign.a0_frac * cell.stats->mean_grad_norm_sq[0];
        if (!cfg.campaign.a0s.empty()) a0 = cfg.campaign.a0s[0];
        cell.a0 = a0;
        cell.hits = hitting_times(cell.records, a0);
        const StepSchedule sched = build_schedule(cfg.schedule, cell.key.m);
        cell.ccdf = tail_ccdf(cell.hits, sched);
      }
      if (cfg.schedule.regime == "convergence" && cell.stats) {
        const MixingMatrix w = build_topology(cfg.topology, cell.key.m);
        const StepSchedule sched = build_schedule(cfg.schedule, cell.key.m);
        cell.bound = consensus_bound_check(*cell.stats, sched, w.lambda0(),
                                           cfg.topology.k, cell.key.alpha);
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }

  // Report: pass/fail lines per regime-level property.
  auto& lines = result.report_lines;
  bool all_pass = true;
  lines.push_back("campaign report");
  for (const auto& cell : result.cells) {
    if (!cell.error.empty()) {
      lines.push_back("FAIL cell " + cell_name(cell.key) + ": " + cell.error);
      all_pass = false;
    }
  }
  if (cfg.schedule.regime == "convergence") {
    for (const auto& cell : result.cells) {
      if (!cell.stats || !cell.error.empty()) continue;
      const auto& st = *cell.stats;
      // relative decay of the mean-square gradient norm across the grid
      std::size_t j0 = 0;
      while (j0 + 1 < st.grid.size() && st.grid[j0] < 100) ++j0;
      const double head = st.mean_grad_norm_sq[j0];
      const double tail = st.mean_grad_norm_sq.back();
      const double cons_head = st.mean_consensus[j0];
      const double cons_tail = st.mean_consensus.back();
      std::ostringstream oss;
      const bool decay_ok = tail <= 1e-2 * head;
      const bool cons_ok = cons_tail <= 1e-3 * std::max(cons_head, 1e-300);
      oss << (decay_ok ? "PASS" : "FAIL") << " lims-decay "
          << cell_name(cell.key) << " grad[" << st.grid[j0] << "]=" << head
          << " grad[" << st.grid.back() << "]=" << tail;
      lines.push_back(oss.str());
      std::ostringstream oss2;
      oss2 << (cons_ok ? "PASS" : "FAIL") << " consensus-decay "
           << cell_name(cell.key) << " cons[" << st.grid[j0]
           << "]=" << cons_head << " cons[" << st.grid.back()
           << "]=" << cons_tail;
      lines.push_back(oss2.str());
      all_pass = all_pass && decay_ok && cons_ok;
      if (cell.bound) {
        std::ostringstream oss3;
        oss3 << (cell.bound->pass ? "PASS" : "FAIL") << " consensus-bound "
             << cell_name(cell.key) << " C=" << cell.bound->c_fit
             << " kappa=" << cell.bound->kappa
             << " violations=" << cell.bound->violations << "/"
             << cell.bound->checked << " worst_excess="
             << cell.bound->worst_excess;
        lines.push_back(oss3.str());
        all_pass = all_pass && cell.bound->pass;
      }
    }
  }
  if (cfg.schedule.regime == "rate") {
    for (const auto& cell : result.cells) {
      if (!cell.fit) continue;
      const bool ok =
          cell.fit->slope >= 0.7 && cell.fit->slope <= 1.3 && cell.fit->r2 >= 0.9;
      std::ostringstream oss;
      oss << (ok ? "PASS" : "FAIL") << " rate-envelope " << cell_name(cell.key)
          << " slope=" << cell.fit->slope << " r2=" << cell.fit->r2;
      lines.push_back(oss.str());
      all_pass = all_pass && ok;
    }
  }
  if (cfg.schedule.regime == "hitting" && result.cells.size() >= 2) {
    // order cells by alpha within each m and test median tau ordering
    std::vector<const CellResult*> ordered;
    for (const auto& cell : result.cells) {
      if (cell.error.empty() && !cell.hits.empty()) ordered.push_back(&cell);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const CellResult* a, const CellResult* b) {
                return a->key.alpha < b->key.alpha;
              });
    for (std::size_t j = 0; j + 1 < ordered.size(); ++j) {
      const auto& lo = *ordered[j];      // smaller alpha
      const auto& hi = *ordered[j + 1];  // larger alpha
      std::vector<double> tau_lo, tau_hi;
      for (const auto& s : lo.hits) tau_lo.push_back(static_cast<double>(s.tau));
      for (const auto& s : hi.hits) tau_hi.push_back(static_cast<double>(s.tau));
      const double p = rank_sum_p_less(tau_hi, tau_lo);
      const double med_lo = median(tau_lo);
      const double med_hi = median(tau_hi);
      const bool ok = med_hi < med_lo && p < 0.01;
      std::ostringstream oss;
      oss << (ok ? "PASS" : "FAIL") << " tau-ordering alpha=" << hi.key.alpha
          << "<alpha=" << lo.key.alpha << " medians " << med_hi << " vs "
          << med_lo << " p=" << num(p);
      lines.push_back(oss.str());
      const double s_hi = ccdf_slope(hi.ccdf);
      const double s_lo = ccdf_slope(lo.ccdf);
      const bool slope_ok = s_hi < s_lo;
      std::ostringstream oss2;
      oss2 << (slope_ok ? "PASS" : "FAIL") << " ccdf-slope alpha="
           << hi.key.alpha << " slope=" << s_hi << " vs alpha=" << lo.key.alpha
           << " slope=" << s_lo;
      lines.push_back(oss2.str());
      all_pass = all_pass && ok && slope_ok;
    }
  }
  result.all_pass = all_pass;
  return result;
}

void write_outputs(const CampaignResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto& cfg = result.config;

  {  // ensemble.csv
    std::ostringstream csv;
    csv << kCsvSchema << " kind=ensemble\n";
    csv << "alpha,m,n,eps,mean_grad_norm_sq,stderr_grad_norm_sq,tams,"
           "mean_consensus,stderr_consensus,mean_loss,stderr_loss,"
           "mean_z_subopt,stderr_z_subopt\n";
    for (const auto& cell : result.cells) {
      if (!cell.stats) continue;
      const StepSchedule sched = build_schedule(cfg.schedule, cell.key.m);
      const auto& st = *cell.stats;
      for (std::size_t j = 0; j < st.grid.size(); ++j) {
        csv << num(cell.key.alpha) << ',' << cell.key.m << ',' << st.grid[j]
            << ',' << num(sched.step_at(st.grid[j])) << ','
            << num(st.mean_grad_norm_sq[j]) << ','
            << num(st.stderr_grad_norm_sq[j]) << ',' << num(st.tams[j]) << ','
            << num(st.mean_consensus[j]) << ',' << num(st.stderr_consensus[j])
            << ',' << num(st.mean_loss[j]) << ',' << num(st.stderr_loss[j])
            << ',' << num(st.mean_z_subopt[j]) << ','
            << num(st.stderr_z_subopt[j]) << '\n';
      }
    }
    atomic_write(fs::path(out_dir) / "ensemble.csv", csv.str());
  }

  {  // hitting.csv
    std::ostringstream csv;
    csv << kCsvSchema << " kind=hitting\n";
    csv << "alpha,m,replicate,a0,tau,censored,partial_sum_at_tau\n";
    for (const auto& cell : result.cells) {
      const StepSchedule sched = build_schedule(cfg.schedule, cell.key.m);
      for (std::size_t r = 0; r < cell.hits.size(); ++r) {
        const auto& s = cell.hits[r];
        csv << num(cell.key.alpha) << ',' << cell.key.m << ',' << r << ','
            << num(s.a0) << ',' << s.tau << ',' << (s.censored ? 1 : 0) << ','
            << num(sched.partial_sum(s.tau)) << '\n';
      }
    }
    atomic_write(fs::path(out_dir) / "hitting.csv", csv.str());
  }

  {  // ratefit.csv
    std::ostringstream csv;
    csv << kCsvSchema << " kind=ratefit\n";
    csv << "alpha,m,T,subopt,slope,intercept,r2\n";
    for (const auto& cell : result.cells) {
      if (!cell.fit) continue;
      for (std::size_t j = 0; j < cell.fit->t_grid.size(); ++j) {
        csv << num(cell.key.alpha) << ',' << cell.key.m << ','
            << cell.fit->t_grid[j] << ',' << num(cell.fit->subopt[j]) << ','
            << num(cell.fit->slope) << ',' << num(cell.fit->intercept) << ','
            << num(cell.fit->r2) << '\n';
      }
    }
    atomic_write(fs::path(out_dir) / "ratefit.csv", csv.str());
  }

  {  // report.txt
    std::ostringstream rep;
    for (const auto& line : result.report_lines) rep << line << '\n';
    rep << (result.all_pass ? "ALL PASS" : "FAILURES PRESENT") << '\n';
    atomic_write(fs::path(out_dir) / "report.txt", rep.str());
  }

  // per-run record streams (line-delimited records)
  if (cfg.campaign.keep_records) {
    for (const auto& cell : result.cells) {
      for (std::size_t r = 0; r < cell.records.size(); ++r) {
        const auto& rec = cell.records[r];
        if (rec.n.empty()) continue;
        std::ostringstream out;
        for (std::size_t j = 0; j < rec.n.size(); ++j) {
          out << "{\"n\":" << rec.n[j] << ",\"eps\":" << num(rec.eps[j])
              << ",\"grad_norm_sq\":" << num(rec.grad_norm_sq[j])
              << ",\"loss_avg_iterate\":" << num(rec.loss_avg_iterate[j])
              << ",\"consensus_err\":" << num(rec.consensus_err[j])
              << ",\"u_v_norm\":" << num(rec.u_v_norm[j]) << ",\"z_subopt\":";
          if (std::isnan(rec.z_subopt[j])) {
            out << "null";
          } else {
            out << num(rec.z_subopt[j]);
          }
          out << ",\"wallclock_us\":" << num(rec.wallclock_us[j]) << "}\n";
        }
        std::ostringstream name;
        name << "records_" << cell_name(cell.key) << "_rep" << r << ".jsonl";
        atomic_write(fs::path(out_dir) / name.str(), out.str());
      }
    }
  }

  // charts
  std::vector<ChartSeries> loss_series, grad_series, ccdf_series;
  for (const auto& cell : result.cells) {
    if (cell.stats) {
      ChartSeries ls, gs;
      ls.label = gs.label = cell_name(cell.key);
      for (std::size_t j = 0; j < cell.stats->grid.size(); ++j) {
        ls.x.push_back(static_cast<double>(cell.stats->grid[j]));
        ls.y.push_back(cell.stats->mean_loss[j]);
        gs.x.push_back(static_cast<double>(cell.stats->grid[j]));
        gs.y.push_back(cell.stats->mean_grad_norm_sq[j]);
      }
      loss_series.push_back(std::move(ls));
      grad_series.push_back(std::move(gs));
    }
    if (!cell.ccdf.empty()) {
      ChartSeries cs;
      cs.label = cell_name(cell.key);
      for (const auto& row : cell.ccdf) {
        cs.x.push_back(row.eps_partial_sum);
        cs.y.push_back(row.ccdf);
      }
      ccdf_series.push_back(std::move(cs));
    }
  }
  if (!loss_series.empty()) {
    write_line_chart((fs::path(out_dir) / "chart_loss.svg").string(),
                     "training loss of the averaged iterate", "n", "g(xbar_n)",
                     loss_series, true, true);
    write_line_chart((fs::path(out_dir) / "chart_grad.svg").string(),
                     "mean-square gradient norm", "n", "E||grad g(xbar_n)||^2",
                     grad_series, true, true);
  }
  if (!ccdf_series.empty()) {
    write_line_chart((fs::path(out_dir) / "chart_ccdf.svg").string(),
                     "hitting-time tail", "sum of eps_i", "P(tau >= n)",
                     ccdf_series, false, true);
  }
}

ValidationReport validate_campaign(const CampaignConfig& cfg) {
  ValidationReport rep;
  bool ok = true;
  auto add = [&rep](const std::string& s) { rep.lines.push_back(s); };

  std::vector<int> ms = cfg.campaign.ms;
  if (ms.empty()) ms.push_back(cfg.topology.m);

  for (const int m : ms) {
    try {
      const MixingMatrix w = build_topology(cfg.topology, m);
      std::ostringstream oss;
      oss << "topology " << cfg.topology.kind << " m=" << m
          << " lambda0=" << w.lambda0() << " ok";
      add(oss.str());
    } catch (const std::exception& e) {
      add(std::string("topology error: ") + e.what());
      ok = false;
    }
  }
  try {
    const StepSchedule sched = build_schedule(cfg.schedule, ms.front());
    const RmVerdict v = sched.robbins_monro_valid();
    std::ostringstream oss;
    oss << "schedule " << cfg.schedule.family << " robbins-monro "
        << (v.valid ? "valid" : "invalid") << " (" << v.reason << ")";
    add(oss.str());
    // A rate/hitting regime waives the Robbins-Monro requirement.
    if (!v.valid && cfg.schedule.regime == "convergence") {
      add("schedule rejected for convergence regime");
      ok = false;
    }
  } catch (const std::exception& e) {
    add(std::string("schedule error: ") + e.what());
    ok = false;
  }
  try {
    const auto obj = build_objective(cfg.objective, ms.front());
    const AssumptionReport ar = obj->estimate_assumptions(
        cfg.objective.noise, 1000, RngStream(cfg.campaign.master_seed));
    std::ostringstream oss;
    oss << "assumptions sigma0_sq=" << num(ar.sigma0_sq_hat)
        << " sigma1_sq=" << num(ar.sigma1_sq_hat) << " L=" << num(ar.L_hat)
        << " M=" << num(ar.M_hat) << " probes=" << ar.probes;
    add(oss.str());
    if (obj->theta_star()) {
      const double gn = obj->grad_mean(*obj->theta_star()).norm();
      std::ostringstream oss2;
      oss2 << "theta_star grad norm " << num(gn)
           << (gn <= 1e-8 ? " ok" : " TOO LARGE");
      add(oss2.str());
      if (gn > 1e-8) ok = false;
    }
  } catch (const std::exception& e) {
    add(std::string("objective error: ") + e.what());
    ok = false;
  }
  rep.ok = ok;
  return rep;
}

void write_oracle_table(const CampaignConfig& cfg, long long horizon,
                        const std::string& path) {
  RunConfig rc = make_run_config(cfg, cfg.campaign.alphas.front(),
                                 cfg.topology.m, 0);
  rc.horizon = horizon;
  const std::vector<double> exact = exhaustive_expectation(rc);
  std::ostringstream csv;
  csv << kCsvSchema << " kind=oracle\n";
  csv << "n,exact_mean_grad_norm_sq\n";
  for (std::size_t j = 0; j < exact.size(); ++j) {
    csv << (j + 1) << ',' << num(exact[j]) << '\n';
  }
  atomic_write(path, csv.str());
}

}  // namespace dmsgd
