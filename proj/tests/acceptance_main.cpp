// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// nine pass. Tolerances are pinned here, not configurable.

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dmsgd/analysis.hpp"
#include "dmsgd/campaign.hpp"

using namespace dmsgd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

void report(int index, const std::string& name, const Outcome& o,
            double seconds) {
  std::printf("%s criterion-%d %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL",
              index, name.c_str(), seconds,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------- criterion 1

Outcome spectral_exactness() {
  Outcome o;
  double worst_uniform = 0.0;
  for (const int m : {3, 10, 20}) {
    worst_uniform = std::max(worst_uniform, MixingMatrix::uniform(m).lambda0());
  }
  const MixingMatrix w = MixingMatrix::easgd(4, 0.1);
  // ascending: 1 - (m+1) beta = 0.5, then (1 - beta) three times, then 1
  const std::vector<double> expected{0.5, 0.9, 0.9, 0.9, 1.0};
  double worst_easgd = 0.0;
  for (int j = 0; j < 5; ++j) {
    worst_easgd = std::max(worst_easgd, std::abs(w.spectrum()[j] - expected[j]));
  }
  o.pass = worst_uniform <= 1e-12 && worst_easgd <= 1e-10;
  std::ostringstream oss;
  oss << "uniform lambda0 max " << worst_uniform << ", easgd spectrum err "
      << worst_easgd;
  o.detail = oss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 2

Outcome oracle_equivalence() {
  Outcome o;
  std::vector<Eigen::MatrixXd> a(2, Eigen::MatrixXd::Identity(1, 1));
  std::vector<Eigen::VectorXd> b{Eigen::VectorXd::Constant(1, 0.5),
                                 Eigen::VectorXd::Constant(1, -0.3)};
  RunConfig cfg{CommSchedule{1, MixingMatrix::uniform(2)},
                ObjectiveSpec::quadratic_custom(a, b, 1.0),
                NoiseModel{NoiseKind::Rademacher, 0.1},
                StepSchedule::power_law(0.2, 0.6),
                0.5,
                10,
                0,
                1,
                false,
                InitKind::ZeroConsensus,
                1e6,
                false};
  const std::vector<double> exact = exhaustive_expectation(cfg);  // 2^20 paths

  const int seeds = 100000;
  const int workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::vector<double>> sums(workers, std::vector<double>(10, 0.0));
  std::vector<std::vector<double>> sqs(workers, std::vector<double>(10, 0.0));
  std::atomic<int> next{0};
  auto worker_fn = [&](int wid) {
    while (true) {
      const int s = next.fetch_add(1);
      if (s >= seeds) return;
      RunConfig c2 = cfg;
      c2.seed = 10000 + static_cast<std::uint64_t>(s);
      const TrajectoryRecord rec = run(c2);
      for (std::size_t j = 0; j < rec.n.size(); ++j) {
        sums[wid][rec.n[j] - 1] += rec.grad_norm_sq[j];
        sqs[wid][rec.n[j] - 1] += rec.grad_norm_sq[j] * rec.grad_norm_sq[j];
      }
    }
  };
  {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    for (auto& th : pool) th.join();
  }
  double worst_z = 0.0;
  for (int n = 0; n < 10; ++n) {
    double sum = 0.0, sq = 0.0;
    for (int w = 0; w < workers; ++w) {
      sum += sums[w][n];
      sq += sqs[w][n];
    }
    const double mean = sum / seeds;
    const double var = std::max(0.0, sq / seeds - mean * mean);
    const double se = std::sqrt(var / seeds);
    const double z = se > 0.0 ? std::abs(mean - exact[n]) / se
                              : (std::abs(mean - exact[n]) > 1e-12 ? 1e9 : 0.0);
    worst_z = std::max(worst_z, z);
  }
  o.pass = worst_z <= 3.0;
  std::ostringstream oss;
  oss << "worst |MC - exact| = " << worst_z << " standard errors over 10 steps";
  o.detail = oss.str();
  return o;
}

// ------------------------------------------------------- criteria 3 and 4

CampaignConfig decay_campaign() {
  CampaignConfig cfg;
  cfg.topology.kind = "gossip";
  cfg.topology.m = 8;
  cfg.topology.k = 1;
  cfg.topology.neighbor_weight = 0.25;
  cfg.objective.family = "soft_nonconvex";
  cfg.objective.dim = 10;
  cfg.objective.m = 8;
  cfg.objective.heterogeneity = 0.5;
  cfg.objective.noise = NoiseModel{NoiseKind::Gaussian, 0.05};
  cfg.objective.box_radius = 1.0;
  cfg.objective.dataset_seed = 7;
  cfg.schedule.family = "power_law";
  cfg.schedule.c = 0.1;
  cfg.schedule.p = 0.6;
  cfg.schedule.regime = "convergence";
  cfg.campaign.alphas = {0.0, 0.5, 0.9};
  cfg.campaign.seeds = 50;
  cfg.campaign.horizon = 100000;
  cfg.campaign.geometric_grid = true;
  cfg.campaign.master_seed = 2026;
  return cfg;
}

Outcome lims_decay(const CampaignResult& res) {
  Outcome o;
  o.pass = true;
  std::ostringstream oss;
  for (const auto& cell : res.cells) {
    if (!cell.error.empty() || !cell.stats) {
      o.pass = false;
      oss << " alpha" << cell.key.alpha << " error";
      continue;
    }
    const auto& st = *cell.stats;
    std::size_t j0 = 0;
    while (j0 + 1 < st.grid.size() && st.grid[j0] < 100) ++j0;
    const double grad_ratio =
        st.mean_grad_norm_sq.back() / st.mean_grad_norm_sq[j0];
    const double cons_ratio = st.mean_consensus.back() / st.mean_consensus[j0];
    const bool ok = grad_ratio <= 1e-2 && cons_ratio <= 1e-3;
    o.pass = o.pass && ok;
    oss << " alpha" << cell.key.alpha << " grad_ratio=" << grad_ratio
        << " cons_ratio=" << cons_ratio;
  }
  o.detail = oss.str();
  return o;
}

Outcome consensus_envelope(const CampaignResult& res) {
  Outcome o;
  o.pass = true;
  std::ostringstream oss;
  for (const auto& cell : res.cells) {
    if (!cell.bound) {
      o.pass = false;
      oss << " alpha" << cell.key.alpha << " missing";
      continue;
    }
    o.pass = o.pass && cell.bound->pass;
    oss << " alpha" << cell.key.alpha << " C=" << cell.bound->c_fit
        << " viol=" << cell.bound->violations << "/" << cell.bound->checked
        << " excess=" << cell.bound->worst_excess;
  }
  o.detail = oss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 5

Outcome rate_envelope() {
  Outcome o;
  CampaignConfig cfg;
  cfg.topology.kind = "uniform";
  cfg.topology.m = 4;
  cfg.topology.k = 1;
  cfg.objective.family = "quadratic_consensus";
  cfg.objective.dim = 5;
  cfg.objective.m = 4;
  cfg.objective.heterogeneity = 0.5;
  cfg.objective.noise = NoiseModel{NoiseKind::Gaussian, 0.3};
  cfg.objective.box_radius = 1.0;
  cfg.objective.dataset_seed = 3;
  cfg.schedule.family = "rate_law";
  cfg.schedule.regime = "rate";
  cfg.campaign.alphas = {0.5};
  cfg.campaign.seeds = 200;
  cfg.campaign.horizon = 100000;
  cfg.campaign.geometric_grid = true;
  cfg.campaign.master_seed = 501;
  const CampaignResult res = run_campaign(cfg);
  const auto& cell = res.cells.at(0);
  if (!cell.error.empty() || !cell.fit) {
    o.detail = "cell failed: " + cell.error;
    return o;
  }
  o.pass = cell.fit->slope >= 0.7 && cell.fit->slope <= 1.3 &&
           cell.fit->r2 >= 0.9;
  std::ostringstream oss;
  oss << "slope=" << cell.fit->slope << " r2=" << cell.fit->r2
      << " over T in {1e2..1e5}";
  o.detail = oss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 6

Outcome hitting_ordering() {
  Outcome o;
  CampaignConfig cfg;
  cfg.topology.kind = "uniform";
  cfg.topology.m = 4;
  cfg.topology.k = 1;
  cfg.objective.family = "soft_nonconvex";
  cfg.objective.dim = 10;
  cfg.objective.m = 4;
  cfg.objective.heterogeneity = 0.5;
  cfg.objective.noise = NoiseModel{NoiseKind::Gaussian, 0.05};
  cfg.objective.box_radius = 1.0;
  cfg.objective.dataset_seed = 7;
  // small constant step: tau must be much larger than the 1/(1-alpha)
  // momentum ramp-up so the effective-step advantage can show
  cfg.schedule.family = "constant";
  cfg.schedule.c = 0.005;
  cfg.schedule.regime = "hitting";
  cfg.campaign.alphas = {0.0, 0.5, 0.9};
  cfg.campaign.seeds = 200;
  cfg.campaign.horizon = 5000;
  cfg.campaign.record_every = 1;
  cfg.campaign.master_seed = 601;
  cfg.campaign.a0_frac = 0.1;

  // one shared threshold: 10% of the mean initial squared gradient norm
  {
    const auto obj = build_objective(cfg.objective, cfg.topology.m);
    double acc = 0.0;
    const int probes = 200;
    for (int s = 0; s < probes; ++s) {
      RunConfig rc = make_run_config(cfg, 0.0, cfg.topology.m,
                                     replicate_seed(cfg.campaign.master_seed,
                                                    0, s));
      const SimState st = init_state(rc);
      acc += obj->grad_mean(average_iterate(st, rc)).squaredNorm();
    }
    cfg.campaign.a0s = {0.1 * acc / probes};
  }

  const CampaignResult res = run_campaign(cfg);
  for (const auto& cell : res.cells) {
    if (!cell.error.empty()) {
      o.detail = "cell failed: " + cell.error;
      return o;
    }
  }
  o.pass = res.all_pass;
  std::ostringstream oss;
  oss << "a0=" << cfg.campaign.a0s[0];
  for (const auto& cell : res.cells) {
    std::vector<double> taus;
    for (const auto& s : cell.hits) taus.push_back(static_cast<double>(s.tau));
    std::sort(taus.begin(), taus.end());
    oss << " median_tau(alpha=" << cell.key.alpha
        << ")=" << taus[taus.size() / 2];
  }
  for (const auto& line : res.report_lines) {
    if (line.rfind("FAIL", 0) == 0) oss << " [" << line << "]";
  }
  o.detail = oss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome reductions() {
  Outcome o;
  bool alpha0_ok = true, heavy_ok = true;

  {  // alpha = 0 against a separately coded momentum-free distributed SGD
    const int m = 3, k = 2;
    const auto spec = ObjectiveSpec::quadratic_consensus(2, m, 0.8, 21, 1.0);
    const MixingMatrix w = MixingMatrix::uniform(m);
    RunConfig cfg{CommSchedule{k, w},
                  spec,
                  NoiseModel{NoiseKind::Gaussian, 0.1},
                  StepSchedule::power_law(0.1, 0.6),
                  0.0,
                  1001,
                  5,
                  1001,
                  false,
                  InitKind::PerWorkerRandom,
                  1e6,
                  false};
    SimState st = init_state(cfg);
    Eigen::MatrixXd x_ref = st.X;
    const RngStream rs = RngStream(cfg.seed).child(0x0DDBA11);
    for (long long n = 1; n <= 1000; ++n) {
      const double eps = cfg.schedule.step_at(n);
      const Eigen::MatrixXd g = spec->grad_noisy(cfg.noise, x_ref, rs, n);
      Eigen::MatrixXd nxt = x_ref - eps * g;
      if (n % k == 0) nxt = w.entries() * nxt;
      x_ref = nxt;
      step(st, cfg, rs);
    }
    alpha0_ok = (st.X - x_ref).cwiseAbs().maxCoeff() == 0.0;
  }

  {  // m = 1, W = I against a scalar-coded centralized heavy ball
    std::vector<Eigen::MatrixXd> a(1, Eigen::MatrixXd::Identity(1, 1));
    std::vector<Eigen::VectorXd> b(1, Eigen::VectorXd::Zero(1));
    RunConfig cfg{CommSchedule{1, MixingMatrix::identity(1)},
                  ObjectiveSpec::quadratic_custom(a, b, 1.0),
                  NoiseModel{NoiseKind::Gaussian, 0.3},
                  StepSchedule::constant(0.05),
                  0.9,
                  1001,
                  17,
                  1001,
                  false,
                  InitKind::RandomBox,
                  1e6,
                  false};
    SimState st = init_state(cfg);
    double x = st.X(0, 0), v = 0.0;
    const RngStream rs = RngStream(cfg.seed).child(0x0DDBA11);
    const RngStream w0 = rs.child(0);
    for (long long n = 1; n <= 1000; ++n) {
      const double g = x + 0.3 * w0.gaussian(n, 0);
      v = 0.9 * v + 0.05 * g;
      x = x - v;
      step(st, cfg, rs);
    }
    heavy_ok = st.X(0, 0) == x;
  }

  o.pass = alpha0_ok && heavy_ok;
  o.detail = std::string("alpha0 bitwise ") + (alpha0_ok ? "ok" : "MISMATCH") +
             ", heavy-ball bitwise " + (heavy_ok ? "ok" : "MISMATCH");
  return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome assumption_validators() {
  Outcome o;
  const RngStream stream(88);

  const int m = 3, dim = 4;
  const double sigma = 0.2;
  const auto quad = ObjectiveSpec::quadratic_consensus(dim, m, 1.0, 9, 1.0);
  const AssumptionReport rep =
      quad->estimate_assumptions({NoiseKind::Gaussian, sigma}, 10000, stream);
  const double target = m * dim * sigma * sigma;
  const double sigma0_err = std::abs(rep.sigma0_sq_hat - target) / target;

  const auto homo = ObjectiveSpec::quadratic_consensus(dim, m, 0.0, 9, 1.0);
  const double sigma1 =
      homo->estimate_assumptions({NoiseKind::None, 0.0}, 1000, stream)
          .sigma1_sq_hat;

  double worst_fd = 0.0;
  const RngStream probe_rng(3);
  for (const auto& spec :
       {ObjectiveSpec::quadratic_consensus(5, 4, 1.0, 17, 1.0),
        ObjectiveSpec::logistic(5, 4, 0.5, 17, 1.0),
        ObjectiveSpec::soft_nonconvex(5, 4, 0.5, 17, 1.0)}) {
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd x(spec->dim());
      for (int j = 0; j < x.size(); ++j) x[j] = probe_rng.uniform_sym(probe, j);
      const Eigen::VectorXd g = spec->grad_mean(x);
      Eigen::VectorXd fd(x.size());
      const double h = 1e-5;
      for (int j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (spec->eval_loss(xp) - spec->eval_loss(xm)) / (2 * h);
      }
      worst_fd =
          std::max(worst_fd, (g - fd).norm() / std::max(1e-8, g.norm()));
    }
  }

  o.pass = sigma0_err <= 0.05 && sigma1 <= 1e-12 && worst_fd <= 1e-4;
  std::ostringstream oss;
  oss << "sigma0 rel err " << sigma0_err << ", homogeneous sigma1 " << sigma1
      << ", worst fd rel err " << worst_fd;
  o.detail = oss.str();
  return o;
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

Outcome determinism() {
  Outcome o;
  CampaignConfig cfg;
  cfg.topology.kind = "gossip";
  cfg.topology.m = 4;
  cfg.topology.k = 2;
  cfg.topology.neighbor_weight = 0.25;
  cfg.objective.family = "quadratic_consensus";
  cfg.objective.dim = 3;
  cfg.objective.m = 4;
  cfg.objective.heterogeneity = 0.5;
  cfg.objective.noise = NoiseModel{NoiseKind::Gaussian, 0.1};
  cfg.objective.dataset_seed = 5;
  cfg.schedule.family = "power_law";
  cfg.schedule.c = 0.3;
  cfg.schedule.p = 0.6;
  cfg.schedule.regime = "convergence";
  cfg.campaign.alphas = {0.0, 0.5};
  cfg.campaign.seeds = 8;
  cfg.campaign.horizon = 3000;
  cfg.campaign.record_every = 50;
  cfg.campaign.master_seed = 901;

  const fs::path base = fs::temp_directory_path() / "dmsgd_acceptance_det";
  fs::remove_all(base);
  std::vector<std::string> dirs;
  for (const int par : {1, 4, 8, 4}) {  // trailing 4: rerun at same setting
    cfg.campaign.parallelism = par;
    const CampaignResult res = run_campaign(cfg);
    const fs::path dir = base / ("p" + std::to_string(dirs.size()));
    write_outputs(res, dir.string());
    dirs.push_back(dir.string());
  }
  bool same = true;
  for (const char* f :
       {"ensemble.csv", "hitting.csv", "ratefit.csv", "report.txt"}) {
    const std::string ref = slurp(fs::path(dirs[0]) / f);
    for (std::size_t d = 1; d < dirs.size(); ++d) {
      same = same && slurp(fs::path(dirs[d]) / f) == ref;
    }
  }
  fs::remove_all(base);
  o.pass = same;
  o.detail = same ? "byte-identical CSVs at parallelism 1/4/8 and on rerun"
                  : "output files differ across parallelism or rerun";
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  bool all = true;
  auto timed = [&](int index, const std::string& name, auto fn) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    report(index, name, o, s);
    all = all && o.pass;
  };

  timed(1, "spectral-exactness", spectral_exactness);
  timed(2, "oracle-equivalence", oracle_equivalence);

  {
    const auto t0 = clock::now();
    CampaignResult decay;
    std::string err;
    try {
      decay = run_campaign(decay_campaign());
    } catch (const std::exception& e) {
      err = e.what();
    }
    const double shared_s =
        std::chrono::duration<double>(clock::now() - t0).count();
    timed(3, "lims-decay", [&] {
      if (!err.empty()) return Outcome{false, "campaign failed: " + err};
      Outcome o = lims_decay(decay);
      return o;
    });
    std::printf("     (criteria 3 and 4 share one %.1fs campaign)\n", shared_s);
    timed(4, "consensus-envelope", [&] {
      if (!err.empty()) return Outcome{false, "campaign failed: " + err};
      return consensus_envelope(decay);
    });
  }

  timed(5, "rate-envelope", rate_envelope);
  timed(6, "hitting-ordering", hitting_ordering);
  timed(7, "reductions", reductions);
  timed(8, "assumption-validators", assumption_validators);
  timed(9, "determinism", determinism);

  std::printf("%s\n", all ? "ACCEPTANCE: ALL PASS" : "ACCEPTANCE: FAILURES");
  return all ? 0 : 1;
}
