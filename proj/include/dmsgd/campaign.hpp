#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dmsgd/analysis.hpp"
#include "dmsgd/config.hpp"

namespace dmsgd {

struct CellKey {
  double alpha = 0.0;
  int m = 1;
  std::size_t index = 0;
};

struct CellResult {
  CellKey key;
  std::vector<TrajectoryRecord> records;
  std::optional<EnsembleStats> stats;
  std::optional<RateFit> fit;                    // rate regime
  std::vector<HittingTimeSample> hits;           // hitting regime
  std::vector<CcdfRow> ccdf;                     // hitting regime
  std::optional<ConsensusBoundCheck> bound;      // convergence regime
  double a0 = 0.0;
  double wallclock_s = 0.0;
  std::string error;  // non-empty: the cell failed, siblings unaffected
};

struct CampaignResult {
  CampaignConfig config;
  std::vector<CellResult> cells;
  std::vector<std::string> report_lines;
  bool all_pass = false;
};

// Derived replicate seed; pure in (master_seed, cell, replicate).
std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t cell,
                             int replicate);

RunConfig make_run_config(const CampaignConfig& cfg, double alpha, int m,
                          std::uint64_t seed);

CampaignResult run_campaign(const CampaignConfig& cfg);

// ensemble.csv, hitting.csv, ratefit.csv, report.txt, charts, optional
// per-run record streams. Files are written to tmp names and moved into
// place; reruns with the same master seed are byte-identical.
void write_outputs(const CampaignResult& result, const std::string& out_dir);

// Preflight: topology spectrum, schedule verdict, assumption estimates.
// Returns human-readable lines; ok=false on a hard failure.
struct ValidationReport {
  std::vector<std::string> lines;
  bool ok = false;
};
ValidationReport validate_campaign(const CampaignConfig& cfg);

// Exact-expectation table for regression tests (enumeration oracle).
void write_oracle_table(const CampaignConfig& cfg, long long horizon,
                        const std::string& path);

}  // namespace dmsgd
