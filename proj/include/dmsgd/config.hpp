#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmsgd/engine.hpp"

namespace dmsgd {

// Parsed campaign configuration: one JSON file with four sections
// (topology, objective, schedule, campaign). Unknown keys are hard errors.
struct TopologyConfig {
  std::string kind = "uniform";  // uniform | gossip | easgd
  int m = 1;
  int k = 1;
  double beta = 0.0;
  double neighbor_weight = 0.25;
};

struct ObjectiveConfig {
  std::string family = "quadratic_consensus";  // | logistic | soft_nonconvex
  int dim = 1;
  int m = 1;
  double heterogeneity = 0.0;
  NoiseModel noise;
  double box_radius = 1.0;
  std::uint64_t dataset_seed = 1;
};

struct ScheduleConfig {
  std::string family = "power_law";  // | rate_law | constant
  double c = 0.1;
  double p = 0.6;
  std::string regime = "convergence";  // | rate | hitting
};

struct CampaignSection {
  std::vector<double> alphas{0.0};
  std::vector<int> ms;  // optional worker-count sweep; empty = topology.m only
  std::vector<double> a0s;  // hitting thresholds; empty = derive from run
  double a0_frac = 0.1;     // a0 as a fraction of the initial grad norm sq
  int seeds = 2;
  long long horizon = 100;
  long long record_every = 1;
  bool geometric_grid = false;
  std::uint64_t master_seed = 1;
  std::string init = "per_worker_random";
  int parallelism = 0;  // 0 = hardware concurrency
  bool keep_records = false;
  double guard_threshold = 1e6;
};

struct CampaignConfig {
  TopologyConfig topology;
  ObjectiveConfig objective;
  ScheduleConfig schedule;
  CampaignSection campaign;
};

CampaignConfig load_config(const std::string& path);
CampaignConfig parse_config(const std::string& json_text);

// Materialize the pieces for one sweep cell (worker count m);
// the per-cell seed is derived later from (master_seed, cell, replicate).
MixingMatrix build_topology(const TopologyConfig& t, int m);
std::shared_ptr<const ObjectiveSpec> build_objective(const ObjectiveConfig& o,
                                                     int m);
StepSchedule build_schedule(const ScheduleConfig& s, int m);
InitKind parse_init(const std::string& name);

}  // namespace dmsgd
