#include "dmsgd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dmsgd {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& section,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw BadConfig(section + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw BadConfig("unknown key '" + key + "' in section " + section);
    }
  }
}

NoiseModel parse_noise(const json& j) {
  require_keys(j, "objective.noise", {"kind", "scale"});
  NoiseModel n;
  const std::string kind = j.value("kind", "none");
  if (kind == "gaussian") {
    n.kind = NoiseKind::Gaussian;
  } else if (kind == "rademacher") {
    n.kind = NoiseKind::Rademacher;
  } else if (kind == "none") {
    n.kind = NoiseKind::None;
  } else {
    throw BadConfig("unknown noise kind '" + kind + "'");
  }
  n.scale = j.value("scale", 0.0);
  if (n.scale < 0.0) throw BadConfig("noise scale must be >= 0");
  return n;
}

}  // namespace

CampaignConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw BadConfig(std::string("config parse error: ") + e.what());
  }
  require_keys(root, "<root>", {"topology", "objective", "schedule", "campaign"});
  CampaignConfig cfg;

  if (root.contains("topology")) {
    const auto& t = root["topology"];
    require_keys(t, "topology", {"kind", "m", "k", "beta", "neighbor_weight"});
    cfg.topology.kind = t.value("kind", cfg.topology.kind);
    cfg.topology.m = t.value("m", cfg.topology.m);
    cfg.topology.k = t.value("k", cfg.topology.k);
    cfg.topology.beta = t.value("beta", cfg.topology.beta);
    cfg.topology.neighbor_weight =
        t.value("neighbor_weight", cfg.topology.neighbor_weight);
  }
  if (root.contains("objective")) {
    const auto& o = root["objective"];
    require_keys(o, "objective",
                 {"family", "N", "m", "heterogeneity", "noise", "box_radius",
                  "dataset_seed"});
    cfg.objective.family = o.value("family", cfg.objective.family);
    cfg.objective.dim = o.value("N", cfg.objective.dim);
    cfg.objective.m = o.value("m", cfg.topology.m);
    cfg.objective.heterogeneity =
        o.value("heterogeneity", cfg.objective.heterogeneity);
    if (o.contains("noise")) cfg.objective.noise = parse_noise(o["noise"]);
    cfg.objective.box_radius = o.value("box_radius", cfg.objective.box_radius);
    cfg.objective.dataset_seed =
        o.value("dataset_seed", cfg.objective.dataset_seed);
  } else {
    cfg.objective.m = cfg.topology.m;
  }
  if (root.contains("schedule")) {
    const auto& s = root["schedule"];
    require_keys(s, "schedule", {"family", "c", "p", "regime"});
    cfg.schedule.family = s.value("family", cfg.schedule.family);
    cfg.schedule.c = s.value("c", cfg.schedule.c);
    cfg.schedule.p = s.value("p", cfg.schedule.p);
    cfg.schedule.regime = s.value("regime", cfg.schedule.regime);
    if (cfg.schedule.regime != "convergence" && cfg.schedule.regime != "rate" &&
        cfg.schedule.regime != "hitting") {
      throw BadConfig("regime must be convergence, rate, or hitting");
    }
  }
  if (root.contains("campaign")) {
    const auto& c = root["campaign"];
    require_keys(c, "campaign",
                 {"alpha", "m_sweep", "a0", "a0_frac", "seeds", "horizon",
                  "record_every", "geometric_grid", "master_seed", "init",
                  "parallelism", "keep_records", "guard_threshold"});
    if (c.contains("alpha")) {
      cfg.campaign.alphas = c["alpha"].get<std::vector<double>>();
    }
    if (c.contains("m_sweep")) {
      cfg.campaign.ms = c["m_sweep"].get<std::vector<int>>();
    }
    if (c.contains("a0")) {
      cfg.campaign.a0s = c["a0"].get<std::vector<double>>();
    }
    cfg.campaign.a0_frac = c.value("a0_frac", cfg.campaign.a0_frac);
    cfg.campaign.seeds = c.value("seeds", cfg.campaign.seeds);
    cfg.campaign.horizon = c.value("horizon", cfg.campaign.horizon);
    cfg.campaign.record_every =
        c.value("record_every", cfg.campaign.record_every);
    cfg.campaign.geometric_grid =
        c.value("geometric_grid", cfg.campaign.geometric_grid);
    cfg.campaign.master_seed = c.value("master_seed", cfg.campaign.master_seed);
    cfg.campaign.init = c.value("init", cfg.campaign.init);
    cfg.campaign.parallelism = c.value("parallelism", cfg.campaign.parallelism);
    cfg.campaign.keep_records =
        c.value("keep_records", cfg.campaign.keep_records);
    cfg.campaign.guard_threshold =
        c.value("guard_threshold", cfg.campaign.guard_threshold);
  }
  if (cfg.campaign.alphas.empty()) throw BadConfig("alpha sweep is empty");
  if (cfg.campaign.seeds < 1) throw BadConfig("seeds must be >= 1");
  return cfg;
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("cannot open config file " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return parse_config(oss.str());
}

MixingMatrix build_topology(const TopologyConfig& t, int m) {
  if (t.kind == "uniform") return MixingMatrix::uniform(m);
  if (t.kind == "gossip") return MixingMatrix::gossip_ring(m, t.neighbor_weight);
  if (t.kind == "easgd") return MixingMatrix::easgd(m, t.beta);
  if (t.kind == "identity") return MixingMatrix::identity(m);
  throw BadConfig("unknown topology kind '" + t.kind + "'");
}

std::shared_ptr<const ObjectiveSpec> build_objective(const ObjectiveConfig& o,
                                                     int m) {
  if (o.family == "quadratic_consensus") {
    return ObjectiveSpec::quadratic_consensus(o.dim, m, o.heterogeneity,
                                              o.dataset_seed, o.box_radius);
  }
  if (o.family == "logistic") {
    return ObjectiveSpec::logistic(o.dim, m, o.heterogeneity, o.dataset_seed,
                                   o.box_radius);
  }
  if (o.family == "soft_nonconvex") {
    return ObjectiveSpec::soft_nonconvex(o.dim, m, o.heterogeneity,
                                         o.dataset_seed, o.box_radius);
  }
  throw BadConfig("unknown objective family '" + o.family + "'");
}

StepSchedule build_schedule(const ScheduleConfig& s, int m) {
  if (s.family == "power_law") return StepSchedule::power_law(s.c, s.p);
  if (s.family == "rate_law") return StepSchedule::rate_law(m);
  if (s.family == "constant") return StepSchedule::constant(s.c);
  throw BadConfig("unknown schedule family '" + s.family + "'");
}

InitKind parse_init(const std::string& name) {
  if (name == "zero_consensus") return InitKind::ZeroConsensus;
  if (name == "random_box") return InitKind::RandomBox;
  if (name == "per_worker_random") return InitKind::PerWorkerRandom;
  throw BadConfig("unknown init policy '" + name + "'");
}

}  // namespace dmsgd
