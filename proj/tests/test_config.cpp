#include <doctest.h>

#include <cmath>
#include <string>

#include "dmsgd/campaign.hpp"
#include "dmsgd/config.hpp"

using namespace dmsgd;

namespace {

const char* kGoodConfig = R"({
  "topology": {"kind": "gossip", "m": 4, "k": 2, "neighbor_weight": 0.25},
  "objective": {
    "family": "quadratic_consensus",
    "N": 3,
    "m": 4,
    "heterogeneity": 0.5,
    "noise": {"kind": "gaussian", "scale": 0.2},
    "box_radius": 1.0,
    "dataset_seed": 7
  },
  "schedule": {"family": "power_law", "c": 0.1, "p": 0.6, "regime": "convergence"},
  "campaign": {
    "alpha": [0.0, 0.5],
    "seeds": 4,
    "horizon": 200,
    "record_every": 10,
    "master_seed": 99,
    "init": "per_worker_random"
  }
})";

std::string replace_once(std::string text, const std::string& from,
                         const std::string& to) {
  return text.replace(text.find(from), from.size(), to);
}

}  // namespace

TEST_CASE("good config round trip") {
  const CampaignConfig cfg = parse_config(kGoodConfig);
  CHECK(cfg.topology.kind == "gossip");
  CHECK(cfg.topology.m == 4);
  CHECK(cfg.topology.k == 2);
  CHECK(cfg.objective.dim == 3);
  CHECK(cfg.objective.noise.kind == NoiseKind::Gaussian);
  CHECK(cfg.objective.noise.scale == doctest::Approx(0.2));
  CHECK(cfg.schedule.regime == "convergence");
  CHECK(cfg.campaign.alphas.size() == 2);
  CHECK(cfg.campaign.seeds == 4);
  CHECK(cfg.campaign.master_seed == 99);
  // untouched keys keep defaults
  CHECK(cfg.campaign.geometric_grid == false);
  CHECK(cfg.campaign.a0_frac == doctest::Approx(0.1));
}

TEST_CASE("missing sections fall back to defaults") {
  const CampaignConfig cfg = parse_config("{}");
  CHECK(cfg.topology.kind == "uniform");
  CHECK(cfg.campaign.alphas.size() == 1);
  CHECK(cfg.campaign.seeds == 2);
}

TEST_CASE("unknown keys are hard errors") {
  CHECK_THROWS_AS(
      parse_config(replace_once(kGoodConfig, "\"seeds\"", "\"seedz\"")),
      BadConfig);
  CHECK_THROWS_AS(
      parse_config(replace_once(kGoodConfig, "\"kind\": \"gossip\"",
                                "\"kind\": \"gossip\", \"extra\": 1")),
      BadConfig);
  CHECK_THROWS_AS(parse_config(R"({"unit": {}})"), BadConfig);
}

TEST_CASE("malformed values are rejected") {
  CHECK_THROWS_AS(parse_config("{not json"), BadConfig);
  CHECK_THROWS_AS(
      parse_config(replace_once(kGoodConfig, "\"convergence\"", "\"both\"")),
      BadConfig);
  CHECK_THROWS_AS(
      parse_config(replace_once(kGoodConfig, "\"gaussian\"", "\"cauchy\"")),
      BadConfig);
  CHECK_THROWS_AS(
      parse_config(replace_once(kGoodConfig, "\"scale\": 0.2", "\"scale\": -1")),
      BadConfig);
  CHECK_THROWS_AS(
      parse_config(replace_once(kGoodConfig, "\"seeds\": 4", "\"seeds\": 0")),
      BadConfig);
}

TEST_CASE("builders") {
  const CampaignConfig cfg = parse_config(kGoodConfig);
  const MixingMatrix w = build_topology(cfg.topology, 4);
  CHECK(w.kind() == MixingKind::Gossip);
  CHECK(w.lambda0() == doctest::Approx(0.5));
  const auto obj = build_objective(cfg.objective, 4);
  CHECK(obj->workers() == 4);
  CHECK(obj->dim() == 3);
  const StepSchedule s = build_schedule(cfg.schedule, 4);
  CHECK(s.step_at(1000) == doctest::Approx(0.1 * std::pow(1000.0, -0.6)));
  CHECK(parse_init("zero_consensus") == InitKind::ZeroConsensus);
  CHECK(parse_init("random_box") == InitKind::RandomBox);
  CHECK_THROWS_AS(parse_init("hot_start"), BadConfig);

  TopologyConfig torus = cfg.topology;
  torus.kind = "torus";
  CHECK_THROWS_AS(build_topology(torus, 4), BadConfig);
  ScheduleConfig expo = cfg.schedule;
  expo.family = "exponential";
  CHECK_THROWS_AS(build_schedule(expo, 4), BadConfig);
}

TEST_CASE("run config assembly and replicate seeds") {
  const CampaignConfig cfg = parse_config(kGoodConfig);
  const RunConfig rc = make_run_config(cfg, 0.5, 4, 123);
  CHECK(rc.alpha == doctest::Approx(0.5));
  CHECK(rc.horizon == 200);
  CHECK(rc.seed == 123);
  CHECK(rc.record_every == 10);
  CHECK(rc.comm.period_k == 2);

  CHECK(replicate_seed(1, 0, 0) == replicate_seed(1, 0, 0));
  CHECK(replicate_seed(1, 0, 0) != replicate_seed(1, 0, 1));
  CHECK(replicate_seed(1, 0, 0) != replicate_seed(1, 1, 0));
  CHECK(replicate_seed(1, 0, 0) != replicate_seed(2, 0, 0));
}

TEST_CASE("validation verdicts") {
  SUBCASE("well-posed campaign validates") {
    const ValidationReport rep = validate_campaign(parse_config(kGoodConfig));
    CHECK(rep.ok);
    CHECK_FALSE(rep.lines.empty());
  }
  SUBCASE("divergent step-size sum fails the convergence regime") {
    const std::string bad =
        replace_once(kGoodConfig, "\"p\": 0.6", "\"p\": 0.5");
    const ValidationReport rep = validate_campaign(parse_config(bad));
    CHECK_FALSE(rep.ok);
  }
  SUBCASE("a constant schedule is fine for the hitting regime") {
    std::string cfg_text =
        replace_once(kGoodConfig, "\"power_law\"", "\"constant\"");
    cfg_text = replace_once(cfg_text, "\"convergence\"", "\"hitting\"");
    const ValidationReport rep = validate_campaign(parse_config(cfg_text));
    CHECK(rep.ok);
  }
  SUBCASE("inadmissible easgd coupling is reported") {
    std::string cfg_text = replace_once(
        kGoodConfig, "\"kind\": \"gossip\"", "\"kind\": \"easgd\"");
    cfg_text = replace_once(cfg_text, "\"neighbor_weight\": 0.25",
                            "\"beta\": 0.6");
    const ValidationReport rep = validate_campaign(parse_config(cfg_text));
    CHECK_FALSE(rep.ok);
  }
}
