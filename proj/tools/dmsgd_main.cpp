#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dmsgd/campaign.hpp"

int main(int argc, char** argv) {
  CLI::App app{"distributed momentum SGD simulation and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int parallelism = -1;
  std::uint64_t master_seed = 0;
  bool have_seed = false;
  long long oracle_horizon = 10;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config_path, "campaign config file")->required();
    if (needs_out) sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--parallelism", parallelism, "worker thread count");
    sub->add_option_function<std::uint64_t>(
        "--master-seed",
        [&](std::uint64_t v) {
          master_seed = v;
          have_seed = true;
        },
        "override the campaign master seed");
  };

  auto* validate = app.add_subcommand("validate", "preflight checks");
  add_common(validate, false);
  auto* run_cmd = app.add_subcommand("run", "execute the campaign sweep");
  add_common(run_cmd, true);
  auto* oracle = app.add_subcommand("oracle", "write the enumeration table");
  add_common(oracle, true);
  oracle->add_option("--horizon", oracle_horizon, "enumeration horizon");
  auto* report = app.add_subcommand("report", "recompute report.txt only");
  add_common(report, true);

  CLI11_PARSE(app, argc, argv);

  try {
    dmsgd::CampaignConfig cfg = dmsgd::load_config(config_path);
    if (have_seed) cfg.campaign.master_seed = master_seed;
    if (parallelism >= 0) cfg.campaign.parallelism = parallelism;

    if (validate->parsed()) {
      const dmsgd::ValidationReport rep = dmsgd::validate_campaign(cfg);
      for (const auto& line : rep.lines) std::cout << line << '\n';
      std::cout << (rep.ok ? "VALID" : "INVALID") << '\n';
      return rep.ok ? 0 : 1;
    }
    if (run_cmd->parsed()) {
      const dmsgd::CampaignResult result = dmsgd::run_campaign(cfg);
      dmsgd::write_outputs(result, out_dir);
      for (const auto& line : result.report_lines) std::cout << line << '\n';
      std::cout << (result.all_pass ? "ALL PASS" : "FAILURES PRESENT") << '\n';
      return result.all_pass ? 0 : 1;
    }
    if (oracle->parsed()) {
      std::filesystem::create_directories(out_dir);
      const std::string path = out_dir + "/oracle.csv";
      dmsgd::write_oracle_table(cfg, oracle_horizon, path);
      std::cout << "wrote " << path << '\n';
      return 0;
    }
    if (report->parsed()) {
      const dmsgd::CampaignResult result = dmsgd::run_campaign(cfg);
      dmsgd::write_outputs(result, out_dir);
      std::cout << "report regenerated under " << out_dir << '\n';
      return result.all_pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
