#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmsgd/analysis.hpp"
#include "dmsgd/campaign.hpp"

namespace py = pybind11;
using namespace dmsgd;

namespace {

NoiseModel make_noise(const std::string& kind, double scale) {
  NoiseModel n;
  if (kind == "gaussian") {
    n.kind = NoiseKind::Gaussian;
  } else if (kind == "rademacher") {
    n.kind = NoiseKind::Rademacher;
  } else if (kind == "none") {
    n.kind = NoiseKind::None;
  } else {
    throw BadParam("unknown noise kind '" + kind + "'");
  }
  n.scale = scale;
  return n;
}

RunConfig assemble(const MixingMatrix& w, int period_k,
                   std::shared_ptr<const ObjectiveSpec> objective,
                   const std::string& noise_kind, double noise_scale,
                   const StepSchedule& schedule, double alpha,
                   long long horizon, std::uint64_t seed,
                   long long record_every, bool geometric_grid,
                   const std::string& init, double guard_threshold) {
  RunConfig rc{CommSchedule{period_k, w},
               std::move(objective),
               make_noise(noise_kind, noise_scale),
               schedule,
               alpha,
               horizon,
               seed,
               record_every,
               geometric_grid,
               parse_init(init),
               guard_threshold,
               false};
  return rc;
}

py::dict record_to_dict(const TrajectoryRecord& rec) {
  py::dict d;
  d["n"] = rec.n;
  d["eps"] = rec.eps;
  d["grad_norm_sq"] = rec.grad_norm_sq;
  d["loss_avg_iterate"] = rec.loss_avg_iterate;
  d["consensus_err"] = rec.consensus_err;
  d["u_v_norm"] = rec.u_v_norm;
  d["z_subopt"] = rec.z_subopt;
  d["alpha"] = rec.alpha;
  d["horizon"] = rec.horizon;
  d["seed"] = rec.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dmsgd, mod) {
  mod.doc() = "distributed momentum SGD simulation core";

  py::class_<MixingMatrix>(mod, "MixingMatrix")
      .def_static("uniform", &MixingMatrix::uniform, py::arg("m"))
      .def_static("gossip_ring", &MixingMatrix::gossip_ring, py::arg("m"),
                  py::arg("neighbor_weight"))
      .def_static("easgd", &MixingMatrix::easgd, py::arg("m"), py::arg("beta"))
      .def_static("identity", &MixingMatrix::identity, py::arg("m"))
      .def_property_readonly("entries", &MixingMatrix::entries)
      .def_property_readonly("spectrum", &MixingMatrix::spectrum)
      .def_property_readonly("lambda0", &MixingMatrix::lambda0)
      .def_property_readonly("workers", &MixingMatrix::workers);

  mod.def("spectral_gap", &spectral_gap);
  mod.def("count_comm_rounds", &count_comm_rounds, py::arg("t"), py::arg("n"),
          py::arg("k"));

  py::class_<StepSchedule>(mod, "StepSchedule")
      .def_static("power_law", &StepSchedule::power_law, py::arg("c"),
                  py::arg("p"))
      .def_static("rate_law", &StepSchedule::rate_law, py::arg("m"))
      .def_static("constant", &StepSchedule::constant, py::arg("c"))
      .def("step_at", &StepSchedule::step_at)
      .def("partial_sum", &StepSchedule::partial_sum)
      .def("robbins_monro_valid", [](const StepSchedule& s) {
        const RmVerdict v = s.robbins_monro_valid();
        return py::make_tuple(v.valid, v.reason);
      });

  py::class_<ObjectiveSpec, std::shared_ptr<ObjectiveSpec>>(mod,
                                                            "ObjectiveSpec")
      .def_static(
          "quadratic_consensus",
          [](int dim, int m, double het, std::uint64_t seed, double box) {
            return std::const_pointer_cast<ObjectiveSpec>(
                ObjectiveSpec::quadratic_consensus(dim, m, het, seed, box));
          },
          py::arg("dim"), py::arg("m"), py::arg("heterogeneity"),
          py::arg("dataset_seed"), py::arg("box_radius"))
      .def_static(
          "logistic",
          [](int dim, int m, double het, std::uint64_t seed, double box) {
            return std::const_pointer_cast<ObjectiveSpec>(
                ObjectiveSpec::logistic(dim, m, het, seed, box));
          },
          py::arg("dim"), py::arg("m"), py::arg("heterogeneity"),
          py::arg("dataset_seed"), py::arg("box_radius"))
      .def_static(
          "soft_nonconvex",
          [](int dim, int m, double het, std::uint64_t seed, double box) {
            return std::const_pointer_cast<ObjectiveSpec>(
                ObjectiveSpec::soft_nonconvex(dim, m, het, seed, box));
          },
          py::arg("dim"), py::arg("m"), py::arg("heterogeneity"),
          py::arg("dataset_seed"), py::arg("box_radius"))
      .def_property_readonly("dim", &ObjectiveSpec::dim)
      .def_property_readonly("workers", &ObjectiveSpec::workers)
      .def_property_readonly("theta_star",
                             [](const ObjectiveSpec& o) {
                               return o.theta_star();
                             })
      .def_property_readonly("g_star", &ObjectiveSpec::g_star)
      .def("eval_loss", &ObjectiveSpec::eval_loss)
      .def("grad_mean", &ObjectiveSpec::grad_mean)
      .def("grad_worker", &ObjectiveSpec::grad_worker)
      .def("grad_exact", &ObjectiveSpec::grad_exact)
      .def("estimate_assumptions",
           [](const ObjectiveSpec& o, const std::string& kind, double scale,
              int probes, std::uint64_t seed) {
             const AssumptionReport r = o.estimate_assumptions(
                 make_noise(kind, scale), probes, RngStream(seed));
             py::dict d;
             d["sigma0_sq"] = r.sigma0_sq_hat;
             d["sigma1_sq"] = r.sigma1_sq_hat;
             d["L"] = r.L_hat;
             d["M"] = r.M_hat;
             d["probes"] = r.probes;
             return d;
           },
           py::arg("noise_kind"), py::arg("noise_scale"), py::arg("probes"),
           py::arg("seed"));

  mod.def(
      "run",
      [](const MixingMatrix& w, int period_k,
         std::shared_ptr<ObjectiveSpec> objective,
         const std::string& noise_kind, double noise_scale,
         const StepSchedule& schedule, double alpha, long long horizon,
         std::uint64_t seed, long long record_every, bool geometric_grid,
         const std::string& init, double guard_threshold) {
        return record_to_dict(
            run(assemble(w, period_k, objective, noise_kind, noise_scale,
                         schedule, alpha, horizon, seed, record_every,
                         geometric_grid, init, guard_threshold)));
      },
      py::arg("mixing"), py::arg("period_k"), py::arg("objective"),
      py::arg("noise_kind"), py::arg("noise_scale"), py::arg("schedule"),
      py::arg("alpha"), py::arg("horizon"), py::arg("seed"),
      py::arg("record_every") = 1, py::arg("geometric_grid") = false,
      py::arg("init") = "per_worker_random",
      py::arg("guard_threshold") = 1e6);

  mod.def(
      "exhaustive_expectation",
      [](const MixingMatrix& w, int period_k,
         std::shared_ptr<ObjectiveSpec> objective, double noise_scale,
         const StepSchedule& schedule, double alpha, long long horizon,
         const std::string& init) {
        return exhaustive_expectation(
            assemble(w, period_k, objective, "rademacher", noise_scale,
                     schedule, alpha, horizon, 0, 1, false, init, 1e6));
      },
      py::arg("mixing"), py::arg("period_k"), py::arg("objective"),
      py::arg("noise_scale"), py::arg("schedule"), py::arg("alpha"),
      py::arg("horizon"), py::arg("init") = "zero_consensus");

  mod.def("run_campaign_from_json",
          [](const std::string& json_text, const std::string& out_dir) {
            const CampaignResult res = run_campaign(parse_config(json_text));
            if (!out_dir.empty()) write_outputs(res, out_dir);
            py::dict d;
            d["all_pass"] = res.all_pass;
            d["report_lines"] = res.report_lines;
            return d;
          },
          py::arg("json_text"), py::arg("out_dir") = "");

  mod.def("validate_campaign_from_json", [](const std::string& json_text) {
    const ValidationReport rep = validate_campaign(parse_config(json_text));
    py::dict d;
    d["ok"] = rep.ok;
    d["lines"] = rep.lines;
    return d;
  });

  py::register_exception<BadParam>(mod, "BadParam");
  py::register_exception<BadConfig>(mod, "BadConfig");
  py::register_exception<SpectralViolation>(mod, "SpectralViolation");
  py::register_exception<NumericalDivergence>(mod, "NumericalDivergence");
}
