#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "beamfill/config.hpp"
#include "beamfill/dataset.hpp"
#include "beamfill/error_model.hpp"
#include "beamfill/errors.hpp"
#include "beamfill/estimators.hpp"
#include "beamfill/experiment.hpp"
#include "beamfill/geometry.hpp"
#include "beamfill/metrics.hpp"

namespace py = pybind11;

namespace {

using namespace beamfill;

py::dict scores_to_dict(const StrategyScores& row) {
    py::dict d;
    d["strategy"] = row.strategy;
    d["rmse_mps"] = row.rmse_mps;
    d["mae_mps"] = row.mae_mps;
    d["r2"] = row.r2;
    d["vaf_pct"] = row.vaf_pct;
    if (row.has_improvement) {
        d["rmse_improvement_pct"] = row.rmse_improvement_pct;
        d["mae_improvement_pct"] = row.mae_improvement_pct;
    } else {
        d["rmse_improvement_pct"] = py::none();
        d["mae_improvement_pct"] = py::none();
    }
    return d;
}

py::dict report_to_dict(const EvalReport& report) {
    py::list scopes;
    for (const ScopeReport& scope : report.scopes) {
        py::list rows;
        for (const StrategyScores& row : scope.rows)
            rows.append(scores_to_dict(row));
        py::dict s;
        s["scope"] = scope.scope;
        s["rows"] = rows;
        scopes.append(s);
    }
    py::list diags;
    for (const EvalReport::BeamDiag& d : report.beam_diagnostics) {
        py::dict e;
        e["strategy"] = d.strategy;
        e["beam"] = d.beam;
        e["rmse_mps"] = d.rmse_mps;
        e["mae_mps"] = d.mae_mps;
        diags.append(e);
    }
    py::dict out;
    out["scopes"] = scopes;
    out["beam_diagnostics"] = diags;
    out["warnings"] = report.warnings;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "DVL missing-beam reconstruction: beam geometry, sensor error "
        "model, metrics and the config-driven experiment pipeline";

    py::register_exception<Error>(m, "Error");

    // --- geometry ---
    py::class_<BeamGeometry>(m, "BeamGeometry")
        .def_readonly("alpha", &BeamGeometry::alpha);
    m.def("build_geometry", &build_geometry, py::arg("alpha_rad"),
          "Transducer geometry for a beam pitch angle in radians");
    m.def("project_to_beams", &project_to_beams, py::arg("geometry"),
          py::arg("velocity"),
          "Per-beam velocities of a sensor-frame velocity vector");
    m.def("solve_velocity", &solve_velocity, py::arg("geometry"),
          py::arg("beams"), py::arg("active"),
          "Least-squares velocity from the beams flagged active");

    // --- sensor error model ---
    py::class_<ErrorParams>(m, "ErrorParams")
        .def(py::init<>())
        .def_readwrite("bias", &ErrorParams::bias)
        .def_readwrite("scale", &ErrorParams::scale)
        .def_readwrite("noise_std", &ErrorParams::noise_std)
        .def_readwrite("seed", &ErrorParams::seed);
    m.def(
        "corrupt_series",
        [](const BeamGeometry& geom, const std::vector<Vec3>& velocities,
           const ErrorParams& params) {
            return corrupt_series(geom, velocities, params);
        },
        py::arg("geometry"), py::arg("velocities"), py::arg("params"),
        "Beam measurements of a unit under test: scale, project, bias, "
        "noise");

    m.def(
        "synth_trajectory",
        [](const std::string& profile, double duration_s, std::uint64_t seed) {
            return synth_trajectory(parse_profile(profile), duration_s, seed);
        },
        py::arg("profile"), py::arg("duration_s"), py::arg("seed"),
        "1 Hz velocity series; profile is constant | sinusoidal-sway | "
        "turn");

    // --- metrics ---
    m.def("rmse", [](const std::vector<double>& truth,
                     const std::vector<double>& pred) {
        return rmse(truth, pred);
    });
    m.def("mae", [](const std::vector<double>& truth,
                    const std::vector<double>& pred) {
        return mae(truth, pred);
    });
    m.def("r_squared", [](const std::vector<double>& truth,
                          const std::vector<double>& pred) {
        return r_squared(truth, pred);
    });
    m.def("vaf", [](const std::vector<double>& truth,
                    const std::vector<double>& pred) {
        return vaf(truth, pred);
    });
    m.def("improvement_percent", &improvement_percent, py::arg("baseline"),
          py::arg("candidate"));

    // --- estimation helpers ---
    m.def(
        "average_predict",
        [](const std::vector<Vec4>& past, const BeamMask& missing_mask) {
            WindowSample s;
            s.past = past;
            s.missing_mask = missing_mask;
            return average_predict(s);
        },
        py::arg("past"), py::arg("missing_mask"),
        "Mean of each masked beam's past values, in mask slot order");

    // --- config-driven pipeline ---
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir);
    m.def(
        "load_config",
        [](const std::string& path, const std::vector<std::string>& overrides) {
            std::vector<std::string> violations;
            ExperimentConfig cfg = load_config(path, overrides, &violations);
            if (!violations.empty()) {
                std::string msg = "invalid config:";
                for (const std::string& v : violations) msg += "\n  " + v;
                throw ConfigError(msg);
            }
            return cfg;
        },
        py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
    m.def("validate_config", &validate_config, py::arg("config"),
          "Range and consistency findings; empty means valid");
    m.def("serialize_config", &serialize_config, py::arg("config"));
    m.def("run_simulate", &run_simulate, py::arg("config"));
    m.def(
        "run_train",
        [](const ExperimentConfig& cfg) {
            py::list out;
            for (const TrainResult& r : run_train(cfg)) {
                py::dict d;
                d["estimator"] = r.estimator;
                d["checkpoint"] = r.checkpoint_path;
                d["train_loss"] = r.history.train_loss;
                d["test_loss"] = r.history.test_loss;
                out.append(d);
            }
            return out;
        },
        py::arg("config"));
    m.def(
        "run_eval",
        [](const ExperimentConfig& cfg, bool oracle) {
            return report_to_dict(run_eval(cfg, oracle));
        },
        py::arg("config"), py::arg("oracle") = false);
}
