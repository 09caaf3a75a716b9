#pragma once

#include <string>
#include <vector>

#include "beamfill/config.hpp"
#include "beamfill/dataset.hpp"
#include "beamfill/estimators.hpp"
#include "beamfill/metrics.hpp"

namespace beamfill {

/// Fixed output layout under the experiment's out_dir. Every command
/// rewrites resolved_config so outputs always carry the exact
/// configuration that produced them.
struct RunPaths {
    explicit RunPaths(const std::string& out_dir);
    std::string root;
    std::string data_dir;         // simulate: one CSV per section
    std::string checkpoints_dir;  // train: <estimator>.ckpt
    std::string losses_dir;       // train: loss_<estimator>.csv
    std::string reports_dir;      // eval: report.txt/.csv, beam_diagnostics.csv
    std::string resolved_config;  // root/resolved_config.ini

    std::string checkpoint(const std::string& estimator) const;
    std::string loss_csv(const std::string& estimator) const;
};

/// Assembles the corrupted train/test sections an experiment runs on,
/// from generated trajectories or CSV recordings depending on the
/// config. Per-section seeds derive from cfg.seed, so the result is a
/// pure function of the config. Split warnings (e.g. an empty test
/// role) are appended to `warnings` when given.
SectionSet build_sections(const ExperimentConfig& cfg,
                          std::vector<std::string>* warnings = nullptr);

/// Windows of every section in `sections`, pooled in section order.
std::vector<WindowSample> pool_windows(const std::vector<Section>& sections,
                                       std::size_t n, const BeamMask& mask);

/// Writes each section as a CSV in the data directory, in the same
/// schema load_csv consumes. Requires a synthetic source.
void run_simulate(const ExperimentConfig& cfg);

struct TrainResult {
    std::string estimator;
    std::string checkpoint_path;
    LossHistory history;
};

/// Trains every neural estimator in cfg.run per the training protocol
/// and writes one checkpoint plus one loss CSV per estimator.
std::vector<TrainResult> run_train(const ExperimentConfig& cfg);

/// Scores the configured strategies on the test sections: regress the
/// missing beams, rebuild the full beam vector, recover velocity by
/// least squares and compare velocity norms against the full-beam
/// solution. Writes report.txt, report.csv and beam_diagnostics.csv.
///
/// Neural strategies load their checkpoints from the output layout;
/// `checkpoint_paths` entries override by the checkpoint's own
/// estimator kind. With `oracle` set, an extra row predicts the true
/// missing beams (sanity upper bound: zero error).
EvalReport run_eval(const ExperimentConfig& cfg, bool oracle = false,
                    const std::vector<std::string>& checkpoint_paths = {});

}  // namespace beamfill
