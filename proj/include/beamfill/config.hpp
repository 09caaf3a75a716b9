#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "beamfill/dataset.hpp"
#include "beamfill/error_model.hpp"
#include "beamfill/estimators.hpp"
#include "beamfill/optimizer.hpp"

namespace beamfill {

/// Raw contents of a config file: "[section]" headers followed by
/// "key = value" lines, with '#' starting a comment. Keys are stored
/// fully qualified as "section.key".
struct KeyValueFile {
    std::map<std::string, std::string> values;
};

/// Parses the text of a config file. Syntax problems (lines without '=',
/// keys outside any section, duplicate keys) throw ConfigError naming
/// `origin` and the line number.
KeyValueFile parse_key_values(const std::string& text,
                              const std::string& origin);

/// Reads and parses a config file. Throws IoError when unreadable.
KeyValueFile load_key_values(const std::string& path);

/// Where the experiment's sections come from.
enum class DataSource {
    synthetic,     // generated trajectories, corrupted in memory
    csv_velocity,  // velocity-only recordings; beams produced by the
                   // measurement error model
    csv_beams,     // full recordings that already carry beam columns
};

DataSource parse_source(const std::string& name);
std::string source_name(DataSource source);

/// Fully resolved experiment description. The defaults run a synthetic
/// sinusoidal-sway study out of the box.
struct ExperimentConfig {
    // [dataset]
    DataSource source = DataSource::synthetic;
    std::string csv_dir;
    std::vector<std::string> train_sections;  // synthetic: generated names
    std::vector<std::string> test_sections;
    CsvSchema schema;

    // [synthetic] (used when source = synthetic)
    Profile profile = Profile::sinusoidal_sway;
    std::size_t train_count = 11;
    std::size_t test_count = 2;
    double duration_s = 400;

    // [geometry]
    double alpha_deg = 20;

    // [corruption] (the seed field is ignored; per-section seeds are
    // derived from run.seed)
    ErrorParams corruption{{0.001, 0.001, 0.001, 0.001}, {0, 0, 0}, 0.001, 0};

    // [window]
    std::size_t window_n = 3;
    BeamMask missing_mask = {false, false, true, true};

    // [estimators]
    std::vector<EstimatorTag> run = {EstimatorTag::average,
                                     EstimatorTag::libeamsnet,
                                     EstimatorTag::missbeamnet};

    // [libeamsnet]
    std::size_t li_fc1 = 64;
    std::size_t li_fc2 = 32;
    double li_dropout = 0.2;

    // [missbeamnet]
    std::size_t mb_hidden = 500;

    // [train] defaults, then per-network overrides from the
    // [libeamsnet] / [missbeamnet] sections. The seed members are
    // derived from run.seed at run time.
    TrainConfig li_train;
    TrainConfig mb_train;

    // [run]
    std::uint64_t seed = 42;
    std::string out_dir = "out";
};

/// Builds a config from parsed keys over the defaults. Unknown keys and
/// unparsable values are appended to `violations` (never thrown), each
/// prefixed with its "section.key" path.
ExperimentConfig make_config(const KeyValueFile& kv,
                             std::vector<std::string>* violations);

/// Range, consistency and path-existence checks. Returns one message per
/// finding, each prefixed with the offending key path; empty means valid.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

/// Canonical text form containing every effective key. Reparsing the
/// output reproduces the config, which is how emitted reports stay
/// re-runnable.
std::string serialize_config(const ExperimentConfig& cfg);

/// load_key_values + "section.key=value" overrides + make_config.
/// Override strings that lack '=' or name an unknown key become
/// violations.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides,
                             std::vector<std::string>* violations);

}  // namespace beamfill
