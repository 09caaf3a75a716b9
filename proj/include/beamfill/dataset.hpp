#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "beamfill/geometry.hpp"

namespace beamfill {

/// One timestamped sensor row: corrupted beam measurements plus the
/// reference velocity they were produced from.
struct BeamRecord {
    double t = 0;      // seconds
    Vec4 beams{};      // unit-under-test beam velocities, m/s
    Vec3 v_true{};     // reference DVL velocity, m/s
};

struct Section {
    std::string name;
    std::vector<BeamRecord> records;
};

/// Disjoint train/test grouping of named sections.
struct SectionSet {
    std::vector<Section> train;
    std::vector<Section> test;
};

/// One supervised sample: N complete past measurements, the current
/// partial measurement, and the values the estimator must regress.
struct WindowSample {
    std::vector<Vec4> past;                 // N rows, oldest first
    std::vector<double> current_available;  // unmasked beams at t, slot order
    BeamMask missing_mask{};                // true = beam missing
    std::vector<double> target_missing;     // masked beams at t, slot order
    Vec4 target_all{};                      // full beam vector at t
    Vec3 v_true_t{};                        // reference velocity at t
    double t = 0;                           // timestamp of the current step
};

/// Column-name map for CSV ingestion. Defaults match the files this
/// artifact writes; remap the names to ingest external recordings.
struct CsvSchema {
    std::string time = "time";
    std::array<std::string, 4> beams = {"beam1", "beam2", "beam3", "beam4"};
    std::array<std::string, 3> velocity = {"vx", "vy", "vz"};
    char delimiter = ',';
};

/// Timestamped ground-truth velocity series (no beam columns).
struct VelocitySeries {
    std::vector<double> t;
    std::vector<Vec3> v;
};

/// Full-schema load: time, four beams, three velocity components.
Section load_csv(const std::string& path, const CsvSchema& schema,
                 const std::string& section_name);

/// Velocity-only load for recordings that carry no beam columns; the
/// beams are then produced by the measurement error model.
VelocitySeries load_velocity_csv(const std::string& path,
                                 const CsvSchema& schema);

/// Sliding windows with stride 1: one sample per index t in [n, len).
std::vector<WindowSample> make_windows(const Section& section, size_t n,
                                       const BeamMask& missing_mask);

enum class Profile { constant, sinusoidal_sway, turn };

/// Parses "constant" | "sinusoidal-sway" | "turn".
Profile parse_profile(const std::string& name);

/// 1 Hz ground-truth velocity series with |v| <= 3 m/s and per-step
/// change <= 0.2 m/s. duration_s must be at least 10 seconds.
std::vector<Vec3> synth_trajectory(Profile profile, double duration_s,
                                   uint64_t seed);

/// Section names routed to each role; every section must appear in
/// exactly one list.
struct SplitAssignment {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

/// Groups sections by the assignment. An empty test role is legal but
/// appends a warning; double or missing assignments are errors.
SectionSet split_sections(std::vector<Section> sections,
                          const SplitAssignment& assignment,
                          std::vector<std::string>* warnings);

}  // namespace beamfill
