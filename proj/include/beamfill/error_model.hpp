#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "beamfill/geometry.hpp"

namespace beamfill {

/// Sensor error parameters of a DVL unit under test. The scale factor acts
/// on the sensor-frame velocity before projection, the bias and noise on
/// the beam measurements after it:
///
///   y = T * (v .* (1 + scale)) + bias + n,   n ~ N(0, noise_std^2 I)
struct ErrorParams {
    Vec4 bias{};          // m/s, one entry per beam
    Vec3 scale{};         // unitless, per velocity axis; each must be > -1
    double noise_std = 0; // m/s
    std::uint64_t seed = 0;
};

/// Validates finiteness, noise_std >= 0 and scale > -1. Throws Error.
void check_params(const ErrorParams& params);

/// One corrupted measurement with an externally supplied noise draw.
Vec4 corrupt_measurement(const BeamGeometry& geom, const Vec3& v,
                         const ErrorParams& params, const Vec4& noise_draw);

/// Corrupts a whole series. Noise comes from a stream seeded with
/// params.seed; draws are consumed sample by sample, beams 1..4 within a
/// sample, so identical (seed, series) pairs give bit-identical output.
/// Throws EmptySeries on an empty input.
std::vector<Vec4> corrupt_series(const BeamGeometry& geom,
                                 std::span<const Vec3> velocities,
                                 const ErrorParams& params);

}  // namespace beamfill
