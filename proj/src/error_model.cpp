#include "beamfill/error_model.hpp"

#include <cmath>

#include "beamfill/errors.hpp"
#include "beamfill/rng.hpp"

namespace beamfill {

void check_params(const ErrorParams& params) {
    if (!(params.noise_std >= 0) || !std::isfinite(params.noise_std)) {
        throw ConfigError("noise_std must be finite and non-negative");
    }
    for (double b : params.bias) {
        if (!std::isfinite(b)) throw ConfigError("bias must be finite");
    }
    for (double s : params.scale) {
        if (!std::isfinite(s) || s <= -1.0) {
            throw ConfigError("scale components must be finite and > -1");
        }
    }
}

Vec4 corrupt_measurement(const BeamGeometry& geom, const Vec3& v,
                         const ErrorParams& params, const Vec4& noise_draw) {
    const Vec3 scaled = {v[0] * (1.0 + params.scale[0]),
                         v[1] * (1.0 + params.scale[1]),
                         v[2] * (1.0 + params.scale[2])};
    Vec4 b = project_to_beams(geom, scaled);
    for (int i = 0; i < 4; ++i) b[i] += params.bias[i] + noise_draw[i];
    return b;
}

std::vector<Vec4> corrupt_series(const BeamGeometry& geom,
                                 std::span<const Vec3> velocities,
                                 const ErrorParams& params) {
    if (velocities.empty()) throw EmptySeries("corrupt_series: empty input");
    check_params(params);

    Rng rng(params.seed);
    std::vector<Vec4> out;
    out.reserve(velocities.size());
    for (const Vec3& v : velocities) {
        Vec4 n{};
        if (params.noise_std > 0) {
            for (int i = 0; i < 4; ++i) n[i] = params.noise_std * rng.normal();
        }
        out.push_back(corrupt_measurement(geom, v, params, n));
    }
    return out;
}

}  // namespace beamfill
