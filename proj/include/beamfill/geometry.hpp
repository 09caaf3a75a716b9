#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace beamfill {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

/// Which of the four beams take part in an operation. Meaning depends on
/// context: solve_velocity() reads it as "beam is active", the dataset
/// layer uses the complementary "beam is missing" sense.
using BeamMask = std::array<bool, 4>;

inline int mask_count(const BeamMask& m) {
    return int(m[0]) + int(m[1]) + int(m[2]) + int(m[3]);
}

constexpr BeamMask kAllBeams = {true, true, true, true};

/// Transducer geometry of a four-beam Janus-configured DVL.
///
/// All four transducers share the pitch angle alpha; their yaw angles are
/// 45, 135, 225 and 315 degrees. Row i of `matrix` is the direction cosine
/// triple [cos(yaw_i)*sin(alpha), sin(yaw_i)*sin(alpha), cos(alpha)], so
/// matrix * v maps a sensor-frame velocity to per-beam velocities.
struct BeamGeometry {
    double alpha = 0.0;                       // pitch, radians
    std::array<double, 4> yaw{};              // radians
    std::array<std::array<double, 3>, 4> matrix{};
};

/// Builds the geometry for a pitch angle in (0, 90) degrees, exclusive.
/// Throws DegenerateGeometry outside that range: at 0 the two horizontal
/// columns vanish, at 90 the vertical one does.
BeamGeometry build_geometry(double alpha_rad);

/// Per-beam velocities of a sensor-frame velocity: matrix * v.
Vec4 project_to_beams(const BeamGeometry& geom, const Vec3& v);

/// Least-squares velocity from the active beams. The active submatrix is
/// factorized orthogonally (one-sided Jacobi SVD); with exactly three
/// active beams this reduces to the exact linear solve.
///
/// Throws InsufficientBeams with fewer than three active beams and
/// SingularSystem when the smallest singular value of the active submatrix
/// falls below 1e-10.
Vec3 solve_velocity(const BeamGeometry& geom, const Vec4& beams,
                    const BeamMask& active);

inline double norm3(const Vec3& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace beamfill
