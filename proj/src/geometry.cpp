#include "beamfill/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "beamfill/errors.hpp"

namespace beamfill {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kSingularTol = 1e-10;  // smallest admissible singular value
}  // namespace

BeamGeometry build_geometry(double alpha_rad) {
    if (!(alpha_rad > 0.0) || !(alpha_rad < 90.0 * kDeg) ||
        !std::isfinite(alpha_rad)) {
        throw DegenerateGeometry(
            "pitch angle must lie strictly between 0 and 90 degrees, got " +
            std::to_string(alpha_rad / kDeg) + " deg");
    }
    BeamGeometry g;
    g.alpha = alpha_rad;
    const double sa = std::sin(alpha_rad);
    const double ca = std::cos(alpha_rad);
    for (int i = 0; i < 4; ++i) {
        g.yaw[i] = (i * 90.0 + 45.0) * kDeg;
        g.matrix[i] = {std::cos(g.yaw[i]) * sa, std::sin(g.yaw[i]) * sa, ca};
    }
    return g;
}

Vec4 project_to_beams(const BeamGeometry& geom, const Vec3& v) {
    Vec4 b{};
    for (int i = 0; i < 4; ++i) {
        b[i] = geom.matrix[i][0] * v[0] + geom.matrix[i][1] * v[1] +
               geom.matrix[i][2] * v[2];
    }
    return b;
}

Vec3 solve_velocity(const BeamGeometry& geom, const Vec4& beams,
                    const BeamMask& active) {
    const int m = mask_count(active);
    if (m < 3) {
        throw InsufficientBeams("velocity needs at least 3 active beams, got " +
                                std::to_string(m));
    }

    // Active rows of the transducer matrix, stored by column.
    double a[3][4];  // a[col][row]
    double y[4];
    int r = 0;
    for (int i = 0; i < 4; ++i) {
        if (!active[i]) continue;
        for (int c = 0; c < 3; ++c) a[c][r] = geom.matrix[i][c];
        y[r] = beams[i];
        ++r;
    }

    // One-sided Jacobi SVD: rotate column pairs of A until mutually
    // orthogonal, accumulating the rotations into V. Then A = U * diag(s)
    // with s the column norms, and v = V * diag(1/s) * U^T y.
    double vmat[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (int k = 0; k < m; ++k) {
                    app += a[p][k] * a[p][k];
                    aqq += a[q][k] * a[q][k];
                    apq += a[p][k] * a[q][k];
                }
                if (apq == 0.0) continue;
                off = std::max(off, std::abs(apq) /
                                        std::sqrt(std::max(app * aqq, 1e-300)));
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int k = 0; k < m; ++k) {
                    const double ap = a[p][k], aq = a[q][k];
                    a[p][k] = c * ap - s * aq;
                    a[q][k] = s * ap + c * aq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vp = vmat[k][p], vq = vmat[k][q];
                    vmat[k][p] = c * vp - s * vq;
                    vmat[k][q] = s * vp + c * vq;
                }
            }
        }
        if (off < 1e-15) break;
    }

    double sigma[3];
    for (int c = 0; c < 3; ++c) {
        double n2 = 0;
        for (int k = 0; k < m; ++k) n2 += a[c][k] * a[c][k];
        sigma[c] = std::sqrt(n2);
    }
    if (std::min({sigma[0], sigma[1], sigma[2]}) < kSingularTol) {
        throw SingularSystem("active beam submatrix is rank deficient");
    }

    // w = diag(1/s) * U^T y, with U columns = A columns / s.
    double w[3];
    for (int c = 0; c < 3; ++c) {
        double d = 0;
        for (int k = 0; k < m; ++k) d += a[c][k] * y[k];
        w[c] = d / (sigma[c] * sigma[c]);
    }
    Vec3 v{};
    for (int k = 0; k < 3; ++k) {
        v[k] = vmat[k][0] * w[0] + vmat[k][1] * w[1] + vmat[k][2] * w[2];
    }
    return v;
}

}  // namespace beamfill
