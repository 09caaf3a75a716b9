#include "beamfill/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "beamfill/errors.hpp"

namespace beamfill {

namespace {

void check_pair(std::span<const double> truth, std::span<const double> pred) {
    if (truth.empty()) throw EmptyInput("metric on empty series");
    if (truth.size() != pred.size()) {
        throw LengthMismatch("series lengths differ: " +
                             std::to_string(truth.size()) + " vs " +
                             std::to_string(pred.size()));
    }
}

double mean(std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

double rmse(std::span<const double> truth, std::span<const double> pred) {
    check_pair(truth, pred);
    double ss = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = truth[i] - pred[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

double mae(std::span<const double> truth, std::span<const double> pred) {
    check_pair(truth, pred);
    double s = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        s += std::abs(truth[i] - pred[i]);
    }
    return s / static_cast<double>(truth.size());
}

double r_squared(std::span<const double> truth, std::span<const double> pred) {
    check_pair(truth, pred);
    if (truth.size() < 2) throw EmptyInput("r_squared needs at least 2 samples");
    const double xbar = mean(truth);
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double r = truth[i] - pred[i];
        const double d = truth[i] - xbar;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot <= 0) throw ConstantTruth("r_squared undefined for constant truth");
    return 1.0 - ss_res / ss_tot;
}

double vaf(std::span<const double> truth, std::span<const double> pred) {
    check_pair(truth, pred);
    if (truth.size() < 2) throw EmptyInput("vaf needs at least 2 samples");
    const double m = static_cast<double>(truth.size());
    double rbar = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) rbar += truth[i] - pred[i];
    rbar /= m;
    const double xbar = mean(truth);
    double var_res = 0, var_x = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double r = (truth[i] - pred[i]) - rbar;
        const double d = truth[i] - xbar;
        var_res += r * r;
        var_x += d * d;
    }
    var_res /= m;
    var_x /= m;
    if (var_x <= 0) throw ConstantTruth("vaf undefined for constant truth");
    return (1.0 - var_res / var_x) * 100.0;
}

double improvement_percent(double baseline, double candidate) {
    if (!(baseline > 0)) throw ZeroBaseline("baseline must be > 0");
    return 100.0 * (baseline - candidate) / baseline;
}

std::string format_table(const ScopeReport& scope) {
    const char* metric_names[] = {"RMSE [m/s]", "RMSE [%]", "MAE [m/s]",
                                  "MAE [%]",    "R²",       "VAF"};
    const int kCol = 13;
    std::string out;
    char buf[64];

    std::snprintf(buf, sizeof(buf), "%-12s", "Metric");
    out += buf;
    for (const auto& row : scope.rows) {
        std::snprintf(buf, sizeof(buf), "%*s", kCol, row.strategy.c_str());
        out += buf;
    }
    out += '\n';

    for (int m = 0; m < 6; ++m) {
        // metric_names[4] is multi-byte; pad by display width, not bytes
        if (m == 4) {
            out += "R²          ";
        } else {
            std::snprintf(buf, sizeof(buf), "%-12s", metric_names[m]);
            out += buf;
        }
        for (const auto& row : scope.rows) {
            double v = 0;
            bool na = false;
            switch (m) {
                case 0: v = row.rmse_mps; break;
                case 1: v = row.rmse_improvement_pct; na = !row.has_improvement; break;
                case 2: v = row.mae_mps; break;
                case 3: v = row.mae_improvement_pct; na = !row.has_improvement; break;
                case 4: v = row.r2; break;
                case 5: v = row.vaf_pct; break;
            }
            if (na) {
                std::snprintf(buf, sizeof(buf), "%*s", kCol, "N/A");
            } else if (m == 1 || m == 3 || m == 5) {
                std::snprintf(buf, sizeof(buf), "%*.2f", kCol, v);
            } else {
                std::snprintf(buf, sizeof(buf), "%*.4f", kCol, v);
            }
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace beamfill
