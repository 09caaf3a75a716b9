#pragma once

#include <span>
#include <string>
#include <vector>

namespace beamfill {

// Regression scores over velocity-norm series. `truth` carries the
// reference norms x_i, `pred` the estimated norms, both in m/s.

/// Root mean square error, sqrt(sum((x - xhat)^2) / M).
double rmse(std::span<const double> truth, std::span<const double> pred);

/// Mean absolute error.
double mae(std::span<const double> truth, std::span<const double> pred);

/// Coefficient of determination, 1 - SS_res / SS_tot. Requires at least
/// two samples and non-constant truth (ConstantTruth otherwise).
double r_squared(std::span<const double> truth, std::span<const double> pred);

/// Variance accounted for as a percentage:
/// [1 - var(x - xhat) / var(x)] * 100, population variance (divide by M).
double vaf(std::span<const double> truth, std::span<const double> pred);

/// 100 * (baseline - candidate) / baseline. Positive means the candidate
/// improved on the baseline. Throws ZeroBaseline when baseline is not > 0.
double improvement_percent(double baseline, double candidate);

/// Scores of one estimation strategy on one evaluation scope.
struct StrategyScores {
    std::string strategy;
    double rmse_mps = 0;
    double mae_mps = 0;
    double r2 = 0;
    double vaf_pct = 0;
    // Relative to the average baseline; only meaningful when
    // has_improvement is set (neural strategies scored alongside a
    // baseline row).
    bool has_improvement = false;
    double rmse_improvement_pct = 0;
    double mae_improvement_pct = 0;
};

/// One evaluation scope (the pooled test set or a single section).
struct ScopeReport {
    std::string scope;  // "pooled" or the section name
    std::vector<StrategyScores> rows;
};

/// Full evaluation result: pooled scores first, then per-section ones,
/// plus per-strategy RMSE/MAE of the regressed beams themselves.
struct EvalReport {
    std::vector<ScopeReport> scopes;
    struct BeamDiag {
        std::string strategy;
        int beam = 0;  // 1-based
        double rmse_mps = 0;
        double mae_mps = 0;
    };
    std::vector<BeamDiag> beam_diagnostics;
    std::vector<std::string> warnings;
};

/// Aligned text table in the published comparison shape: metric rows,
/// one column per strategy.
std::string format_table(const ScopeReport& scope);

}  // namespace beamfill
