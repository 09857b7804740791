#pragma once

#include <span>
#include <utility>
#include <vector>

#include "impdist/logistic.hpp"
#include "impdist/parity.hpp"

namespace impdist {

enum class FitMode { ThreeParam, OneParam };

/// Least-squares fit of the integrated sigmoid to combined put prices plus
/// the residual/spread diagnostics reported alongside (both x1000, coin
/// units).
struct FitResult {
    LogisticParams params;
    double atm = 0.0;  // USD, as supplied to the fit
    FitMode mode = FitMode::ThreeParam;
    double res_x1000 = 0.0;  // mean |model - mid| x 1000
    double spr_x1000 = 0.0;  // mean bid-ask spread x 1000
    int n_points = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> cost_history;  // cost after each accepted step
};

/// Fit (m, s, a) with s > 0 and 0 < a <= 1.05 by damped Gauss-Newton with the
/// analytic Jacobian. Deterministic: starts from m = atm/1000, s = 0.2 m,
/// a = 1. Needs >= 4 distinct strikes; throws ConvergenceFailure if the
/// iteration cap is hit before the gradient or cost-change criterion.
FitResult fit_three_param(std::span<const CombinedPutPoint> points, double atm);

/// One-dimensional variant: only s is free, m = atm/1000 and a = 1 fixed.
/// Needs >= 2 distinct strikes.
FitResult fit_one_param(std::span<const CombinedPutPoint> points, double atm);

/// (res_x1000, spr_x1000) of a parameter set against the points.
std::pair<double, double> fit_metrics(std::span<const CombinedPutPoint> points,
                                      const LogisticParams& params);

}  // namespace impdist
