#pragma once

#include <utility>
#include <vector>

#include "impdist/errors.hpp"

namespace impdist {

enum class CurveKind { Put, Call };

/// Option prices on a strictly ascending strike grid. The divided-difference
/// estimators below work in whatever units the grid uses and return
/// derivatives against that axis.
struct PriceCurve {
    std::vector<double> strikes;
    std::vector<double> prices;  // coin
    CurveKind kind = CurveKind::Put;
};

enum class QuoteSide { Bid, Ask, Mid };

struct SmilePoint {
    double strike = 0.0;
    double implied_vol = 0.0;  // annualized lognormal vol
    QuoteSide side = QuoteSide::Mid;
};

inline constexpr double kMinutesPerYear = 365.0 * 24.0 * 60.0;

/// First divided differences dP/dK on the interior grid (n-2 points). For a
/// put curve this estimates the a-scaled CDF of the fitted model when the
/// grid is in the model's strike units.
std::vector<std::pair<double, double>> bl_cdf(const PriceCurve& curve);

/// Three-point second divided differences on the (possibly nonuniform)
/// interior grid: the model-free density estimate.
std::vector<std::pair<double, double>> bl_pdf(const PriceCurve& curve);

/// Coin-settled call under a lognormal terminal density with harmonic-mean
/// forward F: N(d1) - (K/F) N(d2), d1 = [ln(F/K) + vol^2 tau/2]/(vol sqrt(tau)).
double inverse_call_price(double forward, double strike, double vol, double tau_years);

/// Invert inverse_call_price in vol by bracketed bisection. Throws NoSolution
/// for prices outside [intrinsic, 1).
double implied_vol(double price, double forward, double strike, double tau_years);

/// Standard normal CDF.
double norm_cdf(double x);

}  // namespace impdist
