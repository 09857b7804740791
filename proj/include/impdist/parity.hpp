#pragma once

#include <span>
#include <vector>

#include "impdist/market_data.hpp"

namespace impdist {

/// Synthetic forward at one strike: C_mid - P_mid in coin. For coin-settled
/// contracts these points lie on the line 1 - K/F.
struct ParityPoint {
    double strike = 0.0;  // USD
    double value = 0.0;   // coin
};

/// Per-strike average of the native put legs and the parity-converted call
/// legs. n_sources is 4 when both legs were quoted, 2 otherwise.
struct CombinedPutPoint {
    double strike = 0.0;  // USD
    double mid = 0.0;     // coin
    double spread = 0.0;  // mean bid-ask width across source legs, coin
    int n_sources = 0;
};

/// Zero crossing of the synthetic forward regression. atm estimates
/// F = E[1/x_T]^-1; the ideal line is value = 1 - K/F, so intercept ~ 1.
struct AtmEstimate {
    double atm = 0.0;        // USD
    double slope = 0.0;      // 1/USD, negative
    double intercept = 0.0;  // dimensionless
    int n_points = 0;
};

/// Convert a call price to the synthetic put at the same strike:
/// P = C - 1 + K/atm.
double call_to_put(double call_mid, double strike, double atm);

/// One point per strike where both a call and a put survived filtering,
/// value = C_mid - P_mid with mids (bid+ask)/2. Throws InsufficientStrikes
/// below 2 strikes.
std::vector<ParityPoint> synthetic_forward_points(const OptionChain& chain);

/// Unweighted least squares of value on strike; atm is the zero crossing.
/// Throws DegenerateRegression when the slope is not negative or the strikes
/// are all equal.
AtmEstimate estimate_atm(std::span<const ParityPoint> points);

/// Pool converted call bid/ask with native put bid/ask per strike and average
/// into combined put points, sorted ascending by strike. Mids within -1e-9 of
/// zero are clamped to 0; anything more negative throws ParityViolation.
std::vector<CombinedPutPoint> combine_puts(const OptionChain& chain, double atm);

}  // namespace impdist
