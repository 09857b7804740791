#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "impdist/calibration.hpp"

namespace impdist {

/// Nominal spacing of order-book snapshots.
inline constexpr double kNominalSnapshotMinutes = 5.0;

/// Parity-implied ATM levels over time for one maturity, used as the futures
/// proxy.
struct AtmSeries {
    std::vector<std::int64_t> timestamps;  // strictly ascending, UNIX seconds
    std::vector<double> atm_values;        // USD
    std::chrono::year_month_day maturity;
};

/// One realized forward return pushed through the implied CDF.
struct PitSample {
    double u = 0.0;  // probability in [0, 1]
    std::int64_t timestamp = 0;
};

struct KsReport {
    double statistic = 0.0;  // sup distance D
    double p_value = 0.0;
    int n = 0;
    double eta = std::numeric_limits<double>::quiet_NaN();  // scaling used, NaN if none
};

/// r_FWD = ATM_t - ATM_{t-1}, stamped with the left (forecast) timestamp.
struct ForwardReturn {
    std::int64_t timestamp = 0;  // left endpoint of the interval
    double value = 0.0;          // USD
};

/// Per-snapshot fit plus the remaining life at that snapshot.
struct SnapshotFit {
    FitResult fit;
    double tau_minutes = 0.0;
};

/// Consecutive differences of the ATM series. Intervals longer than twice the
/// nominal spacing produce no return. Throws TooShortSeries below 2 points.
std::vector<ForwardReturn> forward_returns(const AtmSeries& series,
                                           double nominal_minutes = kNominalSnapshotMinutes);

/// Map each return through the sigmoid CDF with location 0 and scale
/// eta * s_h, where s_h comes from scale_to_horizon of the fit at the
/// return's left timestamp. The normalization a is not applied: the transform
/// must cover [0, 1]. Throws MissingFit when a timestamp has no fit.
std::vector<PitSample> pit_transform(std::span<const ForwardReturn> returns,
                                     const std::map<std::int64_t, SnapshotFit>& fits,
                                     double eta,
                                     double horizon_minutes = kNominalSnapshotMinutes);

/// One-sample Kolmogorov-Smirnov test against U(0,1); p-value from the
/// asymptotic Kolmogorov series at sqrt(n) * D. Needs n >= 5.
KsReport ks_uniform(std::span<const PitSample> samples,
                    double eta_used = std::numeric_limits<double>::quiet_NaN());

/// Asymptotic Kolmogorov p-value of statistic D at sample size n.
double kolmogorov_p_value(double statistic, int n);

/// Golden-section search of eta in [0.05, 5] minimizing the KS statistic
/// (equivalently maximizing its p-value), tolerance 1e-4. Needs >= 30
/// returns.
std::pair<double, KsReport> fit_eta(std::span<const ForwardReturn> returns,
                                    const std::map<std::int64_t, SnapshotFit>& fits,
                                    double horizon_minutes = kNominalSnapshotMinutes);

/// Sorted sample against midpoint uniform quantiles (i-0.5)/n, for QQ plots.
std::vector<std::pair<double, double>> qq_points(std::span<const PitSample> samples);

}  // namespace impdist
