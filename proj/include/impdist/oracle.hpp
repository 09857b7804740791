#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "impdist/logistic.hpp"
#include "impdist/market_data.hpp"

namespace impdist {

/// Payoffs carry a 1/x factor, so densities are evaluated no lower than this
/// floor; any mass below it is relocated to the floor point. Test densities
/// keep that mass negligible.
inline constexpr double kPriceFloorUsd = 1.0;

struct LogisticSpec {
    double m, s;
};
struct LognormalSpec {
    double mu, sigma;  // of ln x
};
struct TabulatedSpec {
    std::vector<double> x;  // ascending
    std::vector<double> f;  // nonnegative, linearly interpolated
};

/// Terminal density of the underlying at maturity: ground truth for the
/// pricing oracle. A weighted sum of truncated analytic or tabulated
/// components plus optional point masses, normalized to total mass 1.
class TerminalDensity {
public:
    static TerminalDensity logistic(double m, double s, double lo = kPriceFloorUsd,
                                    double hi = 0.0 /* default m + 60 s */);
    static TerminalDensity lognormal(double mu, double sigma);
    static TerminalDensity tabulated(std::vector<double> x, std::vector<double> f);
    static TerminalDensity point_mass(double x);
    static TerminalDensity discrete(std::vector<std::pair<double, double>> atoms);
    /// Convex combination; weights are renormalized to sum to 1.
    static TerminalDensity mixture(std::vector<std::pair<double, TerminalDensity>> parts);

    /// Continuous density at x (atoms excluded), normalized over the support.
    double pdf(double x) const;

    double support_lo() const;
    double support_hi() const;

    struct Component {
        std::variant<LogisticSpec, LognormalSpec, TabulatedSpec> spec;
        double weight;  // mixture weight
        double lo, hi;  // truncation range
        double norm;    // 1 / (component mass over [lo, hi])
    };
    const std::vector<Component>& components() const { return components_; }
    const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

private:
    std::vector<Component> components_;
    std::vector<std::pair<double, double>> atoms_;  // (x, weight)
};

/// E[(K - x)+ / x] by adaptive quadrature split at the payoff kink.
double oracle_put(double strike, const TerminalDensity& density);

/// E[(x - K)+ / x].
double oracle_call(double strike, const TerminalDensity& density);

/// Harmonic-mean forward: 1 / E[1/x].
double oracle_inverse_forward(const TerminalDensity& density);

/// Instrument metadata attached to generated snapshot records.
struct ChainMeta {
    std::string underlying = "BTC";
    std::chrono::year_month_day maturity{std::chrono::year(2019), std::chrono::month(6),
                                         std::chrono::day(28)};
    std::int64_t timestamp = 1551398400;  // 2019-03-01 00:00 UTC
};

/// Synthetic snapshot: per strike, a call and a put quoted around the oracle
/// price with the given spread and +-spread/10 uniform noise per side.
/// Deterministic for a fixed seed.
std::vector<QuoteRecord> gen_chain(const TerminalDensity& density,
                                   std::span<const double> strikes, double spread,
                                   std::uint64_t seed, const ChainMeta& meta = {});

/// Model-exact synthetic snapshot: puts priced by the integrated sigmoid at
/// the given parameters, calls built through put-call parity at atm_usd.
std::vector<QuoteRecord> gen_model_chain(const LogisticParams& params, double atm_usd,
                                         std::span<const double> strikes, double spread,
                                         std::uint64_t seed, const ChainMeta& meta = {});

/// Serialize records in the snapshot line format load_snapshot consumes.
std::string to_snapshot_lines(std::span<const QuoteRecord> records);

struct ModelSeriesConfig {
    LogisticParams params;            // s, a fixed along the path; m is the start
    double eta = 1.0;                 // scale factor on the 5-min increment width
    int n_snapshots = 0;
    double tau0_minutes = 0.0;        // remaining life at the first snapshot
    double step_minutes = 5.0;
    std::vector<double> strikes;      // USD
    double spread = 0.0;
    std::uint64_t seed = 1;
    std::string underlying = "BTC";
    std::chrono::year_month_day maturity{std::chrono::year(2019), std::chrono::month(6),
                                         std::chrono::day(28)};
};

/// A sequence of model-exact snapshots whose location follows a random walk
/// with logistic 5-minute increments of scale eta * s * sqrt(step/tau),
/// mirroring the horizon-scaling rule. Ground truth for pipeline validation.
struct ModelSeries {
    std::vector<std::vector<QuoteRecord>> snapshots;
    std::vector<double> location_path;  // kUSD, one per snapshot
    std::vector<std::int64_t> timestamps;
};

ModelSeries gen_model_series(const ModelSeriesConfig& config);

}  // namespace impdist
