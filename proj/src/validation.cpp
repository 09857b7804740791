#include "impdist/validation.hpp"

#include <algorithm>
#include <cmath>

namespace impdist {

namespace {

double ks_statistic(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const auto n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double step = static_cast<double>(i + 1);
        d = std::max(d, std::max(step / n - u[i], u[i] - (step - 1.0) / n));
    }
    return d;
}

double pit_scale(const SnapshotFit& sf, double eta, double horizon_minutes) {
    const HorizonParams hp =
        scale_to_horizon(sf.fit.params, sf.tau_minutes, horizon_minutes);
    return eta * hp.s_h;
}

}  // namespace

std::vector<ForwardReturn> forward_returns(const AtmSeries& series, double nominal_minutes) {
    if (series.timestamps.size() < 2) throw TooShortSeries(series.timestamps.size());
    if (series.timestamps.size() != series.atm_values.size())
        throw Error("ATM series timestamp/value size mismatch");

    std::vector<ForwardReturn> returns;
    const double max_gap_seconds = 2.0 * nominal_minutes * 60.0;
    for (std::size_t i = 1; i < series.timestamps.size(); ++i) {
        const auto dt = series.timestamps[i] - series.timestamps[i - 1];
        if (dt <= 0) throw Error("ATM series timestamps must be strictly ascending");
        if (static_cast<double>(dt) > max_gap_seconds) continue;  // overnight-style gap
        returns.push_back(
            {series.timestamps[i - 1], series.atm_values[i] - series.atm_values[i - 1]});
    }
    return returns;
}

std::vector<PitSample> pit_transform(std::span<const ForwardReturn> returns,
                                     const std::map<std::int64_t, SnapshotFit>& fits,
                                     double eta, double horizon_minutes) {
    if (!(eta > 0.0)) throw Error("pit_transform requires eta > 0");
    std::vector<PitSample> samples;
    samples.reserve(returns.size());
    for (const ForwardReturn& r : returns) {
        const auto it = fits.find(r.timestamp);
        if (it == fits.end()) throw MissingFit(r.timestamp);
        const double scale = pit_scale(it->second, eta, horizon_minutes);
        // Location 0, normalization excluded: the transform must span [0, 1].
        samples.push_back({sigmoid(r.value * kStrikeScale / scale), r.timestamp});
    }
    return samples;
}

double kolmogorov_p_value(double statistic, int n) {
    const double lambda = std::sqrt(static_cast<double>(n)) * statistic;
    if (lambda <= 0.0) return 1.0;
    // Two complementary expansions of the Kolmogorov distribution: the dual
    // theta series converges fast for small lambda, the alternating series
    // for large.
    double p;
    if (lambda < 1.18) {
        const double t = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
        const double sum = t + std::pow(t, 9) + std::pow(t, 25) + std::pow(t, 49);
        p = 1.0 - std::sqrt(2.0 * M_PI) / lambda * sum;
    } else {
        double sum = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            sum += (k % 2 == 1) ? term : -term;
            if (term < 1e-16) break;
        }
        p = 2.0 * sum;
    }
    return std::clamp(p, 0.0, 1.0);
}

KsReport ks_uniform(std::span<const PitSample> samples, double eta_used) {
    if (samples.size() < 5) throw TooFewSamples(samples.size(), 5);
    std::vector<double> u;
    u.reserve(samples.size());
    for (const PitSample& s : samples) u.push_back(s.u);
    KsReport report;
    report.statistic = ks_statistic(std::move(u));
    report.n = static_cast<int>(samples.size());
    report.p_value = kolmogorov_p_value(report.statistic, report.n);
    report.eta = eta_used;
    return report;
}

std::pair<double, KsReport> fit_eta(std::span<const ForwardReturn> returns,
                                    const std::map<std::int64_t, SnapshotFit>& fits,
                                    double horizon_minutes) {
    if (returns.size() < 30) throw TooFewSamples(returns.size(), 30);

    auto statistic_at = [&](double eta) {
        const auto samples = pit_transform(returns, fits, eta, horizon_minutes);
        std::vector<double> u;
        u.reserve(samples.size());
        for (const PitSample& s : samples) u.push_back(s.u);
        const double d = ks_statistic(std::move(u));
        if (!std::isfinite(d)) throw SearchFailure("non-finite KS statistic");
        return d;
    };

    // Golden-section minimization of D(eta); maximizing the p-value is the
    // same search since the p-value is decreasing in D.
    constexpr double kGolden = 0.6180339887498949;
    double a = 0.05, b = 5.0;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = statistic_at(c), fd = statistic_at(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = statistic_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = statistic_at(d);
        }
    }
    const double eta = 0.5 * (a + b);
    const auto samples = pit_transform(returns, fits, eta, horizon_minutes);
    return {eta, ks_uniform(samples, eta)};
}

std::vector<std::pair<double, double>> qq_points(std::span<const PitSample> samples) {
    if (samples.size() < 2) throw TooFewSamples(samples.size(), 2);
    std::vector<double> u;
    u.reserve(samples.size());
    for (const PitSample& s : samples) u.push_back(s.u);
    std::sort(u.begin(), u.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(u.size());
    const auto n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        out.emplace_back((static_cast<double>(i) + 0.5) / n, u[i]);
    return out;
}

}  // namespace impdist
