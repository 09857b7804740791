#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "impdist/calibration.hpp"
#include "impdist/logistic.hpp"
#include "impdist/parity.hpp"

namespace testsup {

// Test-side RNG helpers, independent of library internals.
inline double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline double logistic_draw(std::mt19937_64& rng, double location, double scale) {
    const double u = uniform01(rng);
    return location + scale * std::log(u / (1.0 - u));
}

// Central finite differences: the independent derivative oracle.
inline double fd_first(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd_second(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Composite Simpson integration on [a, b]; n must be even.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Synthetic combined put points generated straight from the price model.
inline std::vector<impdist::CombinedPutPoint> model_points(
    const impdist::LogisticParams& params, const std::vector<double>& strikes_usd,
    double spread = 0.0, double noise_half_width = 0.0, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::vector<impdist::CombinedPutPoint> points;
    for (double k : strikes_usd) {
        impdist::CombinedPutPoint p;
        p.strike = k;
        p.mid = impdist::is_price(k * impdist::kStrikeScale, params);
        if (noise_half_width > 0.0)
            p.mid += uniform(rng, -noise_half_width, noise_half_width);
        p.spread = spread;
        p.n_sources = 4;
        points.push_back(p);
    }
    return points;
}

inline std::vector<double> strike_grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (double k = lo; k <= hi + 1e-9; k += step) out.push_back(k);
    return out;
}

}  // namespace testsup
