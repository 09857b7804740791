#include "impdist/density_tools.hpp"

#include <algorithm>
#include <cmath>

namespace impdist {

namespace {

void check_curve(const PriceCurve& curve) {
    if (curve.strikes.size() < 3) throw GridTooSmall(curve.strikes.size());
    if (curve.strikes.size() != curve.prices.size())
        throw Error("price curve strike/price size mismatch");
    for (std::size_t i = 1; i < curve.strikes.size(); ++i)
        if (!(curve.strikes[i] > curve.strikes[i - 1]))
            throw Error("price curve strikes must be strictly ascending");
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<std::pair<double, double>> bl_cdf(const PriceCurve& curve) {
    check_curve(curve);
    const auto& k = curve.strikes;
    const auto& p = curve.prices;
    std::vector<std::pair<double, double>> out;
    out.reserve(k.size() - 2);
    for (std::size_t i = 1; i + 1 < k.size(); ++i)
        out.emplace_back(k[i], (p[i + 1] - p[i - 1]) / (k[i + 1] - k[i - 1]));
    return out;
}

std::vector<std::pair<double, double>> bl_pdf(const PriceCurve& curve) {
    check_curve(curve);
    const auto& k = curve.strikes;
    const auto& p = curve.prices;
    std::vector<std::pair<double, double>> out;
    out.reserve(k.size() - 2);
    for (std::size_t i = 1; i + 1 < k.size(); ++i) {
        const double h0 = k[i] - k[i - 1];
        const double h1 = k[i + 1] - k[i];
        const double d2 =
            2.0 * ((p[i + 1] - p[i]) / h1 - (p[i] - p[i - 1]) / h0) / (h0 + h1);
        out.emplace_back(k[i], d2);
    }
    return out;
}

double inverse_call_price(double forward, double strike, double vol, double tau_years) {
    if (!(forward > 0.0) || !(strike > 0.0)) throw Error("inverse_call_price needs F, K > 0");
    if (!(tau_years > 0.0)) throw Error("inverse_call_price needs tau > 0");
    if (vol <= 0.0) return std::max(0.0, 1.0 - strike / forward);
    const double vt = vol * std::sqrt(tau_years);
    const double d1 = std::log(forward / strike) / vt + 0.5 * vt;
    const double d2 = d1 - vt;
    return norm_cdf(d1) - (strike / forward) * norm_cdf(d2);
}

double implied_vol(double price, double forward, double strike, double tau_years) {
    const double intrinsic = std::max(0.0, 1.0 - strike / forward);
    if (!(price > intrinsic)) throw NoSolution("price at or below intrinsic value");
    if (!(price < 1.0)) throw NoSolution("price at or above the coin value");

    // price is strictly increasing in vol, from intrinsic to 1: bracket then
    // bisect until both the vol interval and the price error are resolved.
    double lo = 1e-9, hi = 1.0;
    while (inverse_call_price(forward, strike, hi, tau_years) < price) {
        hi *= 2.0;
        if (hi > 1e6) throw NoSolution("price not attainable at any finite vol");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double diff = inverse_call_price(forward, strike, mid, tau_years) - price;
        if (hi - lo < 1e-12 && std::abs(diff) < 1e-10) return mid;
        if (diff < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace impdist
