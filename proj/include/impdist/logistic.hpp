#pragma once

#include <cmath>

#include "impdist/errors.hpp"

namespace impdist {

/// Strikes fed to the model are pre-scaled USD/1000 (kUSD). The single place
/// the scaling constant lives.
inline constexpr double kStrikeScale = 1.0 / 1000.0;

/// Upper bound on the normalization parameter: slightly above 1 so noisy fits
/// of a probability-bounded quantity are not rejected outright.
inline constexpr double kMaxNormalization = 1.05;

/// Parameters of the integrated-sigmoid put-price model. Location m and scale
/// s are in kUSD, a is the dimensionless CDF normalization.
struct LogisticParams {
    double m = 0.0;
    double s = 1.0;
    double a = 1.0;

    bool valid() const {
        return std::isfinite(m) && s > 0.0 && a > 0.0 && a <= kMaxNormalization;
    }
};

/// Model scale moved to a shorter horizon by the square-root-of-time rule.
struct HorizonParams {
    double s_h;               // scale in kUSD at the horizon
    double horizon_minutes;   // h
    double tau_minutes;       // T - t at the snapshot
};

/// 1/(1+e^-z), overflow-safe on the whole real line.
inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double t = std::exp(z);
    return t / (1.0 + t);
}

/// log(1+e^z) without overflow for large |z|.
inline double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

/// CDF of the model: a / (1 + e^-(x-m)/s). Ranges over (0, a).
inline double logistic_cdf(double x, const LogisticParams& p) {
    return p.a * sigmoid((x - p.m) / p.s);
}

/// Density: a * e^-(x-m)/s / (s * (1+e^-(x-m)/s)^2), symmetric about m.
inline double logistic_pdf(double x, const LogisticParams& p) {
    const double t = std::exp(-std::abs((x - p.m) / p.s));
    const double one_plus_t = 1.0 + t;
    return p.a * t / (p.s * one_plus_t * one_plus_t);
}

/// Integrated-sigmoid put price at scaled strike k: a * s * log(1+e^(k-m)/s).
/// Strictly increasing and convex in k; its second strike-derivative is the
/// a-scaled logistic density.
inline double is_price(double k, const LogisticParams& p) {
    return p.a * p.s * softplus((k - p.m) / p.s);
}

/// Mass the model puts at strikes <= 0: the implied probability of a
/// (near-)zero coin price.
inline double implied_pd(const LogisticParams& p) { return logistic_cdf(0.0, p); }

/// Shrink the fitted scale from the remaining life tau to a shorter horizon h
/// by sqrt(h/tau). The return-space location is 0 by construction.
inline HorizonParams scale_to_horizon(const LogisticParams& p, double tau_minutes,
                                      double horizon_minutes) {
    if (!(horizon_minutes > 0.0) || horizon_minutes > tau_minutes)
        throw InvalidHorizon(horizon_minutes, tau_minutes);
    return {p.s * std::sqrt(horizon_minutes / tau_minutes), horizon_minutes, tau_minutes};
}

}  // namespace impdist
