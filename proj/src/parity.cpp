#include "impdist/parity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace impdist {

namespace {

struct Leg {
    const QuoteRecord* call = nullptr;
    const QuoteRecord* put = nullptr;
};

// First quote per (strike, kind) wins; snapshots carry unique instruments.
std::map<double, Leg> legs_by_strike(const OptionChain& chain) {
    std::map<double, Leg> legs;
    for (const QuoteRecord& rec : chain.quotes) {
        Leg& leg = legs[*rec.instrument.strike];
        if (rec.instrument.kind == InstrumentKind::Call) {
            if (!leg.call) leg.call = &rec;
        } else if (!leg.put) {
            leg.put = &rec;
        }
    }
    return legs;
}

double mid(const QuoteRecord& rec) { return 0.5 * (*rec.bid + *rec.ask); }

}  // namespace

double call_to_put(double call_mid, double strike, double atm) {
    if (!(atm > 0.0)) throw Error("call_to_put requires atm > 0");
    return call_mid - 1.0 + strike / atm;
}

std::vector<ParityPoint> synthetic_forward_points(const OptionChain& chain) {
    std::vector<ParityPoint> points;
    for (const auto& [strike, leg] : legs_by_strike(chain)) {
        if (!leg.call || !leg.put) continue;
        points.push_back({strike, mid(*leg.call) - mid(*leg.put)});
    }
    if (points.size() < 2) throw InsufficientStrikes(points.size());
    return points;
}

AtmEstimate estimate_atm(std::span<const ParityPoint> points) {
    const auto n = static_cast<double>(points.size());
    if (points.size() < 2) throw InsufficientStrikes(points.size());

    double mean_k = 0.0, mean_v = 0.0;
    for (const ParityPoint& p : points) {
        mean_k += p.strike;
        mean_v += p.value;
    }
    mean_k /= n;
    mean_v /= n;

    double sxx = 0.0, sxy = 0.0;
    for (const ParityPoint& p : points) {
        sxx += (p.strike - mean_k) * (p.strike - mean_k);
        sxy += (p.strike - mean_k) * (p.value - mean_v);
    }
    if (sxx == 0.0) throw DegenerateRegression("all strikes equal");

    AtmEstimate est;
    est.slope = sxy / sxx;
    est.intercept = mean_v - est.slope * mean_k;
    est.n_points = static_cast<int>(points.size());
    if (!(est.slope < 0.0)) throw DegenerateRegression("slope not negative");
    est.atm = -est.intercept / est.slope;
    if (!(est.atm > 0.0)) throw DegenerateRegression("zero crossing not positive");
    return est;
}

std::vector<CombinedPutPoint> combine_puts(const OptionChain& chain, double atm) {
    if (!(atm > 0.0)) throw Error("combine_puts requires atm > 0");
    std::vector<CombinedPutPoint> points;
    for (const auto& [strike, leg] : legs_by_strike(chain)) {
        CombinedPutPoint pt;
        pt.strike = strike;
        double sum = 0.0, spread_sum = 0.0;
        int sides = 0, n_legs = 0;
        if (leg.put) {
            sum += *leg.put->bid + *leg.put->ask;
            spread_sum += *leg.put->ask - *leg.put->bid;
            sides += 2;
            ++n_legs;
        }
        if (leg.call) {
            sum += call_to_put(*leg.call->bid, strike, atm) +
                   call_to_put(*leg.call->ask, strike, atm);
            spread_sum += *leg.call->ask - *leg.call->bid;  // conversion is additive
            sides += 2;
            ++n_legs;
        }
        pt.mid = sum / sides;
        pt.spread = spread_sum / n_legs;
        pt.n_sources = sides;
        if (pt.mid < 0.0) {
            if (pt.mid < -1e-9) throw ParityViolation(strike, pt.mid);
            pt.mid = 0.0;
        }
        points.push_back(pt);
    }
    if (points.empty()) throw NoCombinedPoints();
    return points;  // map iteration is already strike-ascending
}

}  // namespace impdist
