#include "impdist/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "impdist/density_tools.hpp"

namespace impdist {

namespace {

constexpr double kQuadratureTol = 1e-10;  // absolute, per expectation

double lognormal_pdf(const LognormalSpec& ln, double x) {
    const double z = (std::log(x) - ln.mu) / ln.sigma;
    return std::exp(-0.5 * z * z) / (x * ln.sigma * std::sqrt(2.0 * M_PI));
}

double logistic_base_pdf(const LogisticSpec& lg, double x) {
    const double t = std::exp(-std::abs((x - lg.m) / lg.s));
    return t / (lg.s * (1.0 + t) * (1.0 + t));
}

double tabulated_pdf(const TabulatedSpec& tab, double x) {
    if (x <= tab.x.front() || x >= tab.x.back()) {
        if (x == tab.x.front()) return tab.f.front();
        if (x == tab.x.back()) return tab.f.back();
        return 0.0;
    }
    const auto it = std::upper_bound(tab.x.begin(), tab.x.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - tab.x.begin());
    const double w = (x - tab.x[i - 1]) / (tab.x[i] - tab.x[i - 1]);
    return tab.f[i - 1] + w * (tab.f[i] - tab.f[i - 1]);
}

double base_pdf(const TerminalDensity::Component& c, double x) {
    if (const auto* lg = std::get_if<LogisticSpec>(&c.spec)) return logistic_base_pdf(*lg, x);
    if (const auto* ln = std::get_if<LognormalSpec>(&c.spec)) return lognormal_pdf(*ln, x);
    return tabulated_pdf(std::get<TabulatedSpec>(c.spec), x);
}

// Unnormalized mass of the component's base distribution below x, closed form.
double base_cdf(const TerminalDensity::Component& c, double x) {
    if (const auto* lg = std::get_if<LogisticSpec>(&c.spec))
        return sigmoid((x - lg->m) / lg->s);
    if (const auto* ln = std::get_if<LognormalSpec>(&c.spec))
        return x <= 0.0 ? 0.0 : norm_cdf((std::log(x) - ln->mu) / ln->sigma);
    const auto& tab = std::get<TabulatedSpec>(c.spec);
    if (x <= tab.x.front()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < tab.x.size(); ++i) {
        if (x >= tab.x[i]) {
            acc += 0.5 * (tab.f[i - 1] + tab.f[i]) * (tab.x[i] - tab.x[i - 1]);
        } else {
            const double fx = tabulated_pdf(tab, x);
            acc += 0.5 * (tab.f[i - 1] + fx) * (x - tab.x[i - 1]);
            break;
        }
    }
    return acc;
}

template <typename F>
double integrate_gk(const F& f, double a, double b, double* error_acc) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, /*max_depth=*/15, /*rel_tol=*/1e-13, &err);
    *error_acc += err;
    return v;
}

// E[g(x)] with mass below the price floor relocated to the floor point.
// Integration is clipped per component to [region_lo, region_hi] where g may
// be nonzero, assuming g == 0 outside; the kink of g must sit on a boundary.
template <typename G>
double expectation(const TerminalDensity& density, const G& g, double region_lo,
                   double region_hi) {
    double total = 0.0;
    double floor_mass = 0.0;
    double err_acc = 0.0;
    for (const auto& c : density.components()) {
        if (c.lo < kPriceFloorUsd) {
            const double cut = std::min(kPriceFloorUsd, c.hi);
            floor_mass += c.weight * c.norm * (base_cdf(c, cut) - base_cdf(c, c.lo));
        }
        const double a = std::max({c.lo, kPriceFloorUsd, region_lo});
        const double b = std::min(c.hi, region_hi);
        if (b <= a) continue;
        auto integrand = [&](double x) { return base_pdf(c, x) * g(x); };
        if (const auto* tab = std::get_if<TabulatedSpec>(&c.spec)) {
            // integrate node interval by node interval: exact per linear piece
            double prev = a;
            for (double node : tab->x) {
                if (node <= a) continue;
                const double stop = std::min(node, b);
                total += c.weight * c.norm * integrate_gk(integrand, prev, stop, &err_acc);
                prev = stop;
                if (stop >= b) break;
            }
            if (prev < b) total += c.weight * c.norm * integrate_gk(integrand, prev, b, &err_acc);
        } else {
            total += c.weight * c.norm * integrate_gk(integrand, a, b, &err_acc);
        }
    }
    for (const auto& [x, w] : density.atoms()) {
        if (x < kPriceFloorUsd)
            floor_mass += w;
        else if (x >= region_lo && x <= region_hi)
            total += w * g(x);
    }
    total += floor_mass * g(kPriceFloorUsd);
    if (err_acc > kQuadratureTol * std::max(1.0, std::abs(total)))
        throw QuadratureFailure(err_acc);
    return total;
}

double canonical_uniform(std::mt19937_64& rng) {
    // strictly inside (0, 1); bit-stable across standard libraries
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::optional<double> make_side(double price, double half_spread, double noise) {
    return std::max(0.0, price + half_spread + noise);
}

QuoteRecord make_record(const ChainMeta& meta, double strike, InstrumentKind kind,
                        double price, double spread, std::mt19937_64& rng) {
    QuoteRecord rec;
    rec.instrument.underlying = meta.underlying;
    rec.instrument.maturity = meta.maturity;
    rec.instrument.strike = strike;
    rec.instrument.kind = kind;
    rec.timestamp = meta.timestamp;
    const double amp = spread / 10.0;
    const double noise_bid = amp * (2.0 * canonical_uniform(rng) - 1.0);
    const double noise_ask = amp * (2.0 * canonical_uniform(rng) - 1.0);
    rec.bid = make_side(price, -spread / 2.0, noise_bid);
    rec.ask = make_side(price, +spread / 2.0, noise_ask);
    return rec;
}

}  // namespace

TerminalDensity TerminalDensity::logistic(double m, double s, double lo, double hi) {
    if (!(s > 0.0)) throw Error("logistic density needs s > 0");
    if (hi <= 0.0) hi = m + 60.0 * s;
    if (!(hi > lo)) throw Error("logistic density needs hi > lo");
    TerminalDensity d;
    Component c{LogisticSpec{m, s}, 1.0, lo, hi, 1.0};
    c.norm = 1.0 / (base_cdf(c, hi) - base_cdf(c, lo));
    d.components_.push_back(c);
    return d;
}

TerminalDensity TerminalDensity::lognormal(double mu, double sigma) {
    if (!(sigma > 0.0)) throw Error("lognormal density needs sigma > 0");
    TerminalDensity d;
    Component c{LognormalSpec{mu, sigma}, 1.0, std::exp(mu - 14.0 * sigma),
                std::exp(mu + 14.0 * sigma), 1.0};
    c.norm = 1.0 / (base_cdf(c, c.hi) - base_cdf(c, c.lo));
    d.components_.push_back(c);
    return d;
}

TerminalDensity TerminalDensity::tabulated(std::vector<double> x, std::vector<double> f) {
    if (x.size() != f.size() || x.size() < 2) throw Error("tabulated density needs >= 2 nodes");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0 && !(x[i] > x[i - 1])) throw Error("tabulated nodes must be ascending");
        if (!(f[i] >= 0.0)) throw Error("tabulated density must be nonnegative");
    }
    TerminalDensity d;
    Component c{TabulatedSpec{std::move(x), std::move(f)}, 1.0, 0.0, 0.0, 1.0};
    const auto& tab = std::get<TabulatedSpec>(c.spec);
    c.lo = tab.x.front();
    c.hi = tab.x.back();
    const double mass = base_cdf(c, c.hi);
    if (!(mass > 0.0)) throw Error("tabulated density has zero mass");
    c.norm = 1.0 / mass;
    d.components_.push_back(c);
    return d;
}

TerminalDensity TerminalDensity::point_mass(double x) { return discrete({{x, 1.0}}); }

TerminalDensity TerminalDensity::discrete(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw Error("discrete density needs atoms");
    double total = 0.0;
    for (const auto& [x, w] : atoms) {
        if (!(w > 0.0)) throw Error("atom weights must be positive");
        total += w;
    }
    TerminalDensity d;
    for (auto& [x, w] : atoms) d.atoms_.emplace_back(x, w / total);
    return d;
}

TerminalDensity TerminalDensity::mixture(
    std::vector<std::pair<double, TerminalDensity>> parts) {
    if (parts.empty()) throw Error("mixture needs parts");
    double total = 0.0;
    for (const auto& [w, part] : parts) {
        if (!(w > 0.0)) throw Error("mixture weights must be positive");
        total += w;
    }
    TerminalDensity d;
    for (const auto& [w, part] : parts) {
        for (Component c : part.components_) {
            c.weight *= w / total;
            d.components_.push_back(std::move(c));
        }
        for (const auto& [x, aw] : part.atoms_) d.atoms_.emplace_back(x, aw * w / total);
    }
    return d;
}

double TerminalDensity::pdf(double x) const {
    double v = 0.0;
    for (const auto& c : components_)
        if (x >= c.lo && x <= c.hi) v += c.weight * c.norm * base_pdf(c, x);
    return v;
}

double TerminalDensity::support_lo() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& c : components_) lo = std::min(lo, c.lo);
    for (const auto& [x, w] : atoms_) lo = std::min(lo, x);
    return lo;
}

double TerminalDensity::support_hi() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : components_) hi = std::max(hi, c.hi);
    for (const auto& [x, w] : atoms_) hi = std::max(hi, x);
    return hi;
}

double oracle_put(double strike, const TerminalDensity& density) {
    if (strike <= kPriceFloorUsd) return 0.0;
    auto payoff = [strike](double x) { return (strike - x) / x; };
    return expectation(density, payoff, -std::numeric_limits<double>::infinity(), strike);
}

double oracle_call(double strike, const TerminalDensity& density) {
    auto payoff = [strike](double x) { return x <= strike ? 0.0 : (x - strike) / x; };
    return expectation(density, payoff, strike, std::numeric_limits<double>::infinity());
}

double oracle_inverse_forward(const TerminalDensity& density) {
    auto inv = [](double x) { return 1.0 / x; };
    const double e = expectation(density, inv, -std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity());
    return 1.0 / e;
}

std::vector<QuoteRecord> gen_chain(const TerminalDensity& density,
                                   std::span<const double> strikes, double spread,
                                   std::uint64_t seed, const ChainMeta& meta) {
    if (spread < 0.0) throw Error("spread must be nonnegative");
    std::mt19937_64 rng(seed);
    std::vector<QuoteRecord> records;
    records.reserve(strikes.size() * 2);
    for (double strike : strikes) {
        records.push_back(make_record(meta, strike, InstrumentKind::Call,
                                      oracle_call(strike, density), spread, rng));
        records.push_back(make_record(meta, strike, InstrumentKind::Put,
                                      oracle_put(strike, density), spread, rng));
    }
    return records;
}

std::vector<QuoteRecord> gen_model_chain(const LogisticParams& params, double atm_usd,
                                         std::span<const double> strikes, double spread,
                                         std::uint64_t seed, const ChainMeta& meta) {
    if (!params.valid()) throw Error("invalid model parameters");
    if (!(atm_usd > 0.0)) throw Error("atm must be positive");
    std::mt19937_64 rng(seed);
    std::vector<QuoteRecord> records;
    records.reserve(strikes.size() * 2);
    for (double strike : strikes) {
        const double put = is_price(strike * kStrikeScale, params);
        const double call = put + 1.0 - strike / atm_usd;  // parity at atm
        records.push_back(make_record(meta, strike, InstrumentKind::Call, call, spread, rng));
        records.push_back(make_record(meta, strike, InstrumentKind::Put, put, spread, rng));
    }
    return records;
}

std::string to_snapshot_lines(std::span<const QuoteRecord> records) {
    std::string out;
    for (const QuoteRecord& rec : records) {
        nlohmann::json j;
        j["instrument"] = format_instrument(rec.instrument);
        if (rec.bid) j["bid"] = *rec.bid;
        if (rec.ask) j["ask"] = *rec.ask;
        j["ts"] = rec.timestamp;
        out += j.dump();
        out += '\n';
    }
    return out;
}

ModelSeries gen_model_series(const ModelSeriesConfig& config) {
    if (!config.params.valid()) throw Error("invalid model parameters");
    if (config.n_snapshots < 1 || config.strikes.empty())
        throw Error("series needs snapshots and strikes");
    const double tau_last =
        config.tau0_minutes - (config.n_snapshots - 1) * config.step_minutes;
    if (!(tau_last > 0.0)) throw Error("series would cross settlement");

    std::mt19937_64 rng(config.seed);
    const std::int64_t settlement = settlement_timestamp(config.maturity);
    const auto t0 = settlement - static_cast<std::int64_t>(std::llround(config.tau0_minutes * 60.0));

    ModelSeries series;
    double m = config.params.m;
    for (int i = 0; i < config.n_snapshots; ++i) {
        ChainMeta meta{config.underlying, config.maturity,
                       t0 + static_cast<std::int64_t>(i) *
                                static_cast<std::int64_t>(std::llround(config.step_minutes * 60.0))};
        LogisticParams p = config.params;
        p.m = m;
        series.snapshots.push_back(
            gen_model_chain(p, m / kStrikeScale, config.strikes, config.spread, rng(), meta));
        series.location_path.push_back(m);
        series.timestamps.push_back(meta.timestamp);

        const double tau_i = config.tau0_minutes - i * config.step_minutes;
        const double scale =
            config.eta * config.params.s * std::sqrt(config.step_minutes / tau_i);
        const double u = canonical_uniform(rng);
        m += scale * std::log(u / (1.0 - u));  // logistic increment
    }
    return series;
}

}  // namespace impdist
