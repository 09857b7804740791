#include <doctest.h>

#include <algorithm>
#include <random>

#include "impdist/validation.hpp"
#include "support.hpp"

using namespace impdist;

namespace {

AtmSeries series_of(std::vector<std::int64_t> ts, std::vector<double> atm) {
    AtmSeries s;
    s.timestamps = std::move(ts);
    s.atm_values = std::move(atm);
    s.maturity = std::chrono::year_month_day{std::chrono::year(2019), std::chrono::month(1),
                                             std::chrono::day(25)};
    return s;
}

// A flat fit map: same parameters and remaining life at every timestamp.
std::map<std::int64_t, SnapshotFit> flat_fits(const std::vector<std::int64_t>& ts,
                                              const LogisticParams& p, double tau_minutes) {
    std::map<std::int64_t, SnapshotFit> fits;
    for (const auto t : ts) {
        SnapshotFit sf;
        sf.fit.params = p;
        sf.tau_minutes = tau_minutes;
        fits[t] = sf;
    }
    return fits;
}

std::vector<PitSample> wrap(const std::vector<double>& u) {
    std::vector<PitSample> s;
    for (std::size_t i = 0; i < u.size(); ++i)
        s.push_back({u[i], static_cast<std::int64_t>(i)});
    return s;
}

}  // namespace

TEST_CASE("forward_returns differences and the gap rule") {
    const auto r = forward_returns(series_of({0, 300, 600}, {4000, 4010, 3990}));
    REQUIRE(r.size() == 2);
    CHECK(r[0].value == doctest::Approx(10.0));
    CHECK(r[0].timestamp == 0);  // stamped with the left endpoint
    CHECK(r[1].value == doctest::Approx(-20.0));

    const auto flat = forward_returns(series_of({0, 300, 600}, {4000, 4000, 4000}));
    for (const auto& x : flat) CHECK(x.value == 0.0);

    // 7-minute gap kept, 12-minute gap dropped (2x the 5-minute nominal)
    const auto gappy =
        forward_returns(series_of({0, 420, 1140}, {4000, 4010, 4030}));
    REQUIRE(gappy.size() == 1);
    CHECK(gappy[0].value == doctest::Approx(10.0));

    CHECK_THROWS_AS(forward_returns(series_of({0}, {4000})), TooShortSeries);
}

TEST_CASE("pit_transform maps zero to one half and is monotone") {
    const LogisticParams p{3.4, 0.5, 0.95};
    const std::vector<std::int64_t> ts = {0, 300, 600, 900};
    const auto fits = flat_fits(ts, p, 40000.0);
    std::vector<ForwardReturn> returns = {{0, 0.0}, {300, 25.0}, {600, -25.0}, {900, 60.0}};
    const auto samples = pit_transform(returns, fits, 1.0);
    REQUIRE(samples.size() == 4);
    CHECK(samples[0].u == doctest::Approx(0.5));
    CHECK(samples[1].u > 0.5);
    CHECK(samples[2].u < 0.5);
    CHECK(samples[3].u > samples[1].u);  // larger return, larger u
    CHECK(samples[1].u + samples[2].u == doctest::Approx(1.0).epsilon(1e-12));

    returns.push_back({1200, 1.0});
    CHECK_THROWS_AS(pit_transform(returns, fits, 1.0), MissingFit);
    CHECK_THROWS(pit_transform(returns, fits, 0.0));
}

TEST_CASE("ks_uniform on the midpoint grid and on a degenerate sample") {
    std::vector<double> mid;
    for (int i = 1; i <= 100; ++i) mid.push_back((i - 0.5) / 100.0);
    const auto report = ks_uniform(wrap(mid));
    CHECK(report.statistic == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(report.n == 100);

    const auto degenerate = ks_uniform(wrap(std::vector<double>(200, 0.5)));
    CHECK(degenerate.statistic == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(degenerate.p_value < 1e-12);

    CHECK_THROWS_AS(ks_uniform(wrap({0.1, 0.2})), TooFewSamples);
}

TEST_CASE("ks_uniform is permutation-invariant") {
    std::mt19937_64 rng(21);
    std::vector<double> u;
    for (int i = 0; i < 500; ++i) u.push_back(testsup::uniform01(rng));
    const auto base = ks_uniform(wrap(u));
    std::shuffle(u.begin(), u.end(), rng);
    const auto shuffled = ks_uniform(wrap(u));
    CHECK(base.statistic == doctest::Approx(shuffled.statistic).epsilon(1e-15));
    CHECK(base.p_value == doctest::Approx(shuffled.p_value).epsilon(1e-15));
}

TEST_CASE("kolmogorov_p_value matches reference values of the limiting law") {
    // reference: survival function of the Kolmogorov distribution
    CHECK(kolmogorov_p_value(0.5, 1) == doctest::Approx(0.9639452437).epsilon(1e-8));
    CHECK(kolmogorov_p_value(1.0, 1) == doctest::Approx(0.2699996717).epsilon(1e-8));
    CHECK(kolmogorov_p_value(1.358, 1) == doctest::Approx(0.0500267973).epsilon(1e-6));
    CHECK(kolmogorov_p_value(2.0, 1) == doctest::Approx(6.709252558e-4).epsilon(1e-6));
    // sqrt(n) scaling: same lambda, same p
    CHECK(kolmogorov_p_value(0.1, 100) == doctest::Approx(kolmogorov_p_value(1.0, 1)));
}

TEST_CASE("uniform oracle sample passes KS within the expected band") {
    std::mt19937_64 rng(100);
    std::vector<double> u;
    for (int i = 0; i < 1747; ++i) u.push_back(testsup::uniform01(rng));
    const auto report = ks_uniform(wrap(u));
    CHECK(report.p_value > 0.001);
    CHECK(report.p_value < 0.999);
    CHECK(report.statistic < 3.0 / std::sqrt(1747.0));
}

TEST_CASE("correctly scaled logistic returns pass KS in at least 18 of 20 seeds") {
    const LogisticParams p{3.4, 0.5, 0.95};
    const double tau = 40000.0;
    const double s_h = scale_to_horizon(p, tau, 5.0).s_h;
    int passes = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<std::int64_t> ts;
        std::vector<ForwardReturn> returns;
        for (int i = 0; i < 2000; ++i) {
            ts.push_back(300 * i);
            returns.push_back(
                {300 * i, testsup::logistic_draw(rng, 0.0, s_h) / kStrikeScale});
        }
        const auto fits = flat_fits(ts, p, tau);
        const auto samples = pit_transform(returns, fits, 1.0);
        if (ks_uniform(samples, 1.0).p_value > 0.05) ++passes;
    }
    CHECK(passes >= 18);
}

TEST_CASE("pre-scaled returns pass KS when eta matches the generator") {
    const LogisticParams p{3.4, 0.5, 0.95};
    const double tau = 40000.0;
    const double eta = 0.728;
    const double s_h = scale_to_horizon(p, tau, 5.0).s_h;
    std::mt19937_64 rng(5);
    std::vector<std::int64_t> ts;
    std::vector<ForwardReturn> returns;
    for (int i = 0; i < 2000; ++i) {
        ts.push_back(300 * i);
        returns.push_back(
            {300 * i, testsup::logistic_draw(rng, 0.0, eta * s_h) / kStrikeScale});
    }
    const auto fits = flat_fits(ts, p, tau);
    const auto samples = pit_transform(returns, fits, eta);
    CHECK(ks_uniform(samples, eta).p_value > 0.05);
}

namespace {

std::pair<std::vector<ForwardReturn>, std::map<std::int64_t, SnapshotFit>> synthetic_returns(
    double scale_factor, int n, std::uint64_t seed) {
    const LogisticParams p{3.4, 0.5, 0.95};
    const double tau = 40000.0;
    const double s_h = scale_to_horizon(p, tau, 5.0).s_h;
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> ts;
    std::vector<ForwardReturn> returns;
    for (int i = 0; i < n; ++i) {
        ts.push_back(300 * i);
        returns.push_back(
            {300 * i, testsup::logistic_draw(rng, 0.0, scale_factor * s_h) / kStrikeScale});
    }
    return {returns, flat_fits(ts, p, tau)};
}

}  // namespace

TEST_CASE("fit_eta recovers the injected scaling factor") {
    {
        const auto [returns, fits] = synthetic_returns(0.728, 1746, 31);
        const auto [eta, report] = fit_eta(returns, fits);
        CHECK(eta >= 0.69);
        CHECK(eta <= 0.77);
        CHECK(report.eta == doctest::Approx(eta));
        CHECK(report.n == 1746);
    }
    {
        const auto [returns, fits] = synthetic_returns(1.0, 1746, 32);
        const auto [eta, report] = fit_eta(returns, fits);
        CHECK(std::abs(eta - 1.0) <= 0.05);
    }
    {
        const auto [returns, fits] = synthetic_returns(2.0, 1746, 33);
        const auto [eta, report] = fit_eta(returns, fits);
        CHECK(std::abs(eta - 2.0) <= 0.1);
    }
}

TEST_CASE("fit_eta objective is unimodal around the returned optimum") {
    const auto [returns, fits] = synthetic_returns(1.3, 1000, 44);
    const auto [eta, report] = fit_eta(returns, fits);
    const auto p_at = [&](double e) {
        return ks_uniform(pit_transform(returns, fits, e), e).p_value;
    };
    CHECK(report.p_value >= p_at(0.5 * eta));
    CHECK(report.p_value >= p_at(2.0 * eta));
}

TEST_CASE("fit_eta needs enough returns") {
    const auto [returns, fits] = synthetic_returns(1.0, 29, 1);
    CHECK_THROWS_AS(fit_eta(returns, fits), TooFewSamples);
}

TEST_CASE("qq_points shapes") {
    std::vector<double> mid;
    for (int i = 1; i <= 50; ++i) mid.push_back((i - 0.5) / 50.0);
    for (const auto& [uq, eq] : qq_points(wrap(mid)))
        CHECK(uq == doctest::Approx(eq).epsilon(1e-12));  // on the diagonal

    for (const auto& [uq, eq] : qq_points(wrap(std::vector<double>(40, 0.5))))
        CHECK(eq == 0.5);  // horizontal line

    std::mt19937_64 rng(13);
    std::vector<double> u;
    for (int i = 0; i < 1500; ++i) u.push_back(testsup::uniform01(rng));
    double worst = 0.0;
    for (const auto& [uq, eq] : qq_points(wrap(u)))
        worst = std::max(worst, std::abs(uq - eq));
    CHECK(worst < 3.0 / std::sqrt(1500.0));

    CHECK_THROWS_AS(qq_points(wrap({0.5})), TooFewSamples);
}
