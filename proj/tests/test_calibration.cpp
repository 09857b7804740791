#include <doctest.h>

#include <algorithm>
#include <random>

#include "impdist/calibration.hpp"
#include "support.hpp"

using namespace impdist;
using testsup::model_points;
using testsup::strike_grid;

TEST_CASE("fit_three_param recovers exact model points") {
    const LogisticParams truth{3.22, 0.68, 0.95};
    const auto points = model_points(truth, strike_grid(1500, 6000, 250));
    const auto fit = fit_three_param(points, 3220);
    CHECK(std::abs(fit.params.m - truth.m) / truth.m < 1e-6);
    CHECK(std::abs(fit.params.s - truth.s) / truth.s < 1e-6);
    CHECK(std::abs(fit.params.a - truth.a) / truth.a < 1e-6);
    CHECK(fit.converged);
    CHECK(fit.res_x1000 < 1e-6);
    CHECK(fit.mode == FitMode::ThreeParam);
    CHECK(fit.n_points == static_cast<int>(points.size()));
}

TEST_CASE("fit residual stays below the injected spread") {
    // noise of half the spread keeps the fit within the bid-ask band
    const LogisticParams truth{3.22, 0.68, 0.95};
    const double spread = 0.006;
    const auto points =
        model_points(truth, strike_grid(1500, 6000, 250), spread, spread / 2, 33);
    const auto fit = fit_three_param(points, 3220);
    CHECK(fit.spr_x1000 == doctest::Approx(6.0));
    CHECK(fit.res_x1000 <= fit.spr_x1000);
}

TEST_CASE("fit_three_param needs four distinct strikes") {
    const LogisticParams truth{3.0, 0.5, 1.0};
    CHECK_THROWS_AS(fit_three_param(model_points(truth, {2000, 3000, 4000}), 3000),
                    TooFewPoints);
    // duplicated strikes do not count twice
    auto pts = model_points(truth, {2000, 3000, 4000});
    pts.push_back(pts.back());
    CHECK_THROWS_AS(fit_three_param(pts, 3000), TooFewPoints);
}

TEST_CASE("fit_one_param recovers s on its own model family") {
    const double atm = 3400;
    const LogisticParams truth{atm / 1000.0, 0.9, 1.0};
    const auto points = model_points(truth, strike_grid(1200, 6400, 200));
    const auto fit = fit_one_param(points, atm);
    CHECK(std::abs(fit.params.s - truth.s) / truth.s < 1e-8);
    CHECK(fit.params.m == doctest::Approx(atm / 1000.0));
    CHECK(fit.params.a == 1.0);
    CHECK_THROWS_AS(fit_one_param(model_points(truth, {3000}), atm), TooFewPoints);
}

TEST_CASE("fit_one_param is independent of point ordering") {
    const LogisticParams truth{3.1, 0.62, 0.94};
    auto points = model_points(truth, strike_grid(1500, 6000, 300), 0.004, 0.002, 7);
    const auto forward_fit = fit_one_param(points, 3250);
    std::mt19937_64 rng(3);
    std::shuffle(points.begin(), points.end(), rng);
    const auto shuffled_fit = fit_one_param(points, 3250);
    CHECK(forward_fit.params.s == doctest::Approx(shuffled_fit.params.s).epsilon(1e-12));
}

TEST_CASE("single-s runs above the 3-parameter s when the centre sits above m") {
    // When a < 1 the put curve flattens; with the ATM pinned above the fitted
    // location (as parity-implied forwards sit on tilted coin-settled data),
    // the one-parameter fit widens s to compensate.
    for (const auto& truth :
         {LogisticParams{3.38, 0.51, 0.95}, LogisticParams{3.22, 0.68, 0.95},
          LogisticParams{2.95, 0.81, 0.92}}) {
        const double atm = 1000.0 * (truth.m + 0.35 * truth.s);
        const auto points = model_points(truth, strike_grid(1500, 6000, 250));
        const auto f3 = fit_three_param(points, atm);
        const auto f1 = fit_one_param(points, atm);
        CHECK(f1.params.s > truth.s);
        CHECK(f1.params.s > f3.params.s);
        CHECK(f3.res_x1000 <= f1.res_x1000 + 1e-6);
    }
}

TEST_CASE("concave data either fails to converge or is flagged by residuals") {
    std::vector<CombinedPutPoint> points;
    for (double k = 1000; k <= 5000; k += 500)
        points.push_back({k, 2.0 - k * k * 1e-7, 0.001, 4});  // concave, decreasing
    try {
        const auto fit = fit_three_param(points, 3000);
        CHECK(fit.res_x1000 > 10.0 * fit.spr_x1000);
    } catch (const ConvergenceFailure&) {
        CHECK(true);
    }
}

TEST_CASE("fit_metrics arithmetic") {
    const LogisticParams p{3.0, 0.5, 0.95};
    auto points = model_points(p, strike_grid(2000, 4000, 250), 0.004);
    auto [res, spr] = fit_metrics(points, p);
    CHECK(std::abs(res) < 1e-12);
    CHECK(spr == doctest::Approx(4.0).epsilon(1e-12));

    for (auto& pt : points) pt.mid += 0.001;
    std::tie(res, spr) = fit_metrics(points, p);
    CHECK(res == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("desk-scale residual bound at published spread levels") {
    const LogisticParams truth{3.22, 0.68, 0.95};
    const double spread = 0.00643;
    const auto points =
        model_points(truth, strike_grid(1500, 6000, 250), spread, spread / 2, 99);
    const auto fit = fit_three_param(points, 3220);
    CHECK(fit.res_x1000 <= 6.43);
}

TEST_CASE("accepted optimizer steps decrease the objective monotonically") {
    const LogisticParams truth{3.3, 0.7, 0.9};
    const auto points =
        model_points(truth, strike_grid(1500, 6000, 250), 0.006, 0.003, 17);
    const auto fit = fit_three_param(points, 3300);
    REQUIRE(fit.cost_history.size() >= 2);
    for (std::size_t i = 1; i < fit.cost_history.size(); ++i)
        CHECK(fit.cost_history[i] <= fit.cost_history[i - 1]);
}

TEST_CASE("zero-noise recovery across random parameter draws") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        LogisticParams truth;
        truth.m = testsup::uniform(rng, 1.0, 6.0);
        truth.s = testsup::uniform(rng, 0.1, 2.0);
        truth.a = testsup::uniform(rng, 0.8, 1.0);
        std::vector<double> strikes;
        for (int i = 0; i < 12; ++i)
            strikes.push_back(1000.0 * (truth.m - 3 * truth.s + 6 * truth.s * i / 11.0));
        const auto fit = fit_three_param(model_points(truth, strikes), 1000.0 * truth.m);
        CHECK(std::abs(fit.params.m - truth.m) / truth.m < 1e-5);
        CHECK(std::abs(fit.params.s - truth.s) / truth.s < 1e-5);
        CHECK(std::abs(fit.params.a - truth.a) / truth.a < 1e-5);
    }
}
