#include "impdist/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace impdist {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kGradTol = 1e-10;     // infinity norm of J^T r
constexpr double kRelCostTol = 1e-12;  // relative cost change on an accepted step

// Bounds are enforced by smooth reparameterization: s = softplus(u) keeps
// s > 0, a = a_max * sigmoid(v) keeps a in (0, a_max).
double inv_softplus(double s) { return std::log(std::expm1(s)); }
double logit(double r) { return std::log(r / (1.0 - r)); }

struct LmOutcome {
    std::array<double, 3> theta;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

// Solve (A + lambda diag(A)) delta = -g for np <= 3 by Gaussian elimination
// with partial pivoting. Returns false on a singular system.
bool solve_damped(int np, const double A[3][3], const double g[3], double lambda,
                  double delta[3]) {
    double M[3][4];
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < np; ++j) M[i][j] = A[i][j];
        M[i][i] += lambda * std::max(A[i][i], 1e-300);
        M[i][np] = -g[i];
    }
    for (int col = 0; col < np; ++col) {
        int piv = col;
        for (int row = col + 1; row < np; ++row)
            if (std::abs(M[row][col]) > std::abs(M[piv][col])) piv = row;
        if (M[piv][col] == 0.0) return false;
        if (piv != col)
            for (int j = col; j <= np; ++j) std::swap(M[piv][j], M[col][j]);
        for (int row = col + 1; row < np; ++row) {
            const double f = M[row][col] / M[col][col];
            for (int j = col; j <= np; ++j) M[row][j] -= f * M[col][j];
        }
    }
    for (int row = np - 1; row >= 0; --row) {
        double acc = M[row][np];
        for (int j = row + 1; j < np; ++j) acc -= M[row][j] * delta[j];
        delta[row] = acc / M[row][row];
    }
    return true;
}

// Damped Gauss-Newton on theta with analytic residuals/Jacobian from eval.
// Steps are accepted only when the cost decreases.
LmOutcome levenberg_marquardt(
    int np, std::array<double, 3> theta,
    const std::function<double(const std::array<double, 3>&, std::vector<double>*,
                               std::vector<double>*)>& eval) {
    LmOutcome out;
    std::vector<double> resid, jac;  // jac is row-major n x np
    double cost = eval(theta, &resid, &jac);
    out.history.push_back(cost);

    const std::size_t n = resid.size();
    double lambda = 1e-3;
    int iter = 0;
    for (; iter < kMaxIterations; ++iter) {
        double A[3][3] = {};
        double g[3] = {};
        for (std::size_t i = 0; i < n; ++i) {
            for (int p = 0; p < np; ++p) {
                g[p] += jac[i * np + p] * resid[i];
                for (int q = p; q < np; ++q) A[p][q] += jac[i * np + p] * jac[i * np + q];
            }
        }
        for (int p = 0; p < np; ++p)
            for (int q = 0; q < p; ++q) A[p][q] = A[q][p];

        double grad_inf = 0.0;
        for (int p = 0; p < np; ++p) grad_inf = std::max(grad_inf, std::abs(g[p]));
        if (grad_inf < kGradTol) {
            out.converged = true;
            break;
        }

        double delta[3];
        if (!solve_damped(np, A, g, lambda, delta)) {
            lambda *= 4.0;
            continue;
        }
        // Cap the step so a wild early iterate cannot jump into the flat
        // far-boundary region of the reparameterized space.
        double step_inf = 0.0;
        for (int p = 0; p < np; ++p) step_inf = std::max(step_inf, std::abs(delta[p]));
        if (step_inf > 1.0)
            for (int p = 0; p < np; ++p) delta[p] /= step_inf;
        std::array<double, 3> trial = theta;
        for (int p = 0; p < np; ++p) trial[p] += delta[p];

        std::vector<double> trial_resid, trial_jac;
        const double trial_cost = eval(trial, &trial_resid, &trial_jac);
        if (std::isfinite(trial_cost) && trial_cost < cost) {
            const double rel_change = (cost - trial_cost) / std::max(cost, 1e-300);
            theta = trial;
            resid = std::move(trial_resid);
            jac = std::move(trial_jac);
            cost = trial_cost;
            out.history.push_back(cost);
            lambda = std::max(lambda * 0.3, 1e-14);
            if (rel_change < kRelCostTol) {
                out.converged = true;
                ++iter;
                break;
            }
        } else {
            lambda *= 4.0;
        }
    }
    out.theta = theta;
    out.cost = cost;
    out.iterations = iter;
    return out;
}

std::size_t distinct_strikes(std::span<const CombinedPutPoint> points) {
    std::set<double> ks;
    for (const CombinedPutPoint& p : points) ks.insert(p.strike);
    return ks.size();
}

// Price-implied scale guess: the model's at-the-money value is a*s*ln2, so
// the interpolated mid at the ATM strike suggests s. Zero when the ATM sits
// outside the quoted strikes.
double implied_scale(std::span<const CombinedPutPoint> points, double atm_k) {
    const CombinedPutPoint* lo = nullptr;
    const CombinedPutPoint* hi = nullptr;
    for (const CombinedPutPoint& p : points) {
        const double k = p.strike * kStrikeScale;
        if (k <= atm_k && (!lo || k > lo->strike * kStrikeScale)) lo = &p;
        if (k >= atm_k && (!hi || k < hi->strike * kStrikeScale)) hi = &p;
    }
    if (!lo || !hi) return 0.0;
    double mid = lo->mid;
    const double k_lo = lo->strike * kStrikeScale, k_hi = hi->strike * kStrikeScale;
    if (k_hi > k_lo) mid += (hi->mid - lo->mid) * (atm_k - k_lo) / (k_hi - k_lo);
    return std::max(mid / std::log(2.0), 0.0);
}

// The objective has spurious basins when the starting scale is far off
// (e.g. it can pin a at its cap); pick the candidate scale with the lowest
// starting cost and run the one descent from there.
template <typename Eval>
double select_scale(std::span<const CombinedPutPoint> points, double m0, const Eval& cost_at) {
    double best_s = 0.2 * m0, best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> candidates = {0.05 * m0, 0.1 * m0, 0.2 * m0, 0.4 * m0};
    if (const double s_data = implied_scale(points, m0); s_data > 1e-4)
        candidates.push_back(s_data);
    for (const double s0 : candidates) {
        const double cost = cost_at(s0);
        if (cost < best_cost) {
            best_cost = cost;
            best_s = s0;
        }
    }
    return best_s;
}

FitResult finish(std::span<const CombinedPutPoint> points, double atm, FitMode mode,
                 const LogisticParams& params, const LmOutcome& lm) {
    FitResult fr;
    fr.params = params;
    fr.atm = atm;
    fr.mode = mode;
    const auto [res, spr] = fit_metrics(points, params);
    fr.res_x1000 = res;
    fr.spr_x1000 = spr;
    fr.n_points = static_cast<int>(points.size());
    fr.converged = lm.converged;
    fr.iterations = lm.iterations;
    fr.cost_history = lm.history;
    return fr;
}

}  // namespace

FitResult fit_three_param(std::span<const CombinedPutPoint> points, double atm) {
    if (distinct_strikes(points) < 4) throw TooFewPoints(distinct_strikes(points), 4);
    if (!(atm > 0.0)) throw Error("fit requires atm > 0");

    const double m0 = atm * kStrikeScale;

    auto eval = [&](const std::array<double, 3>& th, std::vector<double>* r,
                    std::vector<double>* J) {
        const double m = th[0];
        const double s = std::max(softplus(th[1]), 1e-12);
        const double sv = sigmoid(th[2]);
        const double a = kMaxNormalization * sv;
        r->resize(points.size());
        J->resize(points.size() * 3);
        double cost = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double z = (points[i].strike * kStrikeScale - m) / s;
            const double sp = softplus(z);
            const double sg = sigmoid(z);
            const double ri = a * s * sp - points[i].mid;
            (*r)[i] = ri;
            cost += ri * ri;
            (*J)[i * 3 + 0] = -a * sg;
            (*J)[i * 3 + 1] = a * (sp - z * sg) * sigmoid(th[1]);  // chain rule through softplus
            (*J)[i * 3 + 2] = s * sp * kMaxNormalization * sv * (1.0 - sv);
        }
        return cost;
    };

    const double s0 = select_scale(points, m0, [&](double s) {
        std::vector<double> r, J;
        return eval({m0, inv_softplus(s), logit(1.0 / kMaxNormalization)}, &r, &J);
    });
    const std::array<double, 3> theta = {m0, inv_softplus(s0), logit(1.0 / kMaxNormalization)};

    const LmOutcome lm = levenberg_marquardt(3, theta, eval);
    if (!lm.converged) throw ConvergenceFailure(lm.iterations, lm.cost);
    const LogisticParams params{lm.theta[0], std::max(softplus(lm.theta[1]), 1e-12),
                                kMaxNormalization * sigmoid(lm.theta[2])};
    return finish(points, atm, FitMode::ThreeParam, params, lm);
}

FitResult fit_one_param(std::span<const CombinedPutPoint> points, double atm) {
    if (distinct_strikes(points) < 2) throw TooFewPoints(distinct_strikes(points), 2);
    if (!(atm > 0.0)) throw Error("fit requires atm > 0");

    const double m = atm * kStrikeScale;

    auto eval = [&](const std::array<double, 3>& th, std::vector<double>* r,
                    std::vector<double>* J) {
        const double s = std::max(softplus(th[0]), 1e-12);
        r->resize(points.size());
        J->resize(points.size());
        double cost = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double z = (points[i].strike * kStrikeScale - m) / s;
            const double sp = softplus(z);
            const double ri = s * sp - points[i].mid;
            (*r)[i] = ri;
            cost += ri * ri;
            (*J)[i] = (sp - z * sigmoid(z)) * sigmoid(th[0]);
        }
        return cost;
    };

    const double s0 = select_scale(points, m, [&](double s) {
        std::vector<double> r, J;
        return eval({inv_softplus(s), 0.0, 0.0}, &r, &J);
    });

    const LmOutcome lm = levenberg_marquardt(1, {inv_softplus(s0), 0.0, 0.0}, eval);
    if (!lm.converged) throw ConvergenceFailure(lm.iterations, lm.cost);
    const LogisticParams params{m, std::max(softplus(lm.theta[0]), 1e-12), 1.0};
    return finish(points, atm, FitMode::OneParam, params, lm);
}

std::pair<double, double> fit_metrics(std::span<const CombinedPutPoint> points,
                                      const LogisticParams& params) {
    if (points.empty()) throw Error("fit_metrics requires points");
    double res = 0.0, spr = 0.0;
    for (const CombinedPutPoint& p : points) {
        res += std::abs(is_price(p.strike * kStrikeScale, params) - p.mid);
        spr += p.spread;
    }
    const auto n = static_cast<double>(points.size());
    return {res / n * 1000.0, spr / n * 1000.0};
}

}  // namespace impdist
