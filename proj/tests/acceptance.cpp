// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "hus/error.hpp"
#include "hus/hus_bounds.hpp"
#include "hus/linear_evolution.hpp"
#include "hus/norms.hpp"
#include "hus/scenarios.hpp"
#include "hus/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace hus;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Exponent fin(double v) { return Exponent::finite(v); }

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Nonlinearity sine(Vec b) {
    return [b](double, const Vec& x) -> Vec {
        return b.cwiseProduct(x.unaryExpr([](Complex v) { return std::sin(v); }));
    };
}

GridFunction exp_function(GridPtr grid, const Vec& coef, double rate) {
    auto g = GridFunction::sample(grid, coef.size(), [&](double t) -> Vec { return coef * std::exp(-rate * t); });
    g.set_tail(ExpTail{g.at(g.size() - 1), rate});
    return g;
}

Outcome sharpness() {
    const auto rep = scenario_sharpness({});
    const double eps = rep.quantity("epsilon"), dev = rep.quantity("deviation");
    const double sup_x = rep.quantity("sup_x"), L = rep.quantity("L"), ratio = dev / eps;
    const bool ok = std::abs(eps - std::sqrt(0.5)) <= 1e-4 && sup_x <= 1e-6 &&
                    std::abs(dev - 0.5 * std::sqrt(0.5)) <= 1e-4 && std::abs(L - 1.0) <= 1e-12 &&
                    std::abs(ratio - 0.5) <= 1e-4;
    return {ok, fmt("eps=%.6f dev=%.6f sup|x|=%.2e ratio=%.6f", eps, dev, sup_x, ratio)};
}

Outcome minimal_gap() {
    Matrix2 a = Matrix2::Zero();
    a(0, 0) = 1.0;
    a(1, 1) = 3.0;
    const auto triple = ConjugateTriple::make(Exponent::infinity(), Exponent::infinity());
    const double upper = corollary_2d_constant(a, triple);
    const auto grid = LowerBoundGrid::defaults(1e-3, 1e2);
    const auto sweep = lower_bound_sweep(a, triple, grid);
    const auto gap = constant_gap(a, triple, grid);
    const bool ok = upper == 1.0 && sweep.best >= 0.999 && gap.ratio >= 0.999;
    return {ok, fmt("upper=%.12g lower=%.6f ratio=%.6f", upper, sweep.best, gap.ratio)};
}

Outcome delta_oracle() {
    const DeltaSearch search{Complex(2.0), fin(1.0), 1.0};
    const auto opt = optimize_delta(search);
    // Brute force over 1e5 points of the search interval.
    const int n = 100000;
    const double hi = search.upper();
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double d = hi * i / n;
        const double v = std::exp(d - 1.0) / (d * (2.0 - d));
        if (v < best) best = v, arg = d;
    }
    const double exact = 2.0 - std::sqrt(2.0);
    const double exact_factor = std::exp(exact - 1.0) / (exact * (2.0 - exact));
    const bool ok = std::abs(opt.delta - exact) <= 1e-6 && std::abs(opt.factor - exact_factor) <= 1e-5 &&
                    std::abs(opt.delta - arg) <= 2.0 * hi / n && opt.factor <= best + 1e-12;
    return {ok, fmt("delta=%.9f factor=%.7f exact=%.7f brute=%.7f", opt.delta, opt.factor, exact_factor, best)};
}

// Nonnegative piecewise-linear function vanishing past its last breakpoint.
GridFunction random_piecewise_linear(std::mt19937_64& rng, const GridPtr& grid) {
    std::uniform_int_distribution<int> pieces(2, 8);
    std::uniform_real_distribution<double> height(0.0, 3.0);
    const std::size_t n = grid->size();
    std::uniform_int_distribution<std::size_t> pick(1, n / 2);
    std::vector<std::size_t> nodes{0};
    for (int i = pieces(rng); i > 0; --i) nodes.push_back(pick(rng));
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::vector<double> h;
    for (std::size_t i = 0; i < nodes.size(); ++i) h.push_back(i + 1 == nodes.size() ? 0.0 : height(rng));
    const auto kinked = Grid::from_times(grid->times(), nodes);
    Mat v = Mat::Zero(1, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        for (std::size_t k = nodes[i]; k <= nodes[i + 1]; ++k) {
            const double s = ((*kinked)[k] - (*kinked)[nodes[i]]) / ((*kinked)[nodes[i + 1]] - (*kinked)[nodes[i]]);
            v(0, static_cast<Eigen::Index>(k)) = h[i] + s * (h[i + 1] - h[i]);
        }
    return GridFunction(kinked, v, ExpTail{Vec::Zero(1), 1.0});
}

Outcome young() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> log_rate(std::log(0.1), std::log(10.0));
    const std::vector<Exponent> exps{fin(1.0), fin(1.25), fin(2.0), fin(3.0), fin(5.0), Exponent::infinity()};
    std::uniform_int_distribution<std::size_t> pick(0, exps.size() - 1);
    std::bernoulli_distribution side(0.5);
    const auto grid = Grid::uniform(40.0, 4000);
    int held = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        auto p = exps[pick(rng)], q = exps[pick(rng)];
        if (p < q) std::swap(p, q);
        const ExpKernel k{std::exp(log_rate(rng)), side(rng) ? ExpKernel::Side::causal : ExpKernel::Side::anticausal};
        const auto rep = young_check(k, random_piecewise_linear(rng, grid), ConjugateTriple::make(p, q));
        worst = std::max(worst, rep.lhs - rep.rhs);
        if (rep.holds && rep.lhs <= rep.rhs + 1e-9) ++held;
    }
    return {held == 100, fmt("%g/100 held, max lhs-rhs=%.3e", held, worst)};
}

Outcome contraction() {
    const auto grid = Grid::uniform(25.0, 2500);
    const double a = 1.0, b = 0.25;
    const auto prob = SemilinearProblem::make(LinearSystem::autonomous(Mat::Constant(1, 1, a)), sine(Vec::Constant(1, b)),
                                              b, DichotomySpec::make(1.0, a, Mat::Zero(1, 1)));
    const auto ps = sine_pseudosolution(a, b, 1.0, 1.0, grid);
    const ShadowingOperator op(prob, ps);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c(-1.0, 1.0), rate(0.5, 2.0), freq(0.0, 3.0);
    auto random_z = [&] {
        const double a1 = c(rng), a2 = c(rng), r1 = rate(rng), r2 = rate(rng), w = freq(rng);
        auto z = GridFunction::sample(grid, 1, [&](double t) {
            return Vec::Constant(1, a1 * std::exp(-r1 * t) + a2 * std::exp(-r2 * t) * std::cos(w * t));
        });
        z.set_tail(ExpTail{z.at(z.size() - 1), std::min(r1, r2)});
        return z;
    };
    const auto two = fin(2.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto z1 = random_z(), z2 = random_z();
        worst = std::max(worst, lp_norm(op.apply(z1) - op.apply(z2), two) / lp_norm(z1 - z2, two));
    }
    const auto res = picard_solve(ps, prob, ConjugateTriple::make(two, two));
    const double rate_obs = res.certificate.observed_rate;
    const bool ok = worst <= 0.25 + 1e-6 && res.certificate.converged && rate_obs <= 0.26;
    return {ok, fmt("max ratio=%.6f observed rate=%.4f iterations=%g", worst, rate_obs, res.certificate.iterations)};
}

Outcome pq_counterexample() {
    const auto rep = scenario_pq_counterexample({});
    const double mid = rep.quantity("norm_mid"), end = rep.quantity("norm_end");
    const double res = rep.quantity("residual_norm"), closed = rep.quantity("residual_closed_form");
    const bool ok = std::isfinite(res) && end >= 5.0 * mid && std::abs(res - closed) <= 1e-6;
    return {ok, fmt("norm(1e2)=%.6f norm(1e4)=%.6f growth=%.4f residual=%.9f", mid, end, end / mid, res)};
}

Outcome dichotomy_fit() {
    Mat a = Mat::Zero(2, 2), P = Mat::Zero(2, 2);
    a(0, 0) = -2.0;
    a(1, 1) = 3.0;
    P(0, 0) = 1.0;
    const auto sys = LinearSystem::autonomous(a);
    const auto times = sample_times(10.0, 41);
    const auto spec = fit_dichotomy(sys, P, times);
    const auto rep = verify_dichotomy(spec, sys, times);
    const bool ok = std::abs(spec.D - 1.0) <= 1e-6 && std::abs(spec.lambda - 2.0) <= 1e-3 && rep.violations == 0 &&
                    rep.ok();
    return {ok, fmt("D=%.9f lambda=%.6f violations=%g", spec.D, spec.lambda, static_cast<double>(rep.violations))};
}

Outcome soundness() {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> rate(0.5, 2.0), frac(0.0, 0.8), coef(-1.0, 1.0), decay(0.3, 3.0);
    const std::vector<Exponent> exps{fin(1.0), fin(2.0), Exponent::infinity()};
    const auto grid = Grid::uniform(25.0, 2500);
    int converged = 0, failures = 0, other = 0, violated = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = trial % 2 == 0 ? 1 : 2;
        Mat a = Mat::Zero(d, d);
        for (Eigen::Index i = 0; i < d; ++i) a(i, i) = rate(rng);
        const double lambda = a.diagonal().real().minCoeff();
        const double c = frac(rng) * lambda;  // D = 1
        Vec b = Vec::Constant(d, c);
        Vec v(d);
        for (Eigen::Index i = 0; i < d; ++i) v(i) = coef(rng);
        const double g = decay(rng);
        const auto p = exps[static_cast<std::size_t>(trial) % exps.size()];
        try {
            const auto prob = SemilinearProblem::make(LinearSystem::autonomous(a), sine(b), c,
                                                      DichotomySpec::make(1.0, lambda, Mat::Zero(d, d)));
            const PseudoSolution ps{exp_function(grid, v, g), exp_function(grid, -g * v, g), std::nullopt};
            const auto res = picard_solve(ps, prob, ConjugateTriple::make(p, p));
            const auto& cert = res.certificate;
            ++converged;
            const double slack = cert.deviation - (cert.L * cert.epsilon + 1e-6);
            worst = std::max(worst, slack);
            if (slack > 0.0) ++violated;
        } catch (const Error& e) {
            if (e.code() == Errc::certificate_failure)
                ++failures;
            else
                ++other;
        }
    }
    const bool ok = failures == 0 && violated == 0 && other == 0;
    return {ok, fmt("converged=%g certificate failures=%g other errors=%g max slack=%.3e", converged, failures, other,
                    worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"sharpness reproduction", sharpness},
        {"minimal-constant gap", minimal_gap},
        {"delta optimisation oracle", delta_oracle},
        {"Young property suite", young},
        {"contraction property", contraction},
        {"p<q counterexample", pq_counterexample},
        {"dichotomy fitting", dichotomy_fit},
        {"certificate soundness sweep", soundness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failed;
        std::printf("%s criterion %zu: %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
