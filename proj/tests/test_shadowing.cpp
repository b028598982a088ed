#include "hus/error.hpp"
#include "hus/hus_bounds.hpp"
#include "hus/scenarios.hpp"
#include "hus/shadowing.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hus;
using Catch::Approx;

namespace {

const Exponent inf = Exponent::infinity();
Exponent fin(double v) { return Exponent::finite(v); }

Nonlinearity sine(double b) {
    return [b](double, const Vec& x) -> Vec { return b * x.unaryExpr([](Complex v) { return std::sin(v); }); };
}

SemilinearProblem scalar(double a, Nonlinearity f, double c, DichotomyKind kind = DichotomyKind::expansion) {
    const Mat P = kind == DichotomyKind::expansion ? Mat(Mat::Zero(1, 1)) : Mat(Mat::Identity(1, 1));
    return SemilinearProblem::make(LinearSystem::autonomous(Mat::Constant(1, 1, a)), std::move(f), c,
                                   DichotomySpec::make(1.0, std::abs(a), P));
}

GridFunction exp_function(GridPtr grid, double coef, double rate) {
    auto g = GridFunction::sample(grid, 1, [&](double t) { return Vec::Constant(1, coef * std::exp(-rate * t)); });
    g.set_tail(ExpTail{g.at(g.size() - 1), rate});
    return g;
}

PseudoSolution exp_pseudo(GridPtr grid, double coef, double rate) {
    return {exp_function(grid, coef, rate), exp_function(grid, -rate * coef, rate), std::nullopt};
}

double max_error(const GridFunction& g, const std::function<double(double)>& exact) {
    double e = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) e = std::max(e, std::abs(g.at(k)(0) - exact(g.grid()[k])));
    return e;
}

// Smooth decaying perturbation with an exponential tail.
GridFunction random_z(std::mt19937_64& rng, GridPtr grid) {
    std::uniform_real_distribution<double> c(-1.0, 1.0), rate(0.5, 2.0), freq(0.0, 3.0);
    const double a1 = c(rng), a2 = c(rng), r1 = rate(rng), r2 = rate(rng), w = freq(rng);
    auto z = GridFunction::sample(grid, 1, [&](double t) {
        return Vec::Constant(1, a1 * std::exp(-r1 * t) + a2 * std::exp(-r2 * t) * std::cos(w * t));
    });
    z.set_tail(ExpTail{z.at(z.size() - 1), std::min(r1, r2)});
    return z;
}

}  // namespace

TEST_CASE("residual of exact and perturbed solutions") {
    const auto grid = Grid::uniform(25.0, 2500);
    SECTION("exact solution") {
        const auto prob = scalar(-1.0, {}, 0.0, DichotomyKind::contraction);
        const auto w = residual(exp_pseudo(grid, 2.0, 1.0), prob);
        CHECK(w.sup_norm() < 1e-9);
    }
    SECTION("perturbed sine equation") {
        const double a = 1.0, b = 0.25, gamma = 0.8;
        const auto prob = scalar(a, sine(b), b);
        const auto ps = sine_pseudosolution(a, b, gamma, 1.0, grid);
        const auto w = residual(ps, prob);
        CHECK(max_error(w, [&](double t) { return std::exp(-gamma * t); }) < 1e-9);
        CHECK(lp_norm(w, fin(3.0)) == Approx(std::pow(1.0 / (3.0 * gamma), 1.0 / 3.0)).epsilon(1e-6));
    }
    SECTION("linear perturbation") {
        const double a = 1.0, gamma = 1.0;
        const auto prob = scalar(a, {}, 0.0);
        const auto w = residual(exp_pseudo(grid, -1.0 / (a + gamma), gamma), prob);
        CHECK(max_error(w, [&](double t) { return std::exp(-gamma * t); }) < 1e-12);
        REQUIRE(w.tail());
        CHECK(w.tail()->rate == gamma);
    }
}

TEST_CASE("integral operators") {
    const auto grid = Grid::uniform(25.0, 2500);
    const double a = 1.0, gamma = 1.0;
    SECTION("expansion: T1 vanishes and T2(0) matches the anticausal closed form") {
        const auto prob = scalar(a, {}, 0.0);
        const auto ps = exp_pseudo(grid, -1.0 / (a + gamma), gamma);
        const auto zero = GridFunction::zeros(grid, 1);
        CHECK(apply_T1(zero, ps, prob).sup_norm() == 0.0);
        const auto t2 = apply_T2(zero, ps, prob);
        CHECK(max_error(t2, [&](double t) { return std::exp(-gamma * t) / (a + gamma); }) < 1e-7);
    }
    SECTION("exact solution gives zero") {
        const auto prob = scalar(-1.0, sine(0.2), 0.2, DichotomyKind::contraction);
        const auto ps = PseudoSolution{GridFunction::zeros(grid, 1), GridFunction::zeros(grid, 1), std::nullopt};
        const auto zero = GridFunction::zeros(grid, 1);
        CHECK(apply_T1(zero, ps, prob).sup_norm() < 1e-15);
        CHECK(apply_T2(zero, ps, prob).sup_norm() < 1e-15);
    }
    SECTION("contraction: T1 matches the causal closed form") {
        // y = 0 against x' = -x: the integrand is -w = e^{-gamma t} when
        // y' + y = -e^{-gamma t}, i.e. y = -(e^{-gamma t} - e^{-t})/(1 - gamma).
        const double g = 0.5;
        const auto prob = scalar(-1.0, {}, 0.0, DichotomyKind::contraction);
        auto y = GridFunction::sample(grid, 1, [&](double t) {
            return Vec::Constant(1, -(std::exp(-g * t) - std::exp(-t)) / (1.0 - g));
        });
        auto dy = GridFunction::sample(grid, 1, [&](double t) {
            return Vec::Constant(1, -(-g * std::exp(-g * t) + std::exp(-t)) / (1.0 - g));
        });
        y.set_tail(ExpTail{y.at(y.size() - 1), g});
        dy.set_tail(ExpTail{dy.at(dy.size() - 1), g});
        const PseudoSolution ps{y, dy, std::nullopt};
        const auto t1 = apply_T1(GridFunction::zeros(grid, 1), ps, prob);
        // w = y' + y = -e^{-g t}; T1 0 = \int_0^t e^{-(t-s)} (-w) ds = -y.
        CHECK(max_error(t1, [&](double t) { return (std::exp(-g * t) - std::exp(-t)) / (1.0 - g); }) < 1e-8);
        CHECK(apply_T2(GridFunction::zeros(grid, 1), ps, prob).sup_norm() == 0.0);
    }
    SECTION("integrand without tail") {
        const auto prob = scalar(a, {}, 0.0);
        const auto y = GridFunction::sample(grid, 1, [](double) { return Vec::Constant(1, 1.0); });
        const PseudoSolution ps{y, GridFunction::zeros(grid, 1), std::nullopt};
        try {
            apply_T2(GridFunction::zeros(grid, 1), ps, prob);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::divergent_norm);
        }
    }
}

TEST_CASE("empirical contraction of the shadowing operator") {
    const auto grid = Grid::uniform(25.0, 2500);
    const double a = 1.0, b = 0.25;
    const auto prob = scalar(a, sine(b), b);
    const auto ps = sine_pseudosolution(a, b, 1.0, 1.0, grid);
    const ShadowingOperator op(prob, ps);
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto z1 = random_z(rng, grid), z2 = random_z(rng, grid);
        const double num = lp_norm(op.apply(z1) - op.apply(z2), fin(2.0));
        const double den = lp_norm(z1 - z2, fin(2.0));
        worst = std::max(worst, num / den);
    }
    CHECK(worst <= 0.25 + 1e-6);
}

TEST_CASE("picard solve") {
    const auto grid = Grid::uniform(25.0, 2500);
    const auto t22 = ConjugateTriple::make(fin(2.0), fin(2.0));
    SECTION("sharpness numbers") {
        const auto prob = scalar(1.0, {}, 0.0);
        const auto res = picard_solve(exp_pseudo(grid, -0.5, 1.0), prob, t22);
        const auto& c = res.certificate;
        CHECK(c.epsilon == Approx(std::sqrt(0.5)).margin(1e-4));
        CHECK(c.deviation == Approx(0.5 * std::sqrt(0.5)).margin(1e-4));
        CHECK(c.L == 1.0);
        CHECK(c.deviation / c.epsilon == Approx(0.5).margin(1e-4));
        CHECK(res.x.sup_norm() <= 1e-6);
        CHECK(c.iterations == 1);
        CHECK(c.converged);
        CHECK(c.residual_ok);
        CHECK_FALSE(c.finite_difference_derivative);
    }
    SECTION("exact solution converges immediately") {
        const auto prob = scalar(-1.0, sine(0.3), 0.3, DichotomyKind::contraction);
        const auto res = picard_solve(exp_pseudo(grid, 0.0, 1.0), prob, t22);
        CHECK(res.certificate.iterations == 1);
        CHECK(res.certificate.deviation == 0.0);
    }
    SECTION("sine equation with b = 0.25") {
        const auto prob = scalar(1.0, sine(0.25), 0.25);
        const auto res = picard_solve(sine_pseudosolution(1.0, 0.25, 1.0, 1.0, grid), prob, t22);
        const auto& c = res.certificate;
        CHECK(c.L == Approx(4.0 / 3.0).epsilon(1e-14));
        CHECK(c.deviation <= 4.0 / 3.0 * c.epsilon);
        CHECK(c.kappa == 0.25);
        CHECK(c.observed_rate <= 0.26);
        CHECK(res.x.sup_norm() <= 1e-6);
        // The iterates are the deviation from y: z = x - y.
        CHECK(lp_norm(res.x - sine_pseudosolution(1.0, 0.25, 1.0, 1.0, grid).y, fin(2.0)) ==
              Approx(c.deviation).epsilon(1e-12));
    }
    SECTION("idempotence with a finite-difference derivative") {
        const auto prob = scalar(1.0, sine(0.25), 0.25);
        const auto first = picard_solve(sine_pseudosolution(1.0, 0.25, 1.0, 1.0, grid), prob, t22);
        PseudoSolution again{first.x, std::nullopt, std::nullopt};
        const auto second = picard_solve(again, prob, t22);
        CHECK(second.certificate.finite_difference_derivative);
        CHECK(second.certificate.deviation <= second.certificate.L * second.certificate.epsilon + 1e-9);
        CHECK(second.certificate.epsilon < 1e-5);
    }
    SECTION("general dichotomy in two dimensions") {
        Mat a = Mat::Zero(2, 2);
        a(0, 0) = -2.0;
        a(1, 1) = 3.0;
        a(0, 1) = 0.5;
        const auto sys = LinearSystem::autonomous(a);
        const auto times = sample_times(10.0, 41);
        const auto spec = fit_dichotomy(sys, stable_projection(a), times);
        REQUIRE(verify_dichotomy(spec, sys, times).ok());
        const double c = 0.1 * spec.lambda / spec.D;
        const auto prob = SemilinearProblem::make(sys, sine(c), c, spec);
        Vec v(2);
        v << 0.3, -0.2;
        auto y = GridFunction::sample(grid, 2, [&](double t) -> Vec { return v * std::exp(-t); });
        auto dy = GridFunction::sample(grid, 2, [&](double t) -> Vec { return -v * std::exp(-t); });
        y.set_tail(ExpTail{y.at(y.size() - 1), 1.0});
        dy.set_tail(ExpTail{dy.at(dy.size() - 1), 1.0});
        const auto res = picard_solve({y, dy, std::nullopt}, prob, t22);
        const auto& cert = res.certificate;
        CHECK(spec.kind == DichotomyKind::general);
        CHECK(cert.converged);
        CHECK(cert.residual_ok);
        CHECK(cert.deviation <= cert.L * cert.epsilon);
        CHECK(cert.kappa == Approx(0.2));
    }
    SECTION("time-dependent coefficient") {
        // x' = (1 + sin(t)/2) x is an expansion with D = e, lambda = 1.
        const auto sys = LinearSystem::time_dependent(1, [](double t) { return Mat::Constant(1, 1, 1.0 + 0.5 * std::sin(t)); });
        const auto spec = DichotomySpec::make(std::exp(1.0), 1.0, Mat::Zero(1, 1));
        const auto prob = SemilinearProblem::make(sys, {}, 0.0, spec);
        const auto small = Grid::uniform(25.0, 1000);
        auto y = exp_function(small, -0.5, 1.0);
        auto dy = exp_function(small, 0.5, 1.0);
        const auto res = picard_solve({y, dy, std::nullopt}, prob, t22);
        CHECK(res.x.sup_norm() <= 1e-6);
        CHECK(res.certificate.iterations == 1);
    }
}

TEST_CASE("picard solve failure modes") {
    const auto grid = Grid::uniform(25.0, 2500);
    const auto t22 = ConjugateTriple::make(fin(2.0), fin(2.0));
    SECTION("smallness") {
        try {
            SemilinearProblem::make(LinearSystem::autonomous(Mat::Constant(1, 1, 1.0)), sine(1.5), 1.5,
                                    DichotomySpec::make(1.0, 1.0, Mat::Zero(1, 1)));
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::smallness_violation);
        }
    }
    SECTION("declared Lipschitz constant too small") {
        try {
            scalar(1.0, sine(0.5), 0.2);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::precondition);
        }
    }
    SECTION("declared epsilon below the measured residual") {
        auto ps = exp_pseudo(grid, -0.5, 1.0);
        ps.epsilon = 0.5;
        try {
            picard_solve(ps, scalar(1.0, {}, 0.0), t22);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::precondition);
        }
        ps.epsilon = 0.71;
        CHECK(picard_solve(ps, scalar(1.0, {}, 0.0), t22).certificate.epsilon == 0.71);
    }
    SECTION("iteration budget") {
        SolveOptions opts;
        opts.max_iter = 2;
        try {
            picard_solve(sine_pseudosolution(1.0, 0.25, 1.0, 1.0, grid), scalar(1.0, sine(0.25), 0.25), t22, opts);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_convergence);
        }
    }
    SECTION("failed bound is a hard error") {
        SolveOptions opts;
        opts.cert_atol = -1.0;
        try {
            picard_solve(exp_pseudo(grid, -0.5, 1.0), scalar(1.0, {}, 0.0), t22, opts);
            FAIL("no throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::certificate_failure);
        }
    }
}

TEST_CASE("uniqueness probe") {
    const auto grid = Grid::uniform(25.0, 2500);
    const auto t22 = ConjugateTriple::make(fin(2.0), fin(2.0));
    const auto prob = scalar(1.0, {}, 0.0);
    const auto ps = exp_pseudo(grid, -0.5, 1.0);
    const auto res = picard_solve(ps, prob, t22);
    CHECK(uniqueness_probe(prob, ps, res.x, t22, res.certificate.deviation));

    UniquenessOptions same;
    same.offsets = {Vec::Zero(1)};
    CHECK(uniqueness_probe(prob, ps, res.x, t22, res.certificate.deviation, same));

    const auto sprob = scalar(1.0, sine(0.25), 0.25);
    const auto sps = sine_pseudosolution(1.0, 0.25, 1.0, 1.0, grid);
    const auto sres = picard_solve(sps, sprob, t22);
    CHECK(uniqueness_probe(sprob, sps, sres.x, t22, sres.certificate.deviation));

    const auto contraction = scalar(-1.0, {}, 0.0, DichotomyKind::contraction);
    try {
        uniqueness_probe(contraction, ps, res.x, t22, 0.1);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::precondition);
    }
}
