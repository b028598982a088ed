#include "hus/scenarios.hpp"

#include "hus/error.hpp"
#include "hus/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hus {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Rel = Assertion::Relation;

SemilinearProblem scalar_expansion(double a, Nonlinearity f, double c) {
    const Mat A = Mat::Constant(1, 1, a);
    return SemilinearProblem::make(LinearSystem::autonomous(A), std::move(f), c,
                                   DichotomySpec::make(1.0, a, Mat::Zero(1, 1)));
}

// y = -amp e^{-gamma t}/(a+gamma) solves y' = a y + amp e^{-gamma t}.
PseudoSolution exponential_pseudosolution(double a, double gamma, double amplitude, GridPtr grid) {
    const double c0 = -amplitude / (a + gamma);
    auto y = GridFunction::sample(grid, 1, [&](double t) { return Vec::Constant(1, c0 * std::exp(-gamma * t)); });
    auto dy = GridFunction::sample(grid, 1, [&](double t) { return Vec::Constant(1, -gamma * c0 * std::exp(-gamma * t)); });
    y.set_tail(ExpTail{y.at(y.size() - 1), gamma});
    dy.set_tail(ExpTail{dy.at(dy.size() - 1), gamma});
    return {std::move(y), std::move(dy), std::nullopt};
}

void require(bool ok, const std::string& what) {
    if (!ok) fail(Errc::precondition, what);
}

// 1 - e^{-x}(1 + x), accurate for small x.
double one_minus_exp_linear(double x) {
    if (x < 1e-2) return x * x * (0.5 - x * (1.0 / 3.0 - x * (1.0 / 8.0 - x * (1.0 / 30.0 - x / 144.0))));
    return -std::expm1(-x) - x * std::exp(-x);
}

}  // namespace

Assertion Assertion::check(std::string name, Relation rel, double expected, double computed, double tolerance) {
    Assertion a{std::move(name), rel, expected, computed, tolerance, false};
    switch (rel) {
    case Relation::approx: a.passed = std::abs(computed - expected) <= tolerance; break;
    case Relation::at_most: a.passed = computed <= expected + tolerance; break;
    case Relation::at_least: a.passed = computed >= expected - tolerance; break;
    }
    return a;
}

const char* relation_name(Assertion::Relation rel) noexcept {
    switch (rel) {
    case Rel::approx: return "approx";
    case Rel::at_most: return "at_most";
    case Rel::at_least: return "at_least";
    }
    return "?";
}

bool ScenarioReport::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

double ScenarioReport::quantity(const std::string& key) const {
    for (const auto& [k, v] : quantities)
        if (k == key) return v;
    fail(Errc::invalid_argument, "no quantity named " + key);
}

PseudoSolution sine_pseudosolution(double a, double b, double gamma, double amplitude, GridPtr grid) {
    const VectorField rhs = [=](double t, const Vec& y) -> Vec {
        Vec out = a * y + b * y.unaryExpr([](Complex v) { return std::sin(v); });
        out.array() += amplitude * std::exp(-gamma * t);
        return out;
    };
    const std::size_t n = grid->size();
    Mat y(1, static_cast<Eigen::Index>(n)), dy(1, static_cast<Eigen::Index>(n));
    const double t_end = grid->t_max();
    // Leading-order decaying solution at the far end, then integrate back.
    y(0, static_cast<Eigen::Index>(n - 1)) = -amplitude * std::exp(-gamma * t_end) / (a + b + gamma);
    for (std::size_t k = n - 1; k-- > 0;)
        y.col(static_cast<Eigen::Index>(k)) =
            integrate_vector(rhs, y.col(static_cast<Eigen::Index>(k + 1)), (*grid)[k + 1], (*grid)[k]);
    for (std::size_t k = 0; k < n; ++k)
        dy.col(static_cast<Eigen::Index>(k)) = rhs((*grid)[k], y.col(static_cast<Eigen::Index>(k)));
    GridFunction yf(grid, y, ExpTail{y.col(y.cols() - 1), gamma});
    GridFunction dyf(grid, dy, ExpTail{dy.col(dy.cols() - 1), gamma});
    return {std::move(yf), std::move(dyf), std::nullopt};
}

ScenarioReport scenario_sine(const SineParams& prm) {
    require(prm.a > 0.0, "sine scenario needs a > 0");
    require(std::abs(prm.b) < prm.a, "sine scenario needs |b| < a");
    require(prm.gamma > 0.0, "sine scenario needs gamma > 0");
    const auto triple = ConjugateTriple::make(prm.p, prm.q);

    ScenarioReport rep;
    rep.name = "sine";
    rep.parameters = {{"a", num(prm.a)},         {"b", num(prm.b)},          {"gamma", num(prm.gamma)},
                      {"p", prm.p.to_string()},  {"q", prm.q.to_string()},   {"r", triple.r.to_string()},
                      {"t_max", num(prm.t_max)}, {"intervals", std::to_string(prm.intervals)}};

    const double b = prm.b;
    Nonlinearity f;
    if (b != 0.0) f = [b](double, const Vec& x) -> Vec { return b * x.unaryExpr([](Complex v) { return std::sin(v); }); };
    const auto prob = scalar_expansion(prm.a, f, std::abs(b));
    const auto grid = Grid::uniform(prm.t_max, prm.intervals);
    const auto ps = sine_pseudosolution(prm.a, b, prm.gamma, 1.0, grid);
    auto res = picard_solve(ps, prob, triple);
    const auto& cert = res.certificate;

    const double L_formula = kernel_lr_norm(prm.a, triple.r) / (1.0 - std::abs(b) / prm.a);
    const double eps_closed = root_or_one(1.0 / (triple.q.is_infinite() ? 1.0 : triple.q.value() * prm.gamma), triple.q);
    const double sup_x = res.x.sup_norm();

    rep.quantities = {{"L", cert.L},
                      {"epsilon", cert.epsilon},
                      {"epsilon_closed_form", eps_closed},
                      {"deviation", cert.deviation},
                      {"kappa", cert.kappa},
                      {"iterations", static_cast<double>(cert.iterations)},
                      {"observed_rate", cert.observed_rate},
                      {"sup_x", sup_x}};
    rep.assertions.push_back(Assertion::check("L matches closed form", Rel::approx, L_formula, cert.L, 1e-12));
    rep.assertions.push_back(Assertion::check("epsilon matches closed form", Rel::approx, eps_closed, cert.epsilon, 1e-4));
    rep.assertions.push_back(Assertion::check("x vanishes", Rel::at_most, 0.0, sup_x, 1e-6));
    rep.assertions.push_back(Assertion::check("deviation within L*epsilon", Rel::at_most, cert.L * cert.epsilon,
                                              cert.deviation, 1e-9));
    if (b == 0.0) {
        const double dev_closed =
            (1.0 / (prm.a + prm.gamma)) *
            root_or_one(1.0 / (triple.p.is_infinite() ? 1.0 : triple.p.value() * prm.gamma), triple.p);
        rep.quantities.emplace_back("deviation_closed_form", dev_closed);
        rep.assertions.push_back(Assertion::check("deviation matches closed form", Rel::approx, dev_closed,
                                                  cert.deviation, 1e-4));
    }
    rep.notes.push_back("pseudosolution: decaying solution of the equation forced by e^{-gamma t}; true solution x = 0");
    rep.certificate = cert;
    rep.trajectory = std::move(res.x);
    return rep;
}

ScenarioReport scenario_sharpness(const SharpnessParams& prm) {
    require(prm.a > 0.0 && prm.gamma > 0.0, "sharpness scenario needs a > 0 and gamma > 0");
    require(prm.amplitude != 0.0, "forcing amplitude must be nonzero");
    for (double g : prm.gamma_grid) require(g > 0.0, "gamma grid entries must be positive");
    const auto triple = ConjugateTriple::make(prm.p, prm.p);
    const double pv = prm.p.is_infinite() ? 1.0 : prm.p.value();

    ScenarioReport rep;
    rep.name = "sharpness";
    rep.parameters = {{"a", num(prm.a)},         {"gamma", num(prm.gamma)},   {"p", prm.p.to_string()},
                      {"q", prm.p.to_string()},  {"amplitude", num(prm.amplitude)},
                      {"t_max", num(prm.t_max)}, {"intervals", std::to_string(prm.intervals)}};

    const auto prob = scalar_expansion(prm.a, {}, 0.0);
    auto solve = [&](double gamma, double t_max) {
        const auto grid = Grid::uniform(t_max, prm.intervals);
        return picard_solve(exponential_pseudosolution(prm.a, gamma, prm.amplitude, grid), prob, triple);
    };

    auto res = solve(prm.gamma, prm.t_max);
    const auto& cert = res.certificate;
    const double amp = std::abs(prm.amplitude);
    const double eps_closed = amp * root_or_one(1.0 / (pv * prm.gamma), prm.p);
    const double dev_closed = amp / (prm.a + prm.gamma) * root_or_one(1.0 / (pv * prm.gamma), prm.p);
    const double ratio = cert.deviation / cert.epsilon;
    const double sup_x = res.x.sup_norm();

    rep.quantities = {{"L", cert.L},
                      {"epsilon", cert.epsilon},
                      {"epsilon_closed_form", eps_closed},
                      {"deviation", cert.deviation},
                      {"deviation_closed_form", dev_closed},
                      {"ratio", ratio},
                      {"iterations", static_cast<double>(cert.iterations)},
                      {"sup_x", sup_x}};
    rep.assertions.push_back(Assertion::check("epsilon matches closed form", Rel::approx, eps_closed, cert.epsilon, 1e-4));
    rep.assertions.push_back(Assertion::check("x vanishes", Rel::at_most, 0.0, sup_x, 1e-6));
    rep.assertions.push_back(Assertion::check("deviation matches closed form", Rel::approx, dev_closed, cert.deviation, 1e-4));
    rep.assertions.push_back(Assertion::check("L equals 1/a", Rel::approx, 1.0 / prm.a, cert.L, 1e-12));
    rep.assertions.push_back(Assertion::check("ratio equals 1/(a+gamma)", Rel::approx, 1.0 / (prm.a + prm.gamma), ratio, 1e-4));

    if (!prm.gamma_grid.empty()) {
        std::vector<double> gammas = prm.gamma_grid;
        std::sort(gammas.begin(), gammas.end());
        double sup_ratio = 0.0;
        double monotone_violation = 0.0;
        double previous = std::numeric_limits<double>::infinity();
        for (double g : gammas) {
            const double horizon = std::max(prm.t_max, 20.0 / std::min(prm.a, g));
            const auto c = solve(g, horizon).certificate;
            const double rg = c.deviation / c.epsilon;
            rep.quantities.emplace_back("ratio_at_gamma_" + num(g), rg);
            sup_ratio = std::max(sup_ratio, rg);
            monotone_violation = std::max(monotone_violation, rg - previous);
            previous = rg;
        }
        const double g_min = gammas.front();
        rep.quantities.emplace_back("sup_ratio", sup_ratio);
        rep.assertions.push_back(Assertion::check("sup ratio approaches 1/a", Rel::at_least,
                                                  1.0 / (prm.a + g_min) - 1e-6, sup_ratio, 0.0));
        rep.assertions.push_back(Assertion::check("sup ratio below 1/a", Rel::at_most, 1.0 / prm.a, sup_ratio, 1e-6));
        rep.assertions.push_back(Assertion::check("ratio decreasing in gamma", Rel::at_most, 0.0, monotone_violation, 1e-9));
    }
    rep.notes.push_back("y = -amp e^{-gamma t}/(a+gamma) with f = 0; the true solution is x = 0");
    rep.certificate = cert;
    rep.trajectory = std::move(res.x);
    return rep;
}

ScenarioReport scenario_pq_counterexample(const PqParams& prm) {
    require(prm.p.is_finite(), "counterexample needs finite p");
    require(prm.p < prm.q, "counterexample needs p < q");
    require(prm.delta > prm.p.value() && (prm.q.is_infinite() || prm.delta < prm.q.value()),
            "counterexample needs delta strictly between p and q");
    require(prm.t_mid > 1.0 && prm.t_end > prm.t_mid, "counterexample needs 1 < t_mid < t_end");
    require(prm.intervals_per_decade >= 10, "intervals_per_decade must be at least 10");

    ScenarioReport rep;
    rep.name = "pq_counterexample";
    rep.parameters = {{"p", prm.p.to_string()},     {"q", prm.q.to_string()},     {"delta", num(prm.delta)},
                      {"z0", num(prm.z0)},          {"t_mid", num(prm.t_mid)},    {"t_end", num(prm.t_end)},
                      {"intervals_per_decade", std::to_string(prm.intervals_per_decade)}};

    std::vector<double> times;
    const std::size_t head = 200;
    for (std::size_t k = 0; k < head; ++k) times.push_back(static_cast<double>(k) / static_cast<double>(head));
    auto geometric = [&](double from, double to) {
        const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(prm.intervals_per_decade) * std::log10(to / from)));
        for (std::size_t k = 0; k < m; ++k)
            times.push_back(from * std::pow(to / from, static_cast<double>(k) / static_cast<double>(m)));
    };
    geometric(1.0, prm.t_mid);
    geometric(prm.t_mid, prm.t_end);
    times.push_back(prm.t_end);
    const auto grid = Grid::from_times(times);

    const double decay = 1.0 / prm.delta;
    const auto forcing = GridFunction::sample(grid, 1, [&](double t) { return Vec::Constant(1, std::pow(1.0 + t, -decay)); });
    GridFunction z = convolve(ExpKernel{1.0, ExpKernel::Side::causal}, forcing);
    for (std::size_t k = 0; k < z.size(); ++k) z.at(k)(0) += prm.z0 * std::exp(-(*grid)[k]);

    const double n_mid = lp_norm_truncated(z, prm.p, prm.t_mid);
    const double n_end = lp_norm_truncated(z, prm.p, prm.t_end);
    const double growth = n_end / n_mid;

    double res_norm = 1.0;
    double res_closed = 1.0;
    if (prm.q.is_finite()) {
        const double q = prm.q.value();
        const double head_part = std::pow(lp_norm_truncated(forcing, prm.q, prm.t_end), q);
        const double tail_part = std::pow(1.0 + prm.t_end, 1.0 - q * decay) / (q * decay - 1.0);
        res_norm = std::pow(head_part + tail_part, 1.0 / q);
        res_closed = std::pow(prm.delta / (q - prm.delta), 1.0 / q);
    } else {
        res_norm = forcing.sup_norm();
    }

    rep.quantities = {{"norm_mid", n_mid},
                      {"norm_end", n_end},
                      {"growth_ratio", growth},
                      {"residual_norm", res_norm},
                      {"residual_closed_form", res_closed}};
    rep.assertions.push_back(Assertion::check("truncated L^p norm keeps growing", Rel::at_least, 5.0 * n_mid, n_end, 0.0));
    rep.assertions.push_back(Assertion::check("residual L^q norm finite", Rel::approx, res_closed, res_norm, 1e-6));
    rep.notes.push_back("z(t) = e^{-t} z0 + int_0^t e^{-(t-s)} (1+s)^{-1/delta} ds on a geometric grid");
    rep.notes.push_back("divergence is asserted through the truncation ratio, not as a limit");
    rep.trajectory = std::move(z);
    return rep;
}

ScenarioReport scenario_2d_minimal(const Minimal2dParams& prm) {
    require(prm.gamma_min > 0.0 && prm.gamma_max > prm.gamma_min, "need 0 < gamma_min < gamma_max");
    const auto triple = ConjugateTriple::make(prm.p, prm.p);
    Matrix2 A = Matrix2::Zero();
    A(0, 0) = prm.mu1;
    A(1, 1) = prm.mu2;

    ScenarioReport rep;
    rep.name = "2d_minimal";
    rep.parameters = {{"mu1", num(prm.mu1)},          {"mu2", num(prm.mu2)},          {"p", prm.p.to_string()},
                      {"q", prm.p.to_string()},       {"gamma_min", num(prm.gamma_min)},
                      {"gamma_max", num(prm.gamma_max)}};

    const auto gap = constant_gap(A, triple, LowerBoundGrid::defaults(prm.gamma_min, prm.gamma_max));
    const double mu = std::min(prm.mu1, prm.mu2);
    Vector2 u = Vector2::Zero();
    u(prm.mu1 <= prm.mu2 ? 0 : 1) = 1.0;
    const double spot = lower_bound({A, u, prm.gamma_min, triple});

    rep.quantities = {{"upper", gap.upper},
                      {"lower", gap.lower},
                      {"ratio", gap.ratio},
                      {"argmax_gamma", gap.argmax_gamma},
                      {"lower_at_coordinate_vector", spot}};
    rep.assertions.push_back(Assertion::check("upper equals 1/min mu", Rel::approx, 1.0 / mu, gap.upper, 1e-12));
    rep.assertions.push_back(Assertion::check("lower at coordinate vector", Rel::approx, 1.0 / (mu + prm.gamma_min), spot, 1e-12));
    rep.assertions.push_back(Assertion::check("lower below upper", Rel::at_most, gap.upper, gap.lower, 1e-12));
    rep.assertions.push_back(Assertion::check("gap ratio", Rel::at_least, prm.min_ratio, gap.ratio, 0.0));
    rep.notes.push_back("A = diag(mu1, mu2); the minimal constant is 1/min(mu1, mu2)");
    return rep;
}

ScenarioReport scenario_unbounded_residual(const UnboundedParams& prm) {
    require(prm.q.is_finite(), "unbounded residual scenario needs finite q");
    require(prm.a > 0.0, "unbounded residual scenario needs a > 0");
    require(prm.h > 0.0 && prm.h <= 0.5, "base step must lie in (0, 0.5]");
    const auto triple = ConjugateTriple::make(prm.p, prm.q);
    const double q = prm.q.value();
    const std::size_t K = prm.spikes;

    ScenarioReport rep;
    rep.name = "unbounded_residual";
    rep.parameters = {{"a", num(prm.a)},        {"p", prm.p.to_string()}, {"q", prm.q.to_string()},
                      {"spikes", std::to_string(K)}, {"h", num(prm.h)}};

    // Triangular spike of height k and width k^{-2q} centred at t = k.
    struct Spike {
        double centre, half, height;
    };
    std::vector<Spike> spikes;
    for (std::size_t k = 1; k <= K; ++k) {
        const double kd = static_cast<double>(k);
        spikes.push_back({kd, 0.5 * std::pow(kd, -2.0 * q), kd});
    }
    const double t_end = static_cast<double>(K) + 2.0;
    const int sub = 8;

    std::vector<double> nodes;
    const auto base = static_cast<std::size_t>(std::ceil(t_end / prm.h));
    for (std::size_t j = 0; j <= base; ++j) {
        const double t = std::min(t_end, static_cast<double>(j) * prm.h);
        bool inside = false;
        for (const auto& s : spikes)
            inside = inside || std::abs(t - s.centre) <= s.half * (1.0 + 1e-6);
        if (!inside) nodes.push_back(t);
    }
    for (const auto& s : spikes)
        for (int i = 0; i <= 2 * sub; ++i) nodes.push_back(s.centre - s.half + s.half * i / sub);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double x, double y) { return std::abs(x - y) <= 1e-12; }),
                nodes.end());
    std::vector<std::size_t> kinks;
    for (const auto& s : spikes)
        for (double t : {s.centre - s.half, s.centre, s.centre + s.half}) {
            const auto it = std::min_element(nodes.begin(), nodes.end(),
                                             [t](double x, double y) { return std::abs(x - t) < std::abs(y - t); });
            kinks.push_back(static_cast<std::size_t>(it - nodes.begin()));
        }
    const auto grid = Grid::from_times(nodes, kinks);

    auto w_at = [&](double t) {
        for (const auto& s : spikes) {
            const double d = std::abs(t - s.centre);
            if (d < s.half) return s.height * (1.0 - d / s.half);
        }
        return 0.0;
    };
    const std::size_t n = grid->size();
    Mat w(1, static_cast<Eigen::Index>(n)), y = Mat::Zero(1, static_cast<Eigen::Index>(n)), dy(1, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) w(0, static_cast<Eigen::Index>(k)) = w_at((*grid)[k]);
    // Bounded solution of y' = a y + w, exact for piecewise-linear w.
    const double a = prm.a;
    for (std::size_t k = n - 1; k-- > 0;) {
        const double H = (*grid)[k + 1] - (*grid)[k];
        const double x = a * H;
        const Complex w0 = w(0, static_cast<Eigen::Index>(k)), w1 = w(0, static_cast<Eigen::Index>(k + 1));
        const Complex integral = w0 * (-std::expm1(-x)) / a + (w1 - w0) / H * one_minus_exp_linear(x) / (a * a);
        y(0, static_cast<Eigen::Index>(k)) = std::exp(-x) * y(0, static_cast<Eigen::Index>(k + 1)) - integral;
    }
    dy = a * y + w;

    double eps_closed = 0.0;
    for (const auto& s : spikes) eps_closed += std::pow(s.centre, -q) / (q + 1.0);
    eps_closed = std::pow(eps_closed, 1.0 / q);

    const ExpTail zero{Vec::Zero(1), 1.0};
    PseudoSolution ps{GridFunction(grid, y, zero), GridFunction(grid, dy, zero), eps_closed};
    const auto prob = scalar_expansion(a, {}, 0.0);
    auto res = picard_solve(ps, prob, triple);
    const auto& cert = res.certificate;
    const GridFunction wf(grid, w, zero);
    const double sup_w = wf.sup_norm();

    rep.quantities = {{"residual_sup", sup_w},
                      {"residual_norm", cert.residual_norm},
                      {"epsilon", cert.epsilon},
                      {"L", cert.L},
                      {"deviation", cert.deviation},
                      {"iterations", static_cast<double>(cert.iterations)}};
    rep.assertions.push_back(Assertion::check("residual sup reaches spike count", Rel::at_least,
                                              static_cast<double>(K), sup_w, 1e-12));
    rep.assertions.push_back(Assertion::check("residual L^q norm within epsilon", Rel::at_most, eps_closed,
                                              cert.residual_norm, 1e-9 + 1e-6 * eps_closed));
    rep.assertions.push_back(Assertion::check("deviation within L*epsilon", Rel::at_most, cert.L * cert.epsilon,
                                              cert.deviation, 1e-9));
    rep.notes.push_back("w: triangular spikes of height k and width k^{-2q} at t = k; f = 0");
    rep.certificate = cert;
    rep.trajectory = std::move(res.x);
    return rep;
}

std::vector<std::string> scenario_names() {
    return {"sine", "sharpness", "pq_counterexample", "2d_minimal", "unbounded_residual"};
}

}  // namespace hus
