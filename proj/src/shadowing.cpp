#include "hus/shadowing.hpp"

#include "hus/error.hpp"
#include "hus/hus_bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace hus {

namespace {

Eigen::Index col(std::size_t k) { return static_cast<Eigen::Index>(k); }

bool decays_at_end(const Mat& values) {
    const double end = values.col(values.cols() - 1).cwiseAbs().maxCoeff();
    return end == 0.0 || end <= 1e-14 * std::max(1.0, values.cwiseAbs().maxCoeff());
}

// Derivative at t_k of the quadratic through nodes (i, i+1, i+2).
std::array<double, 3> derivative_weights(const Grid& grid, std::size_t i, std::size_t k) {
    const double t[3] = {grid[i], grid[i + 1], grid[i + 2]};
    const double x = grid[k];
    std::array<double, 3> w{};
    for (int j = 0; j < 3; ++j) {
        double denom = 1.0;
        for (int l = 0; l < 3; ++l)
            if (l != j) denom *= t[j] - t[l];
        double num = 0.0;
        for (int m = 0; m < 3; ++m) {
            if (m == j) continue;
            double prod = 1.0;
            for (int l = 0; l < 3; ++l)
                if (l != j && l != m) prod *= x - t[l];
            num += prod;
        }
        w[static_cast<std::size_t>(j)] = num / denom;
    }
    return w;
}

// A triple {i, i+1, i+2} is usable when its middle node is not a kink.
bool usable_triple(const Grid& grid, std::ptrdiff_t i) {
    return i >= 0 && static_cast<std::size_t>(i) + 2 < grid.size() && !grid.is_kink(static_cast<std::size_t>(i) + 1);
}

Vec simpson_pair(double h0, double h1, const Vec& f0, const Vec& f1, const Vec& f2) {
    return (h0 + h1) / 6.0 * ((2.0 - h1 / h0) * f0 + (h0 + h1) * (h0 + h1) / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
}

std::optional<double> tail_rate(const std::optional<ExpTail>& tail) {
    if (!tail || tail->is_zero()) return std::nullopt;
    return tail->rate;
}

}  // namespace

SemilinearProblem SemilinearProblem::make(LinearSystem linear, Nonlinearity f, double c, DichotomySpec dichotomy,
                                          std::uint64_t seed) {
    if (!(c >= 0.0) || !std::isfinite(c)) fail(Errc::invalid_argument, "Lipschitz constant must be finite and >= 0");
    if (dichotomy.dim() != linear.dim()) fail(Errc::invalid_argument, "dichotomy and system dimensions differ");
    SemilinearProblem prob;
    prob.linear = std::move(linear);
    prob.f = std::move(f);
    prob.lipschitz = c;
    prob.dichotomy = std::move(dichotomy);

    const double kappa = prob.kappa();
    if (!(kappa < 1.0))
        fail(Errc::smallness_violation, "contraction factor " + std::to_string(kappa) + " is not below 1");

    if (prob.f) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> coord(-2.0, 2.0);
        std::uniform_real_distribution<double> time(0.0, 10.0);
        const auto d = prob.linear.dim();
        for (int trial = 0; trial < 256; ++trial) {
            Vec u(d), v(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                u(i) = coord(rng);
                v(i) = coord(rng);
            }
            const double t = time(rng);
            const double du = max_vector_norm(u - v);
            if (du == 0.0) continue;
            const double df = max_vector_norm(prob.f(t, u) - prob.f(t, v));
            if (df > c * du * (1.0 + 1e-9) + 1e-12)
                fail(Errc::precondition, "sampled Lipschitz ratio " + std::to_string(df / du) +
                                             " exceeds declared c = " + std::to_string(c));
        }
    }
    return prob;
}

Vec SemilinearProblem::eval_f(double t, const Vec& x) const {
    if (!f) return Vec::Zero(x.size());
    return f(t, x);
}

double SemilinearProblem::kappa() const {
    return contraction_factor(dichotomy.kind, dichotomy.D, dichotomy.lambda, lipschitz);
}

GridFunction finite_difference_derivative(const GridFunction& y) {
    const Grid& grid = y.grid();
    const std::size_t n = grid.size();
    if (n < 2) fail(Errc::invalid_argument, "derivative needs at least two nodes");
    Mat d = Mat::Zero(y.dim(), col(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto sk = static_cast<std::ptrdiff_t>(k);
        std::optional<std::ptrdiff_t> start;
        if (!grid.is_kink(k) && usable_triple(grid, sk - 1))
            start = sk - 1;
        else if (usable_triple(grid, sk))
            start = sk;
        else if (usable_triple(grid, sk - 2))
            start = sk - 2;
        if (start) {
            const auto i = static_cast<std::size_t>(*start);
            const auto w = derivative_weights(grid, i, k);
            d.col(col(k)) = w[0] * y.at(i) + w[1] * y.at(i + 1) + w[2] * y.at(i + 2);
        } else {
            const std::size_t a = k + 1 < n ? k : k - 1;
            d.col(col(k)) = (y.at(a + 1) - y.at(a)) / (grid[a + 1] - grid[a]);
        }
    }
    std::optional<ExpTail> tail;
    if (y.tail()) tail = ExpTail{-y.tail()->rate * y.tail()->coefficient, y.tail()->rate};
    return GridFunction(y.grid_ptr(), std::move(d), std::move(tail));
}

GridFunction residual(const PseudoSolution& ps, const SemilinearProblem& prob) {
    const GridFunction& y = ps.y;
    if (y.dim() != prob.linear.dim()) fail(Errc::invalid_argument, "pseudosolution dimension mismatch");
    const GridFunction dy = ps.derivative ? *ps.derivative : finite_difference_derivative(y);
    if (dy.size() != y.size() || dy.dim() != y.dim())
        fail(Errc::invalid_argument, "derivative does not match the pseudosolution grid");
    const Grid& grid = y.grid();
    Mat w(y.dim(), col(y.size()));
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double t = grid[k];
        const Vec yk = y.at(k);
        w.col(col(k)) = dy.at(k) - prob.linear.at(t) * yk - prob.eval_f(t, yk);
    }
    std::optional<ExpTail> tail;
    const Vec w_end = w.col(w.cols() - 1);
    if (y.tail()) {
        if (!y.tail()->is_zero())
            tail = ExpTail{w_end, y.tail()->rate};
        else if (decays_at_end(w))
            tail = ExpTail{Vec::Zero(y.dim()), 1.0};
    }
    return GridFunction(y.grid_ptr(), std::move(w), std::move(tail));
}

ShadowingOperator::ShadowingOperator(const SemilinearProblem& prob, const PseudoSolution& y, const SolveOptions& opts)
    : prob_(prob),
      y_(y.y),
      residual_(hus::residual(y, prob)),
      fd_derivative_(!y.derivative),
      propagator_(prob.linear, prob.dichotomy, y.y.grid_ptr(), opts.ode) {}

ShadowingOperator::Integrand ShadowingOperator::integrand(const GridFunction& z) const {
    if (z.size() != y_.size() || z.dim() != y_.dim()) fail(Errc::invalid_argument, "iterate does not match grid");
    const Grid& grid = y_.grid();
    Integrand g;
    g.values = -residual_.values();
    if (prob_.f) {
        for (std::size_t k = 0; k < y_.size(); ++k) {
            const double t = grid[k];
            const Vec yk = y_.at(k);
            g.values.col(col(k)) += prob_.f(t, yk + z.at(k)) - prob_.f(t, yk);
        }
    }

    // The integrand past T_max is -w plus a difference bounded by c|z|.
    const bool w_zero = residual_.tail() && residual_.tail()->is_zero();
    const bool z_zero = !prob_.f || (z.tail() && z.tail()->is_zero());
    const Vec g_end = g.values.col(g.values.cols() - 1);
    if ((!residual_.tail() || !z.tail()) && !(w_zero && z_zero)) {
        if (decays_at_end(g.values)) g.tail = ExpTail{Vec::Zero(y_.dim()), 1.0};
        return g;
    }
    if (w_zero && z_zero) {
        g.tail = ExpTail{Vec::Zero(y_.dim()), 1.0};
        return g;
    }
    double rate = std::numeric_limits<double>::infinity();
    if (auto r = tail_rate(residual_.tail())) rate = std::min(rate, *r);
    if (prob_.f)
        if (auto r = tail_rate(z.tail())) rate = std::min(rate, *r);
    if (!std::isfinite(rate)) rate = prob_.dichotomy.lambda;
    g.tail = ExpTail{g_end, rate};
    return g;
}

GridFunction ShadowingOperator::stable_part(const Integrand& g) const {
    Mat u = propagator_.stable(g.values);
    std::optional<ExpTail> tail;
    if (prob_.dichotomy.kind == DichotomyKind::expansion) {
        tail = ExpTail{Vec::Zero(y_.dim()), 1.0};
    } else {
        double rate = prob_.dichotomy.lambda;
        if (auto r = tail_rate(g.tail)) rate = std::min(rate, *r);
        tail = ExpTail{u.col(u.cols() - 1), rate};
    }
    return GridFunction(y_.grid_ptr(), std::move(u), std::move(tail));
}

GridFunction ShadowingOperator::unstable_part(const Integrand& g) const {
    Mat v = -propagator_.unstable(g.values, g.tail);
    std::optional<ExpTail> tail;
    if (prob_.dichotomy.kind == DichotomyKind::contraction || !g.tail || g.tail->is_zero())
        tail = ExpTail{Vec::Zero(y_.dim()), 1.0};
    else
        tail = ExpTail{v.col(v.cols() - 1), g.tail->rate};
    return GridFunction(y_.grid_ptr(), std::move(v), std::move(tail));
}

GridFunction ShadowingOperator::T1(const GridFunction& z) const { return stable_part(integrand(z)); }

GridFunction ShadowingOperator::T2(const GridFunction& z) const { return unstable_part(integrand(z)); }

GridFunction ShadowingOperator::apply(const GridFunction& z) const {
    const Integrand g = integrand(z);
    GridFunction out = stable_part(g);
    out += unstable_part(g);
    return out;
}

GridFunction apply_T1(const GridFunction& z, const PseudoSolution& y, const SemilinearProblem& prob) {
    return ShadowingOperator(prob, y).T1(z);
}

GridFunction apply_T2(const GridFunction& z, const PseudoSolution& y, const SemilinearProblem& prob) {
    return ShadowingOperator(prob, y).T2(z);
}

double ode_defect(const GridFunction& x, const SemilinearProblem& prob) {
    const Grid& grid = x.grid();
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
        if (grid.is_kink(k)) continue;
        Vec f[3];
        for (int j = 0; j < 3; ++j) {
            const std::size_t node = k - 1 + static_cast<std::size_t>(j);
            const double t = grid[node];
            const Vec xn = x.at(node);
            f[j] = prob.linear.at(t) * xn + prob.eval_f(t, xn);
        }
        const double h0 = grid[k] - grid[k - 1];
        const double h1 = grid[k + 1] - grid[k];
        const Vec jump = x.at(k + 1) - x.at(k - 1) - simpson_pair(h0, h1, f[0], f[1], f[2]);
        worst = std::max(worst, max_vector_norm(jump) / (h0 + h1));
    }
    return worst;
}

ShadowingResult picard_solve(const PseudoSolution& y, const SemilinearProblem& prob, const ConjugateTriple& triple,
                             const SolveOptions& opts) {
    const double kappa = prob.kappa();
    const double L = upper_hus_constant(UpperConstantQuery::from(prob.dichotomy, prob.lipschitz, triple));

    ShadowingOperator op(prob, y, opts);
    HusCertificate cert;
    cert.triple = triple;
    cert.kappa = kappa;
    cert.L = L;
    cert.finite_difference_derivative = op.derivative_from_finite_differences();
    cert.residual_norm = lp_norm(op.residual(), triple.q, opts.norm);
    if (y.epsilon) {
        if (!(*y.epsilon >= 0.0)) fail(Errc::invalid_argument, "declared epsilon must be >= 0");
        if (cert.residual_norm > *y.epsilon * (1.0 + 1e-6) + 1e-9)
            fail(Errc::precondition, "measured residual norm " + std::to_string(cert.residual_norm) +
                                         " exceeds declared epsilon " + std::to_string(*y.epsilon));
        cert.epsilon = *y.epsilon;
    } else {
        cert.epsilon = cert.residual_norm;
    }

    GridFunction z = GridFunction::zeros(y.y.grid_ptr(), y.y.dim());
    const double threshold = kappa > 0.0 ? opts.tol * (1.0 - kappa) / kappa : std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iter; ++it) {
        GridFunction next = op.apply(z);
        const double update = lp_norm(next - z, triple.p, opts.norm);
        if (!std::isfinite(update)) fail(Errc::no_convergence, "Picard update is not finite");
        cert.update_norms.push_back(update);
        cert.iterations = it;
        cert.final_update = update;
        z = std::move(next);
        if (update <= threshold) {
            cert.converged = true;
            break;
        }
    }
    if (!cert.converged)
        fail(Errc::no_convergence, "no convergence after " + std::to_string(opts.max_iter) + " iterations, last update " +
                                       std::to_string(cert.final_update));

    const auto& u = cert.update_norms;
    const double floor = 1e-13 * std::max(u.front(), std::numeric_limits<double>::min());
    for (std::size_t k = 1; k < u.size(); ++k)
        if (u[k - 1] > floor && u[k] > floor) cert.observed_rate = std::max(cert.observed_rate, u[k] / u[k - 1]);

    GridFunction x = y.y;
    x += z;
    cert.deviation = lp_norm(z, triple.p, opts.norm);
    cert.residual_check = ode_defect(x, prob);
    const double scale = std::max(1.0, op.residual().sup_norm());
    cert.residual_ok = cert.residual_check <= opts.residual_tol * scale;
    const double bound = L * cert.epsilon;
    cert.bound_ok = cert.deviation <= bound + opts.cert_atol + opts.cert_rtol * bound;
    if (!cert.residual_ok)
        fail(Errc::certificate_failure, "x fails the ODE: defect " + std::to_string(cert.residual_check));
    if (!cert.bound_ok)
        fail(Errc::certificate_failure, "deviation " + std::to_string(cert.deviation) + " exceeds L*eps = " +
                                            std::to_string(bound));
    return {std::move(x), std::move(z), std::move(cert)};
}

bool uniqueness_probe(const SemilinearProblem& prob, const PseudoSolution& ps, const GridFunction& x,
                      const ConjugateTriple& triple, double deviation, const UniquenessOptions& opts) {
    if (prob.dichotomy.kind != DichotomyKind::expansion)
        fail(Errc::precondition, "uniqueness probe needs an expansion dichotomy");
    const GridFunction& y = ps.y;
    const Grid& grid = y.grid();
    const auto d = y.dim();

    std::vector<double> times;
    for (double t : grid.times())
        if (t <= opts.horizon * (1.0 + 1e-12)) times.push_back(t);
    if (times.size() < 3) fail(Errc::invalid_argument, "probe horizon covers too few grid nodes");
    std::vector<std::size_t> kinks;
    for (std::size_t k : grid.kinks())
        if (k < times.size()) kinks.push_back(k);
    const GridPtr sub = Grid::from_times(times, kinks);

    std::vector<Vec> offsets = opts.offsets;
    if (offsets.empty())
        for (Eigen::Index i = 0; i < d; ++i) offsets.push_back(0.1 * Vec::Unit(d, i));

    const VectorField rhs = [&prob](double t, const Vec& v) -> Vec {
        return prob.linear.at(t) * v + prob.eval_f(t, v);
    };
    const double growth = prob.dichotomy.lambda - prob.lipschitz * prob.dichotomy.D;
    const std::size_t n = times.size();
    const std::size_t checkpoints[4] = {n / 4, n / 2, (3 * n) / 4, n - 1};

    for (const Vec& offset : offsets) {
        const double size = max_vector_norm(offset);
        if (size == 0.0) continue;
        Mat alt(d, col(n));
        alt.col(0) = x.at(0) + offset;
        for (std::size_t k = 1; k < n; ++k)
            alt.col(col(k)) = integrate_vector(rhs, alt.col(col(k - 1)), times[k - 1], times[k], opts.ode);

        for (std::size_t k = 0; k < n; ++k) {
            const double sep = max_vector_norm(alt.col(col(k)) - x.at(k));
            const double expected = std::exp(growth * times[k]) * size / prob.dichotomy.D;
            if (sep < expected * (1.0 - 1e-6)) return false;
        }

        Mat diff = alt - y.values().leftCols(col(n));
        const GridFunction gap(sub, std::move(diff));
        double previous = 0.0;
        for (std::size_t k : checkpoints) {
            const double norm = lp_norm_truncated(gap, triple.p, times[k]);
            if (norm < previous) return false;
            previous = norm;
        }
        if (!(previous >= opts.factor * deviation)) return false;
    }
    return true;
}

}  // namespace hus
