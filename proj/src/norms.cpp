#include "hus/norms.hpp"

#include "hus/error.hpp"
#include "hus/product_integration.hpp"

#include <algorithm>
#include <cmath>

namespace hus {

namespace {

// \int_a^b of the quadratic through (x[j], f[j]); origin shifted to x[1].
double quadratic_piece(const double x[3], const double f[3], double a, double b) {
    double total = 0.0;
    for (int j = 0; j < 3; ++j) {
        const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
        const double xa = x[i1] - x[1], xb = x[i2] - x[1];
        const double denom = (x[j] - x[i1]) * (x[j] - x[i2]);
        auto antiderivative = [&](double u) {
            return u * u * u / 3.0 - (xa + xb) * u * u / 2.0 + xa * xb * u;
        };
        total += f[j] * (antiderivative(b - x[1]) - antiderivative(a - x[1])) / denom;
    }
    return total;
}

double integrate_segment(const std::vector<double>& t, std::span<const double> f, std::size_t a,
                         std::size_t b) {
    const std::size_t intervals = b - a;
    if (intervals == 0) return 0.0;
    if (intervals == 1) return 0.5 * (t[b] - t[a]) * (f[a] + f[b]);
    double sum = 0.0;
    std::size_t k = a;
    for (; k + 2 <= b; k += 2) {
        const double h0 = t[k + 1] - t[k], h1 = t[k + 2] - t[k + 1];
        sum += (h0 + h1) / 6.0 *
               ((2.0 - h1 / h0) * f[k] + (h0 + h1) * (h0 + h1) / (h0 * h1) * f[k + 1] +
                (2.0 - h0 / h1) * f[k + 2]);
    }
    if (k < b) {
        const double x[3] = {t[b - 2], t[b - 1], t[b]};
        const double y[3] = {f[b - 2], f[b - 1], f[b]};
        sum += quadratic_piece(x, y, t[b - 1], t[b]);
    }
    return sum;
}

std::vector<double> powered_norms(const GridFunction& g, double p, PointNorm kind, std::size_t last) {
    std::vector<double> s(last + 1);
    for (std::size_t k = 0; k <= last; ++k) s[k] = std::pow(point_norm(g.at(k), kind), p);
    return s;
}

}  // namespace

double integrate_samples(const Grid& grid, std::span<const double> f, std::size_t last) {
    if (f.size() < last + 1) fail(Errc::invalid_argument, "integrate_samples: too few samples");
    const auto& t = grid.times();
    double sum = 0.0;
    std::size_t start = 0;
    for (std::size_t kink : grid.kinks()) {
        if (kink <= start) continue;
        if (kink >= last) break;
        sum += integrate_segment(t, f, start, kink);
        start = kink;
    }
    return sum + integrate_segment(t, f, start, last);
}

double lp_integral(const GridFunction& g, double p, const NormOptions& opts) {
    if (!(p >= 1.0) || !std::isfinite(p)) fail(Errc::invalid_argument, "lp_integral needs finite p >= 1");
    const std::size_t last = g.size() - 1;
    const auto s = powered_norms(g, p, opts.point, last);
    double sum = integrate_samples(g.grid(), s, last);

    if (const auto& tail = g.tail()) {
        if (!tail->is_zero()) sum += std::pow(point_norm(tail->coefficient, opts.point), p) / (p * tail->rate);
        return sum;
    }

    // No analytic tail: accept only a visibly decaying (or vanished) end.
    const double end = point_norm(g.at(last), opts.point);
    const double sup = g.sup_norm(opts.point);
    if (end == 0.0 || end <= 1e-14 * sup) return sum;
    const std::size_t back = std::max<std::size_t>(1, last / 16);
    const double earlier = point_norm(g.at(last - back), opts.point);
    const double span = g.grid()[last] - g.grid()[last - back];
    const double rate = earlier > 0.0 ? std::log(earlier / end) / span : 0.0;
    if (!(rate > 0.0))
        fail(Errc::divergent_norm, "function has no tail and does not decay at T_max; L^p norm on [0, inf) "
                                   "cannot be bounded");
    return sum + std::pow(end, p) / (p * rate);
}

double lp_norm(const GridFunction& g, Exponent p, const NormOptions& opts) {
    if (p.is_infinite()) return g.sup_norm(opts.point);
    return std::pow(lp_integral(g, p.value(), opts), 1.0 / p.value());
}

double lp_norm_truncated(const GridFunction& g, Exponent p, double t_end, const NormOptions& opts) {
    const auto node = g.grid().find_node(t_end);
    if (!node) fail(Errc::invalid_argument, "truncation point is not a grid node");
    if (p.is_infinite()) {
        double s = 0.0;
        for (std::size_t k = 0; k <= *node; ++k) s = std::max(s, point_norm(g.at(k), opts.point));
        return s;
    }
    const auto s = powered_norms(g, p.value(), opts.point, *node);
    return std::pow(integrate_samples(g.grid(), s, *node), 1.0 / p.value());
}

GridFunction convolve(const ExpKernel& kernel, const GridFunction& c) {
    if (!(kernel.rate > 0.0)) fail(Errc::invalid_argument, "kernel rate must be positive");
    const std::size_t n = c.size();
    const Eigen::Index d = c.dim();

    std::optional<ExpTail> c_tail = c.tail();
    if (!c_tail) {
        const double end = point_norm(c.at(n - 1));
        if (end == 0.0 || end <= 1e-14 * c.sup_norm()) c_tail = ExpTail{Vec::Zero(d), kernel.rate};
    }

    const Mat generator = Mat::Constant(1, 1, -kernel.rate);
    Mat out = Mat::Zero(d, static_cast<Eigen::Index>(n));

    if (kernel.side == ExpKernel::Side::causal) {
        const ExponentialStepper stepper(generator, c.grid_ptr(), StepDirection::forward);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const auto& w = stepper.step(k);
            const auto& s = stepper.stencil(k);
            Vec next = w.propagator(0, 0) * out.col(static_cast<Eigen::Index>(k));
            for (int j = 0; j < w.count; ++j) next += w.weights[static_cast<std::size_t>(j)](0, 0) * c.at(s.nodes[static_cast<std::size_t>(j)]);
            out.col(static_cast<Eigen::Index>(k + 1)) = next;
        }
        std::optional<ExpTail> tail;
        if (c_tail) {
            const double rate = c_tail->is_zero() ? kernel.rate : std::min(kernel.rate, c_tail->rate);
            tail = ExpTail{out.col(static_cast<Eigen::Index>(n - 1)), rate};
        }
        return GridFunction(c.grid_ptr(), std::move(out), std::move(tail));
    }

    if (!c_tail)
        fail(Errc::divergent_norm, "anticausal convolution needs an analytic tail on its input");
    const ExponentialStepper stepper(generator, c.grid_ptr(), StepDirection::backward);
    out.col(static_cast<Eigen::Index>(n - 1)) = c_tail->coefficient / (kernel.rate + c_tail->rate);
    for (std::size_t k = n - 1; k-- > 0;) {
        const auto& w = stepper.step(k);
        const auto& s = stepper.stencil(k);
        Vec prev = w.propagator(0, 0) * out.col(static_cast<Eigen::Index>(k + 1));
        for (int j = 0; j < w.count; ++j) prev += w.weights[static_cast<std::size_t>(j)](0, 0) * c.at(s.nodes[static_cast<std::size_t>(j)]);
        out.col(static_cast<Eigen::Index>(k)) = prev;
    }
    // Past T_max the anticausal result is exactly v e^{-rho (t-T)} / (rate + rho).
    ExpTail tail{out.col(static_cast<Eigen::Index>(n - 1)), c_tail->rate};
    return GridFunction(c.grid_ptr(), std::move(out), std::move(tail));
}

YoungReport young_check(const ExpKernel& kernel, const GridFunction& c, const ConjugateTriple& triple,
                        const NormOptions& opts) {
    YoungReport rep;
    rep.lhs = lp_norm(convolve(kernel, c), triple.p, opts);
    rep.rhs = kernel_lr_norm(kernel.rate, triple.r) * lp_norm(c, triple.q, opts);
    rep.holds = rep.lhs <= rep.rhs + 1e-9 + 1e-7 * rep.rhs;
    return rep;
}

}  // namespace hus
