#include "hus/hus_bounds.hpp"

#include "hus/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hus {

double contraction_factor(DichotomyKind kind, double D, double lambda, double c) {
    const double base = c * D / lambda;
    return kind == DichotomyKind::general ? 2.0 * base : base;
}

double upper_hus_constant(const UpperConstantQuery& q) {
    if (!(q.D > 0.0) || !(q.lambda > 0.0)) fail(Errc::invalid_argument, "need D > 0 and lambda > 0");
    if (!(q.c >= 0.0)) fail(Errc::invalid_argument, "Lipschitz constant must be non-negative");
    const double kappa = contraction_factor(q.kind, q.D, q.lambda, q.c);
    if (!(kappa < 1.0)) {
        const char* bound = q.kind == DichotomyKind::general ? "lambda/(2D)" : "lambda/D";
        fail(Errc::smallness_violation,
             std::string("Lipschitz constant must be below ") + bound + " (contraction factor " +
                 std::to_string(kappa) + ")");
    }
    const double halves = q.kind == DichotomyKind::general ? 2.0 : 1.0;
    return halves * q.D * kernel_lr_norm(q.lambda, q.triple.r) / (1.0 - kappa);
}

double jordan_delta_factor(double re_nu, Exponent r, double delta) {
    if (!(delta > 0.0) || !(delta < re_nu)) fail(Errc::invalid_argument, "delta must lie in (0, Re nu)");
    return std::exp(delta - 1.0) / delta * kernel_lr_norm(re_nu - delta, r);
}

double DeltaSearch::upper() const { return std::min(1.0, nu.real()) - delta_margin; }

DeltaOptimum optimize_delta(const DeltaSearch& search) {
    if (!(search.nu.real() > 0.0)) fail(Errc::not_expansion, "Re(nu) must be positive");
    if (!(search.delta_margin > 0.0)) fail(Errc::invalid_argument, "delta_margin must be positive");
    const double hi = search.upper();
    if (!(hi > 0.0)) fail(Errc::precondition, "delta search domain is empty");

    const double re_nu = search.nu.real();
    auto g = [&](double d) { return jordan_delta_factor(re_nu, search.r, d); };

    // log g is convex on (0, Re nu), so golden section converges to the
    // global minimiser on the closed domain.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi * 1e-12, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, b); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        }
    }
    DeltaOptimum best{0.5 * (a + b), g(0.5 * (a + b))};
    if (const double at_hi = g(hi); at_hi < best.factor) best = {hi, at_hi};
    return best;
}

namespace {

std::pair<Complex, Complex> eigenvalues2(const Matrix2& a) {
    const Complex half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const Complex half_gap = 0.5 * (a(0, 0) - a(1, 1));
    const Complex root = std::sqrt(half_gap * half_gap + a(0, 1) * a(1, 0));
    return {half_trace + root, half_trace - root};
}

void require_invertible_expansion(const Matrix2& a) {
    const double norm = op_norm_inf(a);
    if (std::abs(a.determinant()) <= 1e-12 * std::max(1.0, norm * norm))
        fail(Errc::singular_matrix, "A is singular");
    const auto [m1, m2] = eigenvalues2(a);
    if (!(m1.real() > 0.0) || !(m2.real() > 0.0))
        fail(Errc::not_expansion, "x' = Ax admits no exponential expansion (an eigenvalue has Re <= 0)");
}

double lower_bound_value(const Matrix2& a_inv, const Vector2& u, double gamma, const ConjugateTriple& t) {
    const Vector2 num = a_inv * u;
    const Vector2 den = (gamma * a_inv + Matrix2::Identity()) * u;
    return max_vector_norm(num) * root_or_one(t.q.is_infinite() ? 1.0 : t.q.value() * gamma, t.q) /
           (max_vector_norm(den) * root_or_one(t.p.is_infinite() ? 1.0 : t.p.value() * gamma, t.p));
}

}  // namespace

double corollary_2d_constant(const Matrix2& a, const ConjugateTriple& triple, std::optional<double> delta) {
    const JordanForm jf = jordan_decompose(a);
    if (!(jf.mu1.real() > 0.0) || !(jf.mu2.real() > 0.0))
        fail(Errc::not_expansion, "x' = Ax admits no exponential expansion (an eigenvalue has Re <= 0)");
    if (jf.kind == JordanForm::Case::diagonal)
        return jf.conditioning * kernel_lr_norm(std::min(jf.mu1.real(), jf.mu2.real()), triple.r);

    const double re_nu = jf.nu().real();
    if (delta) {
        if (!(*delta > 0.0) || !(*delta < std::min(1.0, re_nu)))
            fail(Errc::precondition, "delta must lie in (0, min{1, Re nu})");
        return jf.conditioning * jordan_delta_factor(re_nu, triple.r, *delta);
    }
    return jf.conditioning * optimize_delta({jf.nu(), triple.r, jf.conditioning}).factor;
}

double lower_bound(const LowerBoundQuery& q) {
    require_invertible_expansion(q.A);
    if (std::abs(max_vector_norm(q.u) - 1.0) > 1e-12) fail(Errc::invalid_argument, "u must be a max-norm unit vector");
    if (!(q.gamma > 0.0)) fail(Errc::invalid_argument, "gamma must be positive");
    return lower_bound_value(q.A.inverse(), q.u, q.gamma, q.triple);
}

LowerBoundGrid LowerBoundGrid::defaults(double gamma_min, double gamma_max, std::size_t gamma_count,
                                        std::size_t phases, std::size_t radii) {
    if (!(gamma_min > 0.0) || !(gamma_max >= gamma_min) || gamma_count == 0 || phases == 0 || radii < 2)
        fail(Errc::invalid_argument, "invalid lower-bound grid parameters");
    LowerBoundGrid g;
    for (std::size_t i = 0; i < gamma_count; ++i) {
        const double f = gamma_count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(gamma_count - 1);
        g.gammas.push_back(gamma_min * std::pow(gamma_max / gamma_min, f));
    }
    for (int fixed = 0; fixed < 2; ++fixed) {
        Vector2 u = Vector2::Zero();
        u(fixed) = 1.0;
        g.directions.push_back(u);
        for (std::size_t ir = 1; ir < radii; ++ir) {
            const double rho = static_cast<double>(ir) / static_cast<double>(radii - 1);
            for (std::size_t ip = 0; ip < phases; ++ip) {
                const double theta = 2.0 * std::numbers::pi * static_cast<double>(ip) / static_cast<double>(phases);
                u(1 - fixed) = std::polar(rho, theta);
                g.directions.push_back(u);
            }
        }
    }
    return g;
}

LowerBoundResult lower_bound_sweep(const Matrix2& a, const ConjugateTriple& triple, const LowerBoundGrid& grid) {
    require_invertible_expansion(a);
    if (grid.gammas.empty() || grid.directions.empty()) fail(Errc::invalid_argument, "empty lower-bound grid");
    for (double g : grid.gammas)
        if (!(g > 0.0)) fail(Errc::invalid_argument, "gamma must be positive");
    for (const auto& u : grid.directions)
        if (std::abs(max_vector_norm(u) - 1.0) > 1e-12) fail(Errc::invalid_argument, "u must be a max-norm unit vector");

    const Matrix2 a_inv = a.inverse();
    LowerBoundResult res;
    res.query = {a, grid.directions.front(), grid.gammas.front(), triple};
    res.best = -1.0;
    auto scan = [&](const std::vector<double>& gammas) {
        for (double g : gammas)
            for (const auto& u : grid.directions) {
                const double v = lower_bound_value(a_inv, u, g, triple);
                ++res.evaluations;
                if (v > res.best) {
                    res.best = v;
                    res.query.u = u;
                    res.query.gamma = g;
                }
            }
    };

    std::vector<double> gammas = grid.gammas;
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
    scan(gammas);

    for (int pass = 0; pass < grid.refine_passes && gammas.size() > 1; ++pass) {
        const auto it = std::lower_bound(gammas.begin(), gammas.end(), res.query.gamma);
        const std::size_t i = static_cast<std::size_t>(it - gammas.begin());
        const double lo = gammas[i == 0 ? 0 : i - 1];
        const double hi = gammas[std::min(i + 1, gammas.size() - 1)];
        if (!(hi > lo)) break;
        std::vector<double> fine;
        constexpr int points = 9;
        for (int k = 0; k < points; ++k)
            fine.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
        scan(fine);
        gammas = std::move(fine);
    }
    return res;
}

GapReport constant_gap(const Matrix2& a, const ConjugateTriple& triple, const LowerBoundGrid& grid) {
    GapReport rep;
    const JordanForm jf = jordan_decompose(a);
    rep.jordan_case = jf.kind;
    if (jf.kind == JordanForm::Case::jordan_block && jf.nu().real() > 0.0)
        rep.delta_star = optimize_delta({jf.nu(), triple.r, jf.conditioning}).delta;
    rep.upper = corollary_2d_constant(a, triple);
    const auto lower = lower_bound_sweep(a, triple, grid);
    rep.lower = lower.best;
    rep.argmax_u = lower.query.u;
    rep.argmax_gamma = lower.query.gamma;
    rep.ratio = rep.lower / rep.upper;
    return rep;
}

}  // namespace hus
