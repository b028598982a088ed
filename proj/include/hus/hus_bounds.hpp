#pragma once

#include "hus/exponent.hpp"
#include "hus/linear_evolution.hpp"

#include <optional>
#include <vector>

namespace hus {

struct UpperConstantQuery {
    double D = 1.0;
    double lambda = 1.0;
    DichotomyKind kind = DichotomyKind::general;
    double c = 0.0;  // Lipschitz constant of f(t, .)
    ConjugateTriple triple;

    static UpperConstantQuery from(const DichotomySpec& spec, double c, const ConjugateTriple& triple) {
        return {spec.D, spec.lambda, spec.kind, c, triple};
    }
};

/// Contraction factor of the shadowing operator: 2cD/lambda for a general
/// dichotomy, cD/lambda when one half of the splitting is trivial.
double contraction_factor(DichotomyKind kind, double D, double lambda, double c);

/// HUS constant from dichotomy data:
///   general:               2D (1/(lambda r))^{1/r} / (1 - 2cD/lambda)
///   contraction/expansion:  D (1/(lambda r))^{1/r} / (1 -  cD/lambda)
/// Throws Errc::smallness_violation when the denominator is not positive.
double upper_hus_constant(const UpperConstantQuery& q);

/// (e^{delta-1}/delta) (1/(r (Re nu - delta)))^{1/r}
double jordan_delta_factor(double re_nu, Exponent r, double delta);

struct DeltaSearch {
    Complex nu;
    Exponent r = Exponent::finite(1.0);
    double cond = 1.0;
    double delta_margin = 1e-9;

    /// Upper end of the closed search interval (0, min{1, Re nu} - margin].
    double upper() const;
};

struct DeltaOptimum {
    double delta = 0.0;
    double factor = 0.0;  // jordan_delta_factor at delta (without cond)
};

/// Golden-section minimisation of jordan_delta_factor over the search domain.
DeltaOptimum optimize_delta(const DeltaSearch& search);

/// HUS constant for x' = Ax, A 2x2 with an exponential expansion, in the max
/// norm. Jordan-block matrices use `delta` when given, otherwise the optimum.
double corollary_2d_constant(const Matrix2& a, const ConjugateTriple& triple,
                             std::optional<double> delta = std::nullopt);

struct LowerBoundQuery {
    Matrix2 A;
    Vector2 u;  // |u|_inf = 1
    double gamma = 1.0;
    ConjugateTriple triple;
};

/// |A^{-1}u| (q gamma)^{1/q} / (|(gamma A^{-1} + I) u| (p gamma)^{1/p}); factors
/// with an infinite exponent are replaced by 1.
double lower_bound(const LowerBoundQuery& q);

struct LowerBoundGrid {
    std::vector<double> gammas;
    std::vector<Vector2> directions;
    int refine_passes = 2;

    /// Log-spaced gammas and a max-norm sphere grid: one coordinate fixed at
    /// 1, the other over `phases` x `radii` points of the closed unit disk.
    static LowerBoundGrid defaults(double gamma_min = 1e-4, double gamma_max = 1e2,
                                   std::size_t gamma_count = 60, std::size_t phases = 16,
                                   std::size_t radii = 8);
};

struct LowerBoundResult {
    double best = 0.0;
    LowerBoundQuery query;
    std::size_t evaluations = 0;
};

/// Maximum of lower_bound over the grid, refining gamma around the incumbent.
LowerBoundResult lower_bound_sweep(const Matrix2& a, const ConjugateTriple& triple, const LowerBoundGrid& grid);

struct GapReport {
    double upper = 0.0;
    double lower = 0.0;
    double ratio = 0.0;  // lower / upper
    Vector2 argmax_u = Vector2::Zero();
    double argmax_gamma = 0.0;
    std::optional<double> delta_star;
    JordanForm::Case jordan_case = JordanForm::Case::diagonal;
};

GapReport constant_gap(const Matrix2& a, const ConjugateTriple& triple,
                       const LowerBoundGrid& grid = LowerBoundGrid::defaults());

}  // namespace hus
