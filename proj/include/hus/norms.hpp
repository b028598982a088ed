#pragma once

#include "hus/exponent.hpp"
#include "hus/grid_function.hpp"

#include <span>

namespace hus {

struct NormOptions {
    PointNorm point = PointNorm::max;
};

/// \int_{t_0}^{t_last} f dt of nodal samples. Composite Simpson (exact for
/// quadratics on any spacing) inside each kink-free segment.
double integrate_samples(const Grid& grid, std::span<const double> f, std::size_t last);
inline double integrate_samples(const Grid& grid, std::span<const double> f) {
    return integrate_samples(grid, f, grid.size() - 1);
}

/// \int_0^inf |g|^p for finite p: grid quadrature plus the closed-form tail.
/// Without a tail the function must visibly decay at T_max, otherwise
/// Errc::divergent_norm is raised.
double lp_integral(const GridFunction& g, double p, const NormOptions& opts = {});

/// L^p norm on [0, inf).
double lp_norm(const GridFunction& g, Exponent p, const NormOptions& opts = {});

/// L^p norm on [0, t_end]; t_end must be a grid node. Tails are ignored.
double lp_norm_truncated(const GridFunction& g, Exponent p, double t_end,
                         const NormOptions& opts = {});

/// e^{-rate t} on t >= 0 (causal) or e^{rate t} on t < 0 (anticausal).
struct ExpKernel {
    enum class Side { causal, anticausal };
    double rate = 1.0;
    Side side = Side::causal;
};

/// Convolution of the kernel with c restricted to [0, inf):
///   causal:      a(t) = \int_0^t e^{-rate (t-s)} c(s) ds
///   anticausal:  a(t) = \int_t^inf e^{-rate (s-t)} c(s) ds
/// c needs a tail (possibly zero); the result decays at min(rate, tail rate).
GridFunction convolve(const ExpKernel& kernel, const GridFunction& c);

struct YoungReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Compares ||k * c||_p against ||k||_r ||c||_q with tolerance
/// 1e-9 + 1e-7 rhs.
YoungReport young_check(const ExpKernel& kernel, const GridFunction& c, const ConjugateTriple& triple,
                        const NormOptions& opts = {});

}  // namespace hus
