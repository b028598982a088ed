#pragma once

// Product integration against matrix exponentials. Integrands are replaced by
// their piecewise quadratic Lagrange interpolant on each grid interval and the
// exponential factor is integrated exactly, so stiff decay rates never limit
// the step size.

#include "hus/grid_function.hpp"

#include <array>
#include <span>

namespace hus {

/// Nodes interpolating on [t_k, t_{k+1}]: always k and k+1, plus k+2 (or k-1)
/// when that does not cross a kink.
struct Stencil {
    std::array<std::size_t, 3> nodes{};
    int count = 2;
};

/// Forward steps march t_k -> t_{k+1}; backward steps march t_{k+1} -> t_k.
enum class StepDirection { forward, backward };

/// Stencil for interval k. The first node is the step origin (k forward,
/// k+1 backward), the second the step target.
Stencil interval_stencil(const Grid& grid, std::size_t k, StepDirection dir = StepDirection::forward);

/// Distances of the stencil nodes from the step origin, measured along the
/// marching direction.
std::array<double, 3> stencil_offsets(const Grid& grid, const Stencil& s, StepDirection dir);

/// propagator = exp(G h); weights[j] = \int_0^h exp(G (h - tau)) l_j(tau) dtau,
/// where l_j is the Lagrange basis on `offsets` (offsets[0] = 0, offsets[1] = h).
struct StepWeights {
    Mat propagator;
    std::array<Mat, 3> weights;
    int count = 0;
};

StepWeights exponential_step_weights(const Mat& generator, double h,
                                     std::span<const double> offsets);

/// Monomial coefficients of the Lagrange basis in the scaled variable tau/h:
/// column j holds l_j.
Eigen::MatrixXd lagrange_monomials(std::span<const double> offsets, double h);

/// Precomputed per-interval weights for a constant generator on a grid.
/// Forward:  u_{k+1} = E u_k + sum_j W_j g(nodes_j) advances
///           u(t) = \int_0^t exp(G (t - s)) g(s) ds.
/// Backward: v_k = E v_{k+1} + sum_j W_j g(nodes_j) advances
///           v(t) = \int_t^inf exp(G (s - t)) g(s) ds.
/// Equal step shapes share one exponential.
class ExponentialStepper {
public:
    ExponentialStepper(const Mat& generator, GridPtr grid, StepDirection dir = StepDirection::forward);
    /// Tables computed elsewhere (e.g. by integrating a time-dependent system).
    ExponentialStepper(GridPtr grid, StepDirection dir, std::vector<Stencil> stencils,
                       std::vector<std::shared_ptr<const StepWeights>> steps);

    StepDirection direction() const noexcept { return dir_; }
    const Grid& grid() const noexcept { return *grid_; }
    const StepWeights& step(std::size_t k) const { return *steps_[k]; }
    const Stencil& stencil(std::size_t k) const { return stencils_[k]; }

private:
    GridPtr grid_;
    StepDirection dir_;
    std::vector<Stencil> stencils_;
    std::vector<std::shared_ptr<const StepWeights>> steps_;
};

}  // namespace hus
