#pragma once

#include "hus/exponent.hpp"
#include "hus/grid_function.hpp"
#include "hus/linear_evolution.hpp"
#include "hus/norms.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hus {

using Nonlinearity = std::function<Vec(double, const Vec&)>;

/// x' = A(t) x + f(t, x) with |f(t,u) - f(t,v)| <= c |u - v|.
struct SemilinearProblem {
    LinearSystem linear = LinearSystem::autonomous(Mat::Identity(1, 1));
    Nonlinearity f;  // empty: f == 0
    double lipschitz = 0.0;
    DichotomySpec dichotomy;

    /// Validates the smallness condition for the dichotomy kind and samples
    /// f on random pairs to confirm the declared Lipschitz constant.
    static SemilinearProblem make(LinearSystem linear, Nonlinearity f, double c, DichotomySpec dichotomy,
                                  std::uint64_t seed = 0x5eed);

    Vec eval_f(double t, const Vec& x) const;
    double kappa() const;
};

/// Approximate solution y together with y'. Without a supplied derivative
/// one is formed by finite differences and the certificate says so.
struct PseudoSolution {
    GridFunction y;
    std::optional<GridFunction> derivative;
    std::optional<double> epsilon;  // declared residual bound in L^q
};

/// Second-order derivative of the quadratic interpolant at every node.
GridFunction finite_difference_derivative(const GridFunction& y);

/// w = y' - A y - f(t, y). The tail follows y's decay rate.
GridFunction residual(const PseudoSolution& y, const SemilinearProblem& prob);

struct SolveOptions {
    double tol = 1e-10;       // target L^p error of the fixed point
    int max_iter = 200;
    double cert_atol = 1e-9;  // deviation <= L eps + atol + rtol L eps
    double cert_rtol = 1e-7;
    double residual_tol = 1e-6;  // ODE defect of x, relative to max(1, sup|w|)
    NormOptions norm;
    OdeTolerance ode;
};

/// The shadowing operator z -> T1 z + T2 z built around a pseudosolution:
///   (T1 z)(t) =  \int_0^t    T(t,s) P     g_z(s) ds
///   (T2 z)(t) = -\int_t^inf  T(t,s) (I-P) g_z(s) ds
///   g_z = A y + f(., y + z) - y'.
class ShadowingOperator {
public:
    ShadowingOperator(const SemilinearProblem& prob, const PseudoSolution& y, const SolveOptions& opts = {});

    const GridFunction& residual() const noexcept { return residual_; }
    bool derivative_from_finite_differences() const noexcept { return fd_derivative_; }
    double kappa() const noexcept { return prob_.kappa(); }

    GridFunction T1(const GridFunction& z) const;
    GridFunction T2(const GridFunction& z) const;
    GridFunction apply(const GridFunction& z) const;

private:
    struct Integrand {
        Mat values;
        std::optional<ExpTail> tail;
    };
    Integrand integrand(const GridFunction& z) const;
    GridFunction stable_part(const Integrand& g) const;
    GridFunction unstable_part(const Integrand& g) const;

    SemilinearProblem prob_;
    GridFunction y_;
    GridFunction residual_;
    bool fd_derivative_ = false;
    SplitPropagator propagator_;
};

GridFunction apply_T1(const GridFunction& z, const PseudoSolution& y, const SemilinearProblem& prob);
GridFunction apply_T2(const GridFunction& z, const PseudoSolution& y, const SemilinearProblem& prob);

struct HusCertificate {
    ConjugateTriple triple;
    double epsilon = 0.0;        // bound used for the certificate
    double residual_norm = 0.0;  // measured ||w||_q
    double L = 0.0;
    double deviation = 0.0;  // ||x - y||_p
    double kappa = 0.0;
    int iterations = 0;
    double final_update = 0.0;
    std::vector<double> update_norms;
    double observed_rate = 0.0;  // max ratio of consecutive updates above the noise floor
    double residual_check = 0.0; // max ODE defect of x
    bool residual_ok = false;
    bool bound_ok = false;
    bool converged = false;
    bool finite_difference_derivative = false;
};

struct ShadowingResult {
    GridFunction x;
    GridFunction z;
    HusCertificate certificate;
};

/// Picard iteration z_{k+1} = T z_k from z_0 = 0 until the a-posteriori bound
/// kappa/(1-kappa) ||z_{k+1} - z_k|| drops below tol. Throws
/// Errc::no_convergence or Errc::certificate_failure.
ShadowingResult picard_solve(const PseudoSolution& y, const SemilinearProblem& prob, const ConjugateTriple& triple,
                             const SolveOptions& opts = {});

/// Max over interior nodes of |x_{k+1} - x_{k-1} - \int (A x + f(t,x))| / (t_{k+1} - t_{k-1}),
/// the integral taken over the quadratic interpolant.
double ode_defect(const GridFunction& x, const SemilinearProblem& prob);

struct UniquenessOptions {
    std::vector<Vec> offsets;  // empty: 0.1 along each coordinate
    double horizon = 10.0;
    double factor = 10.0;
    OdeTolerance ode;
};

/// Expansion case only: every solution starting at x(0) + offset must leave
/// y at the expansion rate, its truncated L^p distance to y growing past
/// factor * deviation by the horizon.
bool uniqueness_probe(const SemilinearProblem& prob, const PseudoSolution& y, const GridFunction& x,
                      const ConjugateTriple& triple, double deviation, const UniquenessOptions& opts = {});

}  // namespace hus
