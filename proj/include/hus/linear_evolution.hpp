#pragma once

#include "hus/grid_function.hpp"
#include "hus/ode.hpp"
#include "hus/product_integration.hpp"

#include <functional>
#include <span>
#include <string>

namespace hus {

/// x' = A(t) x, either with a constant matrix or a callable coefficient.
class LinearSystem {
public:
    static LinearSystem autonomous(Mat a);
    static LinearSystem time_dependent(Eigen::Index dim, MatrixField a);

    Eigen::Index dim() const noexcept { return dim_; }
    bool is_autonomous() const noexcept { return !field_; }
    /// Constant coefficient; throws for time-dependent systems.
    const Mat& matrix() const;
    Mat at(double t) const { return field_ ? field_(t) : constant_; }
    MatrixField field() const;

private:
    Eigen::Index dim_ = 0;
    Mat constant_;
    MatrixField field_;
};

/// max_i |v_i|
double max_vector_norm(const Eigen::Ref<const Vec>& v);
/// Row-sum operator norm induced by the max norm.
double op_norm_inf(const Mat& m);

using Matrix2 = Eigen::Matrix2cd;
using Vector2 = Eigen::Vector2cd;

struct JordanForm {
    enum class Case { diagonal, jordan_block };
    Case kind = Case::diagonal;
    Matrix2 M = Matrix2::Identity();
    Matrix2 M_inv = Matrix2::Identity();
    /// Diagonal case: (mu1, mu2). Jordan block: both equal nu.
    Complex mu1{}, mu2{};
    double conditioning = 1.0;  // ||M||_inf ||M^-1||_inf
    bool ill_conditioned = false;

    Complex nu() const noexcept { return mu1; }
    Matrix2 canonical() const;
};

/// M^{-1} A M = diag(mu1, mu2) or [[nu, 1], [0, nu]]. Requires det A != 0.
JordanForm jordan_decompose(const Matrix2& a);

enum class DichotomyKind { contraction, expansion, general };
const char* dichotomy_kind_name(DichotomyKind kind) noexcept;
DichotomyKind infer_dichotomy_kind(const Mat& projection);

/// Exponential dichotomy data with a constant projection. A time-varying
/// projection may be attached through `projection_at`; it is used as given
/// and never fitted.
struct DichotomySpec {
    double D = 1.0;
    double lambda = 1.0;
    Mat P;
    DichotomyKind kind = DichotomyKind::general;
    MatrixField projection_at;

    static DichotomySpec make(double D, double lambda, Mat P);
    Mat projection(double t) const { return projection_at ? projection_at(t) : P; }
    Eigen::Index dim() const noexcept { return P.rows(); }
};

/// Spectral projection onto the eigenspaces with Re < 0, computed from the
/// matrix sign function. Throws Errc::no_dichotomy for eigenvalues near the
/// imaginary axis.
Mat stable_projection(const Mat& a);

/// T(t, s): closed form through the Jordan form for 2x2 invertible A, matrix
/// exponential otherwise, adaptive integration for time-dependent systems.
Mat evolution_operator(const LinearSystem& sys, double t, double s);

/// Envelope fit of ||T(t,s) P|| <= D e^{-lambda (t-s)} (t >= s) and
/// ||T(t,s)(I-P)|| <= D e^{-lambda (s-t)} (t <= s) over all pairs of sample
/// times. Picks the largest lambda whose envelope stays flat over the sampled
/// horizon, then the smallest D for it.
DichotomySpec fit_dichotomy(const LinearSystem& sys, const Mat& P, std::span<const double> sample_times);

struct DichotomyReport {
    bool projection_ok = true;
    bool commutation_ok = true;
    double projection_defect = 0.0;
    double commutation_defect = 0.0;
    std::size_t violations = 0;
    /// max over sampled pairs of lhs - D e^{-lambda |t-s|}; <= 0 when feasible.
    double worst_slack = 0.0;

    bool ok() const noexcept { return projection_ok && commutation_ok && violations == 0; }
};

DichotomyReport verify_dichotomy(const DichotomySpec& spec, const LinearSystem& sys,
                                 std::span<const double> sample_times);

/// Evenly spaced sample times on [0, horizon].
std::vector<double> sample_times(double horizon, std::size_t count);

/// Product-integration tables for the two halves of the dichotomy on a grid:
///   stable(g)(t_k)   = \int_0^{t_k} T(t_k, s) P g(s) ds
///   unstable(g)(t_k) = \int_{t_k}^inf T(t_k, s) (I - P) g(s) ds
/// Autonomous systems use the projected generators A P and A (I - P), which
/// keep every exponential bounded.
class SplitPropagator {
public:
    SplitPropagator(const LinearSystem& sys, const DichotomySpec& spec, GridPtr grid,
                    OdeTolerance tol = {});

    Mat stable(const Mat& g) const;
    /// `tail` continues g past T_max; the system is frozen at A(T_max) there.
    Mat unstable(const Mat& g, const std::optional<ExpTail>& tail) const;

    const Grid& grid() const noexcept { return *grid_; }

private:
    GridPtr grid_;
    DichotomySpec spec_;
    Mat a_end_;
    std::vector<Mat> proj_;  // P(t_k)
    ExponentialStepper forward_;
    ExponentialStepper backward_;
};

}  // namespace hus
