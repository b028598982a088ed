#include "hus/linear_evolution.hpp"

#include "hus/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hus {

LinearSystem LinearSystem::autonomous(Mat a) {
    if (a.rows() != a.cols() || a.rows() == 0) fail(Errc::invalid_argument, "A must be square");
    if (!a.allFinite()) fail(Errc::invalid_argument, "A has non-finite entries");
    LinearSystem sys;
    sys.dim_ = a.rows();
    sys.constant_ = std::move(a);
    return sys;
}

LinearSystem LinearSystem::time_dependent(Eigen::Index dim, MatrixField a) {
    if (dim <= 0 || !a) fail(Errc::invalid_argument, "time-dependent system needs a dimension and a field");
    LinearSystem sys;
    sys.dim_ = dim;
    sys.field_ = std::move(a);
    return sys;
}

const Mat& LinearSystem::matrix() const {
    if (field_) fail(Errc::invalid_argument, "system is time-dependent");
    return constant_;
}

MatrixField LinearSystem::field() const {
    if (field_) return field_;
    return [a = constant_](double) { return a; };
}

double max_vector_norm(const Eigen::Ref<const Vec>& v) { return point_norm(v, PointNorm::max); }

double op_norm_inf(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix2 JordanForm::canonical() const {
    Matrix2 c;
    if (kind == Case::diagonal)
        c << mu1, 0.0, 0.0, mu2;
    else
        c << mu1, 1.0, 0.0, mu1;
    return c;
}

namespace {

// Null vector of the rank-one matrix B, scaled so its largest entry is 1.
Vector2 null_vector(const Matrix2& b) {
    const int row = b.row(0).cwiseAbs().sum() >= b.row(1).cwiseAbs().sum() ? 0 : 1;
    Vector2 v(b(row, 1), -b(row, 0));
    const int pivot = std::abs(v(1)) > std::abs(v(0)) * (1.0 + 1e-12) ? 1 : 0;
    return v / v(pivot);
}

void finish(JordanForm& jf) {
    jf.M_inv = jf.M.inverse();
    jf.conditioning = op_norm_inf(jf.M) * op_norm_inf(jf.M_inv);
    jf.ill_conditioned = jf.conditioning > 1e8;
}

}  // namespace

JordanForm jordan_decompose(const Matrix2& a) {
    if (!a.allFinite()) fail(Errc::invalid_argument, "A has non-finite entries");
    const double norm = op_norm_inf(a);
    if (std::abs(a.determinant()) <= 1e-12 * std::max(1.0, norm * norm))
        fail(Errc::singular_matrix, "A is singular");

    JordanForm jf;
    if (a(0, 1) == 0.0 && a(1, 0) == 0.0) {
        jf.mu1 = a(0, 0);
        jf.mu2 = a(1, 1);
        finish(jf);
        return jf;
    }

    const Complex half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const Complex half_gap = 0.5 * (a(0, 0) - a(1, 1));
    const Complex root = std::sqrt(half_gap * half_gap + a(0, 1) * a(1, 0));
    Complex mu1 = half_trace + root, mu2 = half_trace - root;

    if (std::abs(mu1 - mu2) < 1e-6 * norm) {
        const Complex nu = half_trace;
        const Matrix2 n = a - nu * Matrix2::Identity();
        if (op_norm_inf(n) <= 1e-6 * norm) {
            jf.mu1 = a(0, 0);
            jf.mu2 = a(1, 1);
            finish(jf);
            return jf;
        }
        // v2 = e_j with N e_j != 0, v1 = N v2 spans ker N.
        const int j = n.col(0).cwiseAbs().sum() >= n.col(1).cwiseAbs().sum() ? 0 : 1;
        Vector2 v2 = Vector2::Zero();
        v2(j) = 1.0;
        jf.kind = JordanForm::Case::jordan_block;
        jf.mu1 = jf.mu2 = nu;
        jf.M.col(0) = n * v2;
        jf.M.col(1) = v2;
        finish(jf);
        return jf;
    }

    if (std::abs(mu2 - a(0, 0)) < std::abs(mu1 - a(0, 0))) std::swap(mu1, mu2);
    jf.mu1 = mu1;
    jf.mu2 = mu2;
    jf.M.col(0) = null_vector(a - mu1 * Matrix2::Identity());
    jf.M.col(1) = null_vector(a - mu2 * Matrix2::Identity());
    finish(jf);
    return jf;
}

const char* dichotomy_kind_name(DichotomyKind kind) noexcept {
    switch (kind) {
    case DichotomyKind::contraction: return "contraction";
    case DichotomyKind::expansion: return "expansion";
    case DichotomyKind::general: return "general";
    }
    return "general";
}

DichotomyKind infer_dichotomy_kind(const Mat& p) {
    const Mat id = Mat::Identity(p.rows(), p.cols());
    if (op_norm_inf(p - id) <= 1e-12) return DichotomyKind::contraction;
    if (op_norm_inf(p) <= 1e-12) return DichotomyKind::expansion;
    return DichotomyKind::general;
}

namespace {

double projection_defect(const Mat& p) { return op_norm_inf(p * p - p) / std::max(1.0, op_norm_inf(p)); }

}  // namespace

DichotomySpec DichotomySpec::make(double D, double lambda, Mat P) {
    if (!(D > 0.0) || !(lambda > 0.0)) fail(Errc::invalid_argument, "dichotomy needs D > 0 and lambda > 0");
    if (P.rows() != P.cols()) fail(Errc::invalid_argument, "projection must be square");
    if (projection_defect(P) > 1e-12) fail(Errc::precondition, "P is not a projection (P*P != P)");
    DichotomySpec spec;
    spec.D = D;
    spec.lambda = lambda;
    spec.kind = infer_dichotomy_kind(P);
    spec.P = std::move(P);
    return spec;
}

Mat stable_projection(const Mat& a) {
    const auto d = a.rows();
    const Mat id = Mat::Identity(d, d);
    const double scale = std::max(1.0, op_norm_inf(a));
    const Eigen::ComplexEigenSolver<Mat> eig(a, false);
    for (Eigen::Index i = 0; i < d; ++i)
        if (std::abs(eig.eigenvalues()(i).real()) <= 1e-9 * scale)
            fail(Errc::no_dichotomy, "eigenvalue on the imaginary axis");
    // Newton iteration S <- (S + S^{-1}) / 2 converges to sign(A).
    Mat s = a;
    for (int it = 0; it < 100; ++it) {
        const Mat next = 0.5 * (s + s.partialPivLu().inverse());
        const double change = op_norm_inf(next - s);
        s = next;
        if (change <= 1e-14 * op_norm_inf(s)) break;
    }
    return 0.5 * (id - s);
}

Mat evolution_operator(const LinearSystem& sys, double t, double s) {
    if (t < 0.0 || s < 0.0) fail(Errc::invalid_argument, "evolution operator needs t, s >= 0");
    const auto d = sys.dim();
    if (t == s) return Mat::Identity(d, d);
    if (!sys.is_autonomous()) return integrate_affine(sys.field(), {}, Mat::Identity(d, d), s, t);

    const Mat& a = sys.matrix();
    const double tau = t - s;
    if (d == 1) return Mat::Constant(1, 1, std::exp(a(0, 0) * tau));
    if (d == 2) {
        const Matrix2 a2 = a;
        const double norm = op_norm_inf(a);
        if (std::abs(a2.determinant()) > 1e-12 * std::max(1.0, norm * norm)) {
            const JordanForm jf = jordan_decompose(a2);
            Matrix2 phi;
            if (jf.kind == JordanForm::Case::diagonal) {
                phi << std::exp(jf.mu1 * tau), 0.0, 0.0, std::exp(jf.mu2 * tau);
            } else {
                const Complex e = std::exp(jf.nu() * tau);
                phi << e, e * tau, 0.0, e;
            }
            return jf.M * phi * jf.M_inv;
        }
    }
    return (a * Complex(tau)).exp();
}

std::vector<double> sample_times(double horizon, std::size_t count) {
    if (count < 2 || !(horizon > 0.0)) fail(Errc::invalid_argument, "need at least two samples on a positive horizon");
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i)
        t[i] = horizon * static_cast<double>(i) / static_cast<double>(count - 1);
    return t;
}

namespace {

struct EnvelopeSample {
    double tau;
    double log_norm;
};

struct PairData {
    std::vector<EnvelopeSample> samples;
    double tau_max = 0.0;
    double commutation_defect = 0.0;
};

// All sampled norms ||T(t,s)P|| (t >= s) and ||T(t,s)(I-P)|| (t <= s).
PairData collect_pairs(const LinearSystem& sys, const DichotomySpec& spec, std::span<const double> times) {
    const auto d = sys.dim();
    const Mat id = Mat::Identity(d, d);
    std::vector<Mat> phi;  // T(t_i, 0), only for time-dependent systems
    if (!sys.is_autonomous()) {
        Mat x = id;
        double prev = 0.0;
        for (double t : times) {
            x = integrate_affine(sys.field(), {}, x, prev, t);
            prev = t;
            phi.push_back(x);
        }
    }
    PairData out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double t = times[i], s = times[j];
            const Mat T = sys.is_autonomous() ? evolution_operator(sys, t, s)
                                              : Mat(phi[i] * phi[j].inverse());
            const Mat ps = spec.projection(s), pt = spec.projection(t);
            const double defect = op_norm_inf(T * ps - pt * T) / std::max(1.0, op_norm_inf(T));
            out.commutation_defect = std::max(out.commutation_defect, defect);
            const double tau = std::abs(t - s);
            out.tau_max = std::max(out.tau_max, tau);
            double n = -1.0;
            if (t >= s) {
                n = op_norm_inf(T * ps);
                if (n > 0.0) out.samples.push_back({tau, std::log(n)});
            }
            if (t <= s) {
                n = op_norm_inf(T * (id - ps));
                if (n > 0.0) out.samples.push_back({tau, std::log(n)});
            }
        }
    }
    return out;
}

double log_envelope(const PairData& data, double lambda, double tau_cut) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : data.samples)
        if (s.tau <= tau_cut) best = std::max(best, s.log_norm + lambda * s.tau);
    return best;
}

bool flat_envelope(const PairData& data, double lambda) {
    const double full = log_envelope(data, lambda, data.tau_max);
    const double half = log_envelope(data, lambda, 0.5 * data.tau_max);
    return full <= half + 1e-9;
}

}  // namespace

DichotomySpec fit_dichotomy(const LinearSystem& sys, const Mat& P, std::span<const double> times) {
    if (times.size() < 3) fail(Errc::invalid_argument, "fit_dichotomy needs at least three sample times");
    if (P.rows() != sys.dim() || P.cols() != sys.dim()) fail(Errc::invalid_argument, "projection dimension mismatch");
    if (projection_defect(P) > 1e-12) fail(Errc::precondition, "P is not a projection (P*P != P)");

    DichotomySpec probe;
    probe.P = P;
    const PairData data = collect_pairs(sys, probe, times);
    if (data.commutation_defect > 1e-9)
        fail(Errc::precondition, "T(t,s) P != P T(t,s) on the samples; P is not invariant");
    if (data.samples.empty() || !(data.tau_max > 0.0)) fail(Errc::no_dichotomy, "no usable samples");

    double bound = 0.0;
    if (sys.is_autonomous()) {
        Eigen::ComplexEigenSolver<Mat> eig(sys.matrix(), false);
        for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
            bound = std::max(bound, std::abs(eig.eigenvalues()(i).real()));
    } else {
        for (double t : times) bound = std::max(bound, op_norm_inf(sys.at(t)));
    }
    constexpr double lambda_min = 1e-6;
    constexpr std::size_t candidates = 200;
    const double lambda_max = std::max(1.5 * bound + 1e-3, 10.0 * lambda_min);

    std::optional<std::size_t> best;
    std::vector<double> grid(candidates);
    for (std::size_t i = 0; i < candidates; ++i) {
        grid[i] = lambda_min * std::pow(lambda_max / lambda_min, static_cast<double>(i) / (candidates - 1));
        if (flat_envelope(data, grid[i])) best = i;
    }
    if (!best) fail(Errc::no_dichotomy, "no (D, lambda) with lambda > 1e-6 bounds the sampled evolution");

    double lo = grid[*best];
    if (*best + 1 < candidates) {
        double hi = grid[*best + 1];
        for (int it = 0; it < 80 && hi - lo > 1e-12 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (flat_envelope(data, mid) ? lo : hi) = mid;
        }
    }
    const double D = std::max(1.0, std::exp(log_envelope(data, lo, data.tau_max)));
    DichotomySpec spec = DichotomySpec::make(D, lo, P);
    return spec;
}

DichotomyReport verify_dichotomy(const DichotomySpec& spec, const LinearSystem& sys,
                                 std::span<const double> times) {
    DichotomyReport rep;
    for (double t : times) rep.projection_defect = std::max(rep.projection_defect, projection_defect(spec.projection(t)));
    rep.projection_ok = rep.projection_defect <= 1e-12;
    if (!rep.projection_ok) return rep;

    const PairData data = collect_pairs(sys, spec, times);
    rep.commutation_defect = data.commutation_defect;
    rep.commutation_ok = data.commutation_defect <= 1e-9;
    rep.worst_slack = -std::numeric_limits<double>::infinity();
    for (const auto& s : data.samples) {
        const double lhs = std::exp(s.log_norm);
        const double rhs = spec.D * std::exp(-spec.lambda * s.tau);
        rep.worst_slack = std::max(rep.worst_slack, lhs - rhs);
        if (lhs > rhs * (1.0 + 1e-9) + 1e-12) ++rep.violations;
    }
    if (data.samples.empty()) rep.worst_slack = 0.0;
    return rep;
}

namespace {

std::vector<Mat> projections_on(const DichotomySpec& spec, const Grid& grid) {
    std::vector<Mat> out;
    out.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out.push_back(spec.projection(grid[k]));
    return out;
}

// Interval tables for time-dependent coefficients: integrate the evolution and
// the weighted moments across each interval.
ExponentialStepper integrated_stepper(const LinearSystem& sys, const GridPtr& grid, StepDirection dir,
                                      OdeTolerance tol) {
    const auto d = sys.dim();
    const auto field = sys.field();
    const std::size_t intervals = grid->size() - 1;
    std::vector<Stencil> stencils(intervals);
    std::vector<std::shared_ptr<const StepWeights>> steps(intervals);
    for (std::size_t k = 0; k < intervals; ++k) {
        const Stencil s = interval_stencil(*grid, k, dir);
        const auto off = stencil_offsets(*grid, s, dir);
        const int n = s.count;
        const double origin = (*grid)[s.nodes[0]];
        const double target = (*grid)[s.nodes[1]];
        const double h = off[1];
        const double sign = dir == StepDirection::forward ? 1.0 : -1.0;

        // Forward:  X(t_k) = I, U_m(t_k) = 0, U_m' = A U_m + ((t - t_k)/h)^m I.
        // Backward: X(t_{k+1}) = I, Y_m' = A Y_m - ((t_{k+1} - t)/h)^m I.
        MatrixField forcing = [=](double t) {
            Mat f = Mat::Zero(d, (n + 1) * d);
            const double x = sign * (t - origin) / h;
            double pw = 1.0;
            for (int m = 0; m < n; ++m, pw *= x)
                f.block(0, (m + 1) * d, d, d) = Mat::Identity(d, d) * (sign * pw);
            return f;
        };
        Mat x0 = Mat::Zero(d, (n + 1) * d);
        x0.leftCols(d).setIdentity();
        const Mat x1 = integrate_affine(field, forcing, x0, origin, target, tol);

        auto w = std::make_shared<StepWeights>();
        w->count = n;
        w->propagator = x1.leftCols(d);
        const Eigen::MatrixXd coeffs = lagrange_monomials(std::span<const double>(off.data(), static_cast<std::size_t>(n)), h);
        for (int j = 0; j < n; ++j) {
            Mat acc = Mat::Zero(d, d);
            for (int m = 0; m < n; ++m) acc += coeffs(m, j) * x1.block(0, (m + 1) * d, d, d);
            w->weights[static_cast<std::size_t>(j)] = acc;
        }
        stencils[k] = s;
        steps[k] = std::move(w);
    }
    return ExponentialStepper(grid, dir, std::move(stencils), std::move(steps));
}

ExponentialStepper make_stepper(const LinearSystem& sys, const DichotomySpec& spec, const GridPtr& grid,
                                StepDirection dir, OdeTolerance tol) {
    if (!sys.is_autonomous() || spec.projection_at) return integrated_stepper(sys, grid, dir, tol);
    const Mat& a = sys.matrix();
    const Mat id = Mat::Identity(a.rows(), a.cols());
    if (dir == StepDirection::forward) return ExponentialStepper(a * spec.P, grid, dir);
    return ExponentialStepper(-a * (id - spec.P), grid, dir);
}

}  // namespace

SplitPropagator::SplitPropagator(const LinearSystem& sys, const DichotomySpec& spec, GridPtr grid,
                                 OdeTolerance tol)
    : grid_(std::move(grid)),
      spec_(spec),
      a_end_(sys.at(grid_->t_max())),
      proj_(projections_on(spec, *grid_)),
      forward_(make_stepper(sys, spec, grid_, StepDirection::forward, tol)),
      backward_(make_stepper(sys, spec, grid_, StepDirection::backward, tol)) {
    if (spec.dim() != sys.dim()) fail(Errc::invalid_argument, "dichotomy dimension mismatch");
}

Mat SplitPropagator::stable(const Mat& g) const {
    const auto n = static_cast<Eigen::Index>(grid_->size());
    Mat u = Mat::Zero(g.rows(), n);
    if (spec_.kind == DichotomyKind::expansion) return u;
    for (std::size_t k = 0; k + 1 < grid_->size(); ++k) {
        const auto& w = forward_.step(k);
        const auto& s = forward_.stencil(k);
        Vec next = w.propagator * u.col(static_cast<Eigen::Index>(k));
        for (int j = 0; j < w.count; ++j) {
            const auto node = s.nodes[static_cast<std::size_t>(j)];
            next += w.weights[static_cast<std::size_t>(j)] * (proj_[node] * g.col(static_cast<Eigen::Index>(node)));
        }
        u.col(static_cast<Eigen::Index>(k + 1)) = proj_[k + 1] * next;
    }
    return u;
}

Mat SplitPropagator::unstable(const Mat& g, const std::optional<ExpTail>& tail) const {
    const std::size_t n = grid_->size();
    const auto d = g.rows();
    const Mat id = Mat::Identity(d, d);
    Mat v = Mat::Zero(d, static_cast<Eigen::Index>(n));
    if (spec_.kind == DichotomyKind::contraction) return v;

    const Mat q_end = id - proj_[n - 1];
    if (tail) {
        if (!tail->is_zero()) {
            // \int_T^inf e^{-A(s-T)} (I-P) c e^{-rho(s-T)} ds = (A(I-P) + rho)^{-1} (I-P) c
            const Mat m = a_end_ * q_end + tail->rate * id;
            v.col(static_cast<Eigen::Index>(n - 1)) = q_end * m.partialPivLu().solve(q_end * tail->coefficient);
        }
    } else {
        const double end = point_norm(g.col(static_cast<Eigen::Index>(n - 1)));
        if (!(end == 0.0 || end <= 1e-14 * g.cwiseAbs().maxCoeff()))
            fail(Errc::divergent_norm, "integrand has no tail and does not vanish at T_max");
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        const auto& w = backward_.step(k);
        const auto& s = backward_.stencil(k);
        Vec prev = w.propagator * v.col(static_cast<Eigen::Index>(k + 1));
        for (int j = 0; j < w.count; ++j) {
            const auto node = s.nodes[static_cast<std::size_t>(j)];
            prev += w.weights[static_cast<std::size_t>(j)] * ((id - proj_[node]) * g.col(static_cast<Eigen::Index>(node)));
        }
        v.col(static_cast<Eigen::Index>(k)) = (id - proj_[k]) * prev;
    }
    return v;
}

}  // namespace hus
