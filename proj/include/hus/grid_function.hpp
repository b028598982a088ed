#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace hus {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

enum class PointNorm { max, euclidean };

/// Pointwise norm on C^d. The max norm is the default everywhere.
double point_norm(const Eigen::Ref<const Vec>& v, PointNorm kind = PointNorm::max);

/// Sample times 0 = t_0 < ... < t_N = T_max. Kinks mark nodes where functions
/// sampled on this grid may lose smoothness; interpolation stencils and
/// quadrature segments never straddle them.
class Grid {
public:
    static std::shared_ptr<const Grid> uniform(double t_max, std::size_t intervals);
    static std::shared_ptr<const Grid> from_times(std::vector<double> times,
                                                  std::vector<std::size_t> kinks = {});

    std::size_t size() const noexcept { return times_.size(); }
    double operator[](std::size_t k) const noexcept { return times_[k]; }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<std::size_t>& kinks() const noexcept { return kinks_; }
    double t_max() const noexcept { return times_.back(); }
    bool is_uniform() const noexcept { return uniform_; }
    bool is_kink(std::size_t k) const;
    /// Index of the node equal to t (relative tolerance 1e-12), if any.
    std::optional<std::size_t> find_node(double t) const;

private:
    Grid() = default;
    std::vector<double> times_;
    std::vector<std::size_t> kinks_;
    bool uniform_ = false;
};

using GridPtr = std::shared_ptr<const Grid>;

/// g(t) = coefficient * exp(-rate (t - T_max)) beyond the grid. A zero
/// coefficient encodes a function that vanishes past T_max.
struct ExpTail {
    Vec coefficient;
    double rate = 1.0;

    bool is_zero() const { return coefficient.isZero(0.0); }
};

/// Vector-valued samples on a Grid, column k holding g(t_k), with an
/// optional analytic tail.
class GridFunction {
public:
    GridFunction(GridPtr grid, Mat values, std::optional<ExpTail> tail = std::nullopt);

    /// Zero function carrying a zero tail.
    static GridFunction zeros(GridPtr grid, Eigen::Index dim);

    template <typename F>
    static GridFunction sample(GridPtr grid, Eigen::Index dim, F&& fn,
                               std::optional<ExpTail> tail = std::nullopt) {
        Mat values(dim, static_cast<Eigen::Index>(grid->size()));
        for (std::size_t k = 0; k < grid->size(); ++k)
            values.col(static_cast<Eigen::Index>(k)) = fn((*grid)[k]);
        return GridFunction(std::move(grid), std::move(values), std::move(tail));
    }

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    Eigen::Index dim() const noexcept { return values_.rows(); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    const Mat& values() const noexcept { return values_; }
    Mat& values() noexcept { return values_; }
    auto at(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }
    auto at(std::size_t k) { return values_.col(static_cast<Eigen::Index>(k)); }

    const std::optional<ExpTail>& tail() const noexcept { return tail_; }
    void set_tail(std::optional<ExpTail> tail);

    /// All imaginary parts are exactly zero (tail included).
    bool is_real() const;

    /// Scalar function t -> |g(t)|, tail |v| e^{-rate(t-T)}.
    GridFunction pointwise_norm(PointNorm kind = PointNorm::max) const;
    double sup_norm(PointNorm kind = PointNorm::max) const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(Complex alpha);

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(Complex alpha, GridFunction g) { return g *= alpha; }

private:
    void check_compatible(const GridFunction& other) const;

    GridPtr grid_;
    Mat values_;
    std::optional<ExpTail> tail_;
};

/// Sum of two tails; the rate is the slower of the two. Absent tails
/// dominate: the result is absent if either input is.
std::optional<ExpTail> combine_tails(const std::optional<ExpTail>& a, Complex alpha,
                                     const std::optional<ExpTail>& b, Complex beta);

}  // namespace hus
