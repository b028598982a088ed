#include "hus/product_integration.hpp"

#include "hus/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <utility>

namespace hus {

Stencil interval_stencil(const Grid& grid, std::size_t k, StepDirection dir) {
    Stencil s;
    s.count = 2;
    std::size_t third = 0;
    const std::size_t n = grid.size();
    if (k + 2 < n && !grid.is_kink(k + 1)) {
        third = k + 2;
        s.count = 3;
    } else if (k >= 1 && !grid.is_kink(k)) {
        third = k - 1;
        s.count = 3;
    }
    if (dir == StepDirection::forward)
        s.nodes = {k, k + 1, third};
    else
        s.nodes = {k + 1, k, third};
    return s;
}

std::array<double, 3> stencil_offsets(const Grid& grid, const Stencil& s, StepDirection dir) {
    std::array<double, 3> off{};
    const double origin = grid[s.nodes[0]];
    for (int j = 0; j < s.count; ++j) {
        const double dt = grid[s.nodes[static_cast<std::size_t>(j)]] - origin;
        off[static_cast<std::size_t>(j)] = dir == StepDirection::forward ? dt : -dt;
    }
    return off;
}

Eigen::MatrixXd lagrange_monomials(std::span<const double> offsets, double h) {
    const auto n = static_cast<Eigen::Index>(offsets.size());
    Eigen::MatrixXd vandermonde(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = offsets[static_cast<std::size_t>(i)] / h;
        double pw = 1.0;
        for (Eigen::Index m = 0; m < n; ++m, pw *= x) vandermonde(i, m) = pw;
    }
    // V c_j = e_j, so the columns of V^{-1} are the basis coefficients.
    return vandermonde.fullPivLu().inverse();
}

StepWeights exponential_step_weights(const Mat& generator, double h,
                                     std::span<const double> offsets) {
    const auto d = generator.rows();
    const auto n = static_cast<Eigen::Index>(offsets.size());
    if (n < 2 || n > 3) fail(Errc::invalid_argument, "stencil must have 2 or 3 nodes");
    if (!(h > 0.0)) fail(Errc::invalid_argument, "step must be positive");

    // Van Loan block matrix: the top block row of exp(C) holds
    // \int_0^1 exp(G h (1 - s)) s^m / m! ds for m = 0..n-1.
    const auto blocks = n + 1;
    Mat c = Mat::Zero(blocks * d, blocks * d);
    c.topLeftCorner(d, d) = generator * h;
    for (Eigen::Index b = 0; b < n; ++b) c.block(b * d, (b + 1) * d, d, d).setIdentity();
    const Mat e = c.exp();

    StepWeights out;
    out.count = static_cast<int>(n);
    out.propagator = e.topLeftCorner(d, d);

    std::vector<Mat> moments;  // \int_0^h exp(G (h - tau)) (tau/h)^m dtau
    double factorial = 1.0;
    for (Eigen::Index m = 0; m < n; ++m) {
        if (m > 0) factorial *= static_cast<double>(m);
        moments.push_back(e.block(0, (m + 1) * d, d, d) * (h * factorial));
    }
    const Eigen::MatrixXd coeffs = lagrange_monomials(offsets, h);
    for (Eigen::Index j = 0; j < n; ++j) {
        Mat w = Mat::Zero(d, d);
        for (Eigen::Index m = 0; m < n; ++m) w += coeffs(m, j) * moments[static_cast<std::size_t>(m)];
        out.weights[static_cast<std::size_t>(j)] = std::move(w);
    }
    return out;
}

namespace {

// Step shapes agreeing to ~12 significant digits share weights.
double shape_key(double x) {
    if (x == 0.0) return 0.0;
    const double scale = std::pow(10.0, std::floor(std::log10(std::abs(x))) - 11.0);
    return std::round(x / scale) * scale;
}

}  // namespace

ExponentialStepper::ExponentialStepper(const Mat& generator, GridPtr grid, StepDirection dir)
    : grid_(std::move(grid)), dir_(dir) {
    const std::size_t intervals = grid_->size() - 1;
    stencils_.resize(intervals);
    steps_.resize(intervals);
    std::map<std::array<double, 3>, std::shared_ptr<const StepWeights>> cache;
    for (std::size_t k = 0; k < intervals; ++k) {
        const Stencil s = interval_stencil(*grid_, k, dir_);
        const auto off = stencil_offsets(*grid_, s, dir_);
        const std::array<double, 3> key{shape_key(off[1]), s.count == 3 ? shape_key(off[2]) : 0.0,
                                        static_cast<double>(s.count)};
        auto it = cache.find(key);
        if (it == cache.end()) {
            auto w = std::make_shared<const StepWeights>(exponential_step_weights(
                generator, off[1], std::span<const double>(off.data(), static_cast<std::size_t>(s.count))));
            it = cache.emplace(key, std::move(w)).first;
        }
        stencils_[k] = s;
        steps_[k] = it->second;
    }
}

ExponentialStepper::ExponentialStepper(GridPtr grid, StepDirection dir, std::vector<Stencil> stencils,
                                       std::vector<std::shared_ptr<const StepWeights>> steps)
    : grid_(std::move(grid)), dir_(dir), stencils_(std::move(stencils)), steps_(std::move(steps)) {
    if (stencils_.size() + 1 != grid_->size() || steps_.size() + 1 != grid_->size())
        fail(Errc::invalid_argument, "step table must have one entry per grid interval");
}

}  // namespace hus
