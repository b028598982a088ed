#include "hus/product_integration.hpp"

#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace hus;

namespace {

// Composite Simpson with many panels as the reference for
// \int_0^h exp(G (h - tau)) l(tau) dtau.
Mat reference_weight(const Mat& G, double h, const std::function<double(double)>& l) {
    const int panels = 2000;
    const double dt = h / panels;
    Mat acc = Mat::Zero(G.rows(), G.cols());
    for (int i = 0; i <= panels; ++i) {
        const double tau = i * dt;
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * l(tau) * (G * (h - tau)).exp();
    }
    return acc * dt / 3.0;
}

}  // namespace

TEST_CASE("step weights match quadrature of the Lagrange basis") {
    Mat G(2, 2);
    G << Complex(-1.0, 0.5), 2.0, 0.0, Complex(-3.0, -1.0);
    const double h = 0.3;
    const std::array<double, 3> offsets{0.0, h, 2.0 * h};
    const auto w = exponential_step_weights(G, h, offsets);
    REQUIRE(w.count == 3);
    CHECK((w.propagator - (G * h).exp()).norm() < 1e-13);
    const std::function<double(double)> basis[3] = {
        [&](double t) { return (t - offsets[1]) * (t - offsets[2]) / ((offsets[0] - offsets[1]) * (offsets[0] - offsets[2])); },
        [&](double t) { return (t - offsets[0]) * (t - offsets[2]) / ((offsets[1] - offsets[0]) * (offsets[1] - offsets[2])); },
        [&](double t) { return (t - offsets[0]) * (t - offsets[1]) / ((offsets[2] - offsets[0]) * (offsets[2] - offsets[1])); }};
    for (int j = 0; j < 3; ++j) CHECK((w.weights[static_cast<std::size_t>(j)] - reference_weight(G, h, basis[j])).norm() < 1e-10);
}

TEST_CASE("stencils never straddle kinks") {
    const auto grid = Grid::from_times({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {2, 3});
    for (std::size_t k = 0; k + 1 < grid->size(); ++k)
        for (auto dir : {StepDirection::forward, StepDirection::backward}) {
            const auto s = interval_stencil(*grid, k, dir);
            std::size_t lo = k, hi = k + 1;
            for (int j = 0; j < s.count; ++j) {
                lo = std::min(lo, s.nodes[static_cast<std::size_t>(j)]);
                hi = std::max(hi, s.nodes[static_cast<std::size_t>(j)]);
            }
            for (std::size_t m = lo + 1; m < hi; ++m) CHECK_FALSE(grid->is_kink(m));
        }
    // Interval [t2, t3] sits between two kinks: linear interpolation only.
    CHECK(interval_stencil(*grid, 2).count == 2);
}

TEST_CASE("forward stepper integrates quadratics exactly") {
    const double a = -1.7;
    const auto grid = Grid::uniform(3.0, 30);
    const ExponentialStepper st(Mat::Constant(1, 1, a), grid, StepDirection::forward);
    auto g = [](double t) { return 1.0 + 2.0 * t - 0.5 * t * t; };
    // u' = a u + g with u(0) = 0, g quadratic.
    auto exact = [&](double t) {
        // particular solution u_p = c0 + c1 t + c2 t^2
        const double c2 = 0.5 / a;                 // from -a c2 = -0.5
        const double c1 = (2.0 * c2 - 2.0) / a;    // 2 c2 = a c1 + 2
        const double c0 = (c1 - 1.0) / a;          // c1 = a c0 + 1
        return c0 + c1 * t + c2 * t * t - c0 * std::exp(a * t);
    };
    Complex u = 0.0;
    double err = 0.0;
    for (std::size_t k = 0; k + 1 < grid->size(); ++k) {
        const auto& w = st.step(k);
        const auto& s = st.stencil(k);
        Complex next = w.propagator(0, 0) * u;
        for (int j = 0; j < w.count; ++j) next += w.weights[static_cast<std::size_t>(j)](0, 0) * g((*grid)[s.nodes[static_cast<std::size_t>(j)]]);
        u = next;
        err = std::max(err, std::abs(u - exact((*grid)[k + 1])));
    }
    CHECK(err < 1e-12);
}
