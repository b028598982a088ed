#include "hus/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <vector>

namespace hus {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

void pack(const Mat& m, State& s) {
    s.resize(static_cast<std::size_t>(2 * m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        s[static_cast<std::size_t>(2 * i)] = m.data()[i].real();
        s[static_cast<std::size_t>(2 * i + 1)] = m.data()[i].imag();
    }
}

void unpack(const State& s, Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = Complex(s[static_cast<std::size_t>(2 * i)], s[static_cast<std::size_t>(2 * i + 1)]);
}

template <typename Rhs>
void run(Rhs rhs, State& x, double t0, double t1, OdeTolerance tol) {
    if (t0 == t1) return;
    const double span = t1 - t0;
    const double dt0 = span / 64.0;
    auto stepper = odeint::make_controlled(tol.absolute, tol.relative, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, rhs, x, t0, t1, dt0);
}

}  // namespace

Mat integrate_affine(const MatrixField& A, const MatrixField& forcing, Mat x0, double t0, double t1,
                     OdeTolerance tol) {
    const auto rows = x0.rows(), cols = x0.cols();
    State x;
    pack(x0, x);
    Mat work(rows, cols);
    auto rhs = [&](const State& s, State& ds, double t) {
        unpack(s, work);
        Mat deriv = A(t) * work;
        if (forcing) deriv += forcing(t);
        pack(deriv, ds);
    };
    run(rhs, x, t0, t1, tol);
    unpack(x, x0);
    return x0;
}

Vec integrate_vector(const VectorField& f, Vec x0, double t0, double t1, OdeTolerance tol) {
    State x;
    pack(x0, x);
    Mat work(x0.size(), 1);
    auto rhs = [&](const State& s, State& ds, double t) {
        unpack(s, work);
        Mat deriv = f(t, work.col(0));
        pack(deriv, ds);
    };
    run(rhs, x, t0, t1, tol);
    Mat out(x0.size(), 1);
    unpack(x, out);
    return out.col(0);
}

}  // namespace hus
