#pragma once

#include "hus/grid_function.hpp"

#include <functional>

namespace hus {

struct OdeTolerance {
    double relative = 1e-10;
    double absolute = 1e-12;
};

using MatrixField = std::function<Mat(double)>;
using VectorField = std::function<Vec(double, const Vec&)>;

/// Integrates X' = A(t) X + F(t) from t0 to t1 (t1 < t0 runs backward).
/// X is d x m complex; F may be empty (homogeneous).
Mat integrate_affine(const MatrixField& A, const MatrixField& forcing, Mat x0, double t0, double t1,
                     OdeTolerance tol = {});

/// Integrates x' = F(t, x) from t0 to t1 with adaptive Dormand-Prince steps.
Vec integrate_vector(const VectorField& rhs, Vec x0, double t0, double t1, OdeTolerance tol = {});

}  // namespace hus
