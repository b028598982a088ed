#pragma once

#include "hus/exponent.hpp"
#include "hus/grid_function.hpp"
#include "hus/hus_bounds.hpp"
#include "hus/shadowing.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hus {

struct Assertion {
    enum class Relation { approx, at_most, at_least };

    std::string name;
    Relation relation = Relation::approx;
    double expected = 0.0;
    double computed = 0.0;
    double tolerance = 0.0;
    bool passed = false;

    static Assertion check(std::string name, Relation rel, double expected, double computed, double tolerance);
};

const char* relation_name(Assertion::Relation rel) noexcept;

struct ScenarioReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::pair<std::string, double>> quantities;
    std::vector<Assertion> assertions;
    std::vector<std::string> notes;
    std::optional<HusCertificate> certificate;
    std::optional<GridFunction> trajectory;  // x - y, or the scenario's main curve

    bool passed() const;
    /// Value of a named quantity; throws if missing.
    double quantity(const std::string& key) const;
};

struct SineParams {
    double a = 1.0;
    double b = 0.25;
    double gamma = 1.0;
    Exponent p = Exponent::finite(2.0);
    Exponent q = Exponent::finite(2.0);
    double t_max = 25.0;
    std::size_t intervals = 2500;
};

struct SharpnessParams {
    double a = 1.0;
    double gamma = 1.0;
    Exponent p = Exponent::finite(2.0);
    double amplitude = 1.0;
    double t_max = 25.0;
    std::size_t intervals = 2500;
    std::vector<double> gamma_grid = {1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001};
};

struct PqParams {
    Exponent p = Exponent::finite(1.0);
    Exponent q = Exponent::finite(4.0);
    double delta = 2.0;
    double z0 = 0.0;
    double t_mid = 1e2;
    double t_end = 1e4;
    std::size_t intervals_per_decade = 600;
};

struct Minimal2dParams {
    double mu1 = 1.0;
    double mu2 = 3.0;
    Exponent p = Exponent::infinity();
    double gamma_min = 1e-3;
    double gamma_max = 1e2;
    double min_ratio = 0.99;
};

struct UnboundedParams {
    double a = 1.0;
    Exponent p = Exponent::finite(2.0);
    Exponent q = Exponent::finite(2.0);
    std::size_t spikes = 10;
    double h = 0.05;
};

/// Pseudosolution of x' = a x + b sin x: the decaying solution of the same
/// equation forced by amplitude * e^{-gamma t}, integrated backward from t_max.
PseudoSolution sine_pseudosolution(double a, double b, double gamma, double amplitude, GridPtr grid);

ScenarioReport scenario_sine(const SineParams& params);
ScenarioReport scenario_sharpness(const SharpnessParams& params);
ScenarioReport scenario_pq_counterexample(const PqParams& params);
ScenarioReport scenario_2d_minimal(const Minimal2dParams& params);
ScenarioReport scenario_unbounded_residual(const UnboundedParams& params);

std::vector<std::string> scenario_names();

}  // namespace hus
