#include "hus/error.hpp"
#include "hus/scenarios.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace hus;
using Catch::Approx;

namespace {

template <typename F>
Errc error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no throw");
    return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("scenario names") {
    CHECK(scenario_names().size() == 5);
}

TEST_CASE("sine scenario") {
    SECTION("defaults") {
        const auto rep = scenario_sine({});
        CHECK(rep.passed());
        CHECK(rep.quantity("L") == Approx(4.0 / 3.0).epsilon(1e-14));
        CHECK(rep.quantity("deviation") <= rep.quantity("L") * rep.quantity("epsilon"));
        CHECK(rep.quantity("observed_rate") <= 0.26);
        CHECK(rep.certificate);
        CHECK(rep.trajectory);
    }
    SECTION("linear case in the sup norm") {
        SineParams prm;
        prm.b = 0.0;
        prm.p = prm.q = Exponent::infinity();
        const auto rep = scenario_sine(prm);
        CHECK(rep.passed());
        CHECK(rep.quantity("L") == 1.0);
        CHECK(rep.quantity("deviation") == Approx(0.5).margin(1e-6));
    }
    SECTION("smallness violated") {
        SineParams prm;
        prm.b = 1.5;
        const auto code = error_of([&] { scenario_sine(prm); });
        CHECK((code == Errc::smallness_violation || code == Errc::precondition));
    }
    SECTION("missing quantity") {
        CHECK(error_of([] { scenario_sine({}).quantity("nope"); }) == Errc::invalid_argument);
    }
}

TEST_CASE("sharpness scenario") {
    const auto rep = scenario_sharpness({});
    CHECK(rep.passed());
    CHECK(rep.quantity("ratio") == Approx(0.5).margin(1e-4));
    CHECK(rep.quantity("epsilon") == Approx(std::sqrt(0.5)).margin(1e-4));
    CHECK(rep.quantity("sup_x") <= 1e-6);
    CHECK(rep.quantity("sup_ratio") >= 0.99);

    // With a = 1 the ratio at gamma is 1/(1 + gamma).
    int seen = 0;
    for (const auto& [key, v] : rep.quantities) {
        if (key.rfind("ratio_at_gamma_", 0) != 0) continue;
        const double g = std::stod(key.substr(15));
        CHECK(v == Approx(1.0 / (1.0 + g)).margin(1e-3));
        ++seen;
    }
    CHECK(seen == 7);

    SharpnessParams doubled;
    doubled.amplitude = 2.0;
    doubled.gamma_grid = {};
    const auto rep2 = scenario_sharpness(doubled);
    CHECK(rep2.quantity("deviation") == Approx(2.0 * rep.quantity("deviation")).epsilon(1e-9));
    CHECK(rep2.quantity("ratio") == Approx(rep.quantity("ratio")).epsilon(1e-9));
}

TEST_CASE("pq counterexample") {
    const auto rep = scenario_pq_counterexample({});
    CHECK(rep.passed());
    CHECK(rep.quantity("growth_ratio") >= 10.0);
    CHECK(rep.quantity("residual_norm") == Approx(rep.quantity("residual_closed_form")).epsilon(1e-6));

    PqParams bad;
    bad.delta = 5.0;
    CHECK(error_of([&] { scenario_pq_counterexample(bad); }) == Errc::precondition);
}

TEST_CASE("2d minimal scenario") {
    const auto rep = scenario_2d_minimal({});
    CHECK(rep.passed());
    CHECK(rep.quantity("upper") == Approx(1.0));
    CHECK(rep.quantity("lower") >= 0.999 * rep.quantity("upper"));

    Minimal2dParams eq;
    eq.mu1 = eq.mu2 = 2.0;
    const auto r2 = scenario_2d_minimal(eq);
    CHECK(r2.quantity("upper") == Approx(0.5));
    CHECK(r2.quantity("lower") == Approx(0.5).epsilon(1e-3));

    Minimal2dParams saddle;
    saddle.mu2 = -1.0;
    CHECK(error_of([&] { scenario_2d_minimal(saddle); }) == Errc::not_expansion);
}

TEST_CASE("unbounded residual scenario") {
    const auto rep = scenario_unbounded_residual({});
    CHECK(rep.passed());
    CHECK(rep.quantity("residual_sup") >= 10.0 - 1e-9);
    CHECK(rep.quantity("deviation") <= rep.quantity("L") * rep.quantity("epsilon") + 1e-6);

    UnboundedParams inf;
    inf.q = Exponent::infinity();
    inf.p = Exponent::infinity();
    CHECK(error_of([&] { scenario_unbounded_residual(inf); }) == Errc::precondition);
}
