#include "hus/error.hpp"
#include "hus/serialize.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace hus;

namespace {

GridFunction random_function(std::mt19937_64& rng, bool complex, bool tail) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> times{0.0};
    for (int k = 0; k < 40; ++k) times.push_back(times.back() + std::exp(u(rng) / 5.0));
    auto grid = Grid::from_times(times, {7, 20});
    Mat m(2, static_cast<Eigen::Index>(times.size()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < 2; ++i) m(i, j) = Complex(u(rng) * 1e-3, complex ? u(rng) : 0.0);
    std::optional<ExpTail> t;
    if (tail) t = ExpTail{m.col(m.cols() - 1), 0.37 + std::abs(u(rng))};
    return GridFunction(grid, m, t);
}

void check_same(const GridFunction& a, const GridFunction& b) {
    REQUIRE(a.size() == b.size());
    REQUIRE(a.dim() == b.dim());
    CHECK(a.grid().times() == b.grid().times());
    CHECK(a.grid().kinks() == b.grid().kinks());
    const double scale = a.values().cwiseAbs().maxCoeff();
    CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() <= 1e-15 * scale);
    REQUIRE(a.tail().has_value() == b.tail().has_value());
    if (a.tail()) {
        CHECK(a.tail()->rate == b.tail()->rate);
        CHECK(a.tail()->coefficient == b.tail()->coefficient);
    }
}

}  // namespace

TEST_CASE("numbers and exponents") {
    CHECK(json_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(json_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(json_number(std::nan("")) == "nan");
    CHECK(number_from_json(Json("inf")) == std::numeric_limits<double>::infinity());
    CHECK(std::isnan(number_from_json(Json("nan"))));
    CHECK(number_from_json(Json(2.5)) == 2.5);
    CHECK(exponent_from_json(exponent_to_json(Exponent::infinity())) == Exponent::infinity());
    CHECK(exponent_from_json(Json(1.5)) == Exponent::finite(1.5));
    CHECK(exponent_from_json(Json("inf")).is_infinite());
}

TEST_CASE("complex and matrix values") {
    CHECK(complex_to_json(Complex(2.0, 0.0)) == Json(2.0));
    CHECK(complex_to_json(Complex(2.0, -1.0)) == Json::array({2.0, -1.0}));
    CHECK(complex_from_json(Json::array({1.0, 3.0})) == Complex(1.0, 3.0));
    Mat m(2, 3);
    m << Complex(1, 2), 3, 4, 5, Complex(0, -6), 7;
    CHECK(matrix_from_json(matrix_to_json(m)) == m);
    Vec v(3);
    v << 1, Complex(2, 1), -3;
    CHECK(vector_from_json(vector_to_json(v)) == v);
}

TEST_CASE("grid function round trips") {
    std::mt19937_64 rng(5);
    for (bool complex : {false, true}) {
        for (bool tail : {false, true}) {
            const auto g = random_function(rng, complex, tail);
            check_same(g, grid_function_from_json(Json::parse(grid_function_to_json(g).dump())));
            check_same(g, grid_function_from_csv(grid_function_to_csv(g)));
        }
    }
}

TEST_CASE("csv layout") {
    const auto grid = Grid::uniform(1.0, 2);
    const GridFunction g(grid, Mat::Ones(1, 3), ExpTail{Vec::Ones(1), 2.0});
    const auto csv = grid_function_to_csv(g);
    CHECK(csv.rfind("# tail,2,", 0) == 0);
    CHECK(csv.find("t,kink,re_0,im_0") != std::string::npos);
}

TEST_CASE("malformed grid function input") {
    Json j = grid_function_to_json(GridFunction::zeros(Grid::uniform(1.0, 4), 1));
    j["re"] = Json::array({Json::array({1.0, 2.0})});
    CHECK_THROWS_AS(grid_function_from_json(j), Error);
    CHECK_THROWS_AS(grid_function_from_csv("t,kink,re_0,im_0\n0,0,abc,0\n"), Error);
}
