#include "hus/serialize.hpp"

#include "hus/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hus {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void bad(const std::string& what) { fail(Errc::config, what); }

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        bad("not a number: '" + s + "'");
    }
    if (used != s.size()) bad("not a number: '" + s + "'");
    return v;
}

}  // namespace

Json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double number_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    bad("expected a number, got " + j.dump());
}

Json exponent_to_json(const Exponent& e) {
    if (e.is_infinite()) return "inf";
    return e.value();
}

Exponent exponent_from_json(const Json& j) {
    if (j.is_number()) {
        const double v = j.get<double>();
        if (!(v >= 1.0) || !std::isfinite(v)) bad("exponent must be >= 1 or \"inf\", got " + j.dump());
        return Exponent::finite(v);
    }
    if (j.is_string()) return Exponent::parse(j.get<std::string>());
    bad("exponent must be a number or \"inf\", got " + j.dump());
}

Json complex_to_json(Complex z) {
    if (z.imag() == 0.0) return json_number(z.real());
    return Json::array({json_number(z.real()), json_number(z.imag())});
}

Complex complex_from_json(const Json& j) {
    if (j.is_array()) {
        if (j.size() != 2) bad("complex entry must be [re, im], got " + j.dump());
        return {number_from_json(j[0]), number_from_json(j[1])};
    }
    return {number_from_json(j), 0.0};
}

Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) bad("matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) bad("matrix rows must be non-empty arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("matrix rows differ in length");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
    }
    return m;
}

Json vector_to_json(const Vec& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

Vec vector_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) bad("vector must be a non-empty array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
    return v;
}

Json grid_function_to_json(const GridFunction& g) {
    Json out;
    out["times"] = g.grid().times();
    out["kinks"] = g.grid().kinks();
    out["dim"] = g.dim();
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < g.dim(); ++i) {
        Json r = Json::array(), m = Json::array();
        for (Eigen::Index k = 0; k < g.values().cols(); ++k) {
            r.push_back(json_number(g.values()(i, k).real()));
            m.push_back(json_number(g.values()(i, k).imag()));
        }
        re.push_back(std::move(r));
        im.push_back(std::move(m));
    }
    out["re"] = std::move(re);
    if (!g.is_real()) out["im"] = std::move(im);
    if (g.tail()) {
        out["tail"] = {{"rate", json_number(g.tail()->rate)}, {"coefficient", vector_to_json(g.tail()->coefficient)}};
    } else {
        out["tail"] = nullptr;
    }
    return out;
}

GridFunction grid_function_from_json(const Json& j) {
    if (!j.is_object()) bad("grid function must be an object");
    std::vector<double> times;
    for (const auto& t : j.at("times")) times.push_back(number_from_json(t));
    std::vector<std::size_t> kinks;
    if (j.contains("kinks"))
        for (const auto& k : j.at("kinks")) kinks.push_back(k.get<std::size_t>());
    const auto grid = Grid::from_times(std::move(times), std::move(kinks));
    const auto& re = j.at("re");
    const auto d = static_cast<Eigen::Index>(re.size());
    const auto n = static_cast<Eigen::Index>(grid->size());
    Mat values(d, n);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& row = re[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) bad("grid function row length differs from grid size");
        for (Eigen::Index k = 0; k < n; ++k) values(i, k) = number_from_json(row[static_cast<std::size_t>(k)]);
    }
    if (j.contains("im")) {
        const auto& im = j.at("im");
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index k = 0; k < n; ++k)
                values(i, k).imag(number_from_json(im.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k))));
    }
    std::optional<ExpTail> tail;
    if (j.contains("tail") && !j.at("tail").is_null()) {
        const auto& t = j.at("tail");
        tail = ExpTail{vector_from_json(t.at("coefficient")), number_from_json(t.at("rate"))};
    }
    return GridFunction(grid, std::move(values), std::move(tail));
}

std::string grid_function_to_csv(const GridFunction& g) {
    std::string out;
    if (g.tail()) {
        out += "# tail," + fmt(g.tail()->rate);
        for (Eigen::Index i = 0; i < g.dim(); ++i)
            out += "," + fmt(g.tail()->coefficient(i).real()) + "," + fmt(g.tail()->coefficient(i).imag());
        out += "\n";
    }
    out += "t,kink";
    for (Eigen::Index i = 0; i < g.dim(); ++i) out += ",re_" + std::to_string(i) + ",im_" + std::to_string(i);
    out += "\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
        out += fmt(g.grid()[k]) + (g.grid().is_kink(k) ? ",1" : ",0");
        for (Eigen::Index i = 0; i < g.dim(); ++i) out += "," + fmt(g.at(k)(i).real()) + "," + fmt(g.at(k)(i).imag());
        out += "\n";
    }
    return out;
}

GridFunction grid_function_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::optional<ExpTail> tail;
    std::vector<double> times;
    std::vector<std::size_t> kinks;
    std::vector<std::vector<Complex>> rows;
    Eigen::Index dim = -1;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# tail,", 0) == 0) {
            const auto cells = split(line.substr(7), ',');
            if (cells.empty() || cells.size() % 2 != 1) bad("malformed tail line");
            Vec c((cells.size() - 1) / 2);
            for (Eigen::Index i = 0; i < c.size(); ++i)
                c(i) = {parse_double(cells[static_cast<std::size_t>(1 + 2 * i)]),
                        parse_double(cells[static_cast<std::size_t>(2 + 2 * i)])};
            tail = ExpTail{c, parse_double(cells[0])};
            continue;
        }
        if (line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (!header) {
            if (cells.size() < 4 || cells[0] != "t" || cells[1] != "kink" || cells.size() % 2 != 0)
                bad("CSV header must be t,kink,re_0,im_0,...");
            dim = static_cast<Eigen::Index>((cells.size() - 2) / 2);
            header = true;
            continue;
        }
        if (static_cast<Eigen::Index>(cells.size()) != 2 + 2 * dim) bad("CSV row has the wrong number of cells");
        times.push_back(parse_double(cells[0]));
        if (parse_double(cells[1]) != 0.0) kinks.push_back(times.size() - 1);
        std::vector<Complex> row;
        for (Eigen::Index i = 0; i < dim; ++i)
            row.emplace_back(parse_double(cells[static_cast<std::size_t>(2 + 2 * i)]),
                             parse_double(cells[static_cast<std::size_t>(3 + 2 * i)]));
        rows.push_back(std::move(row));
    }
    if (!header) bad("CSV has no header");
    const auto grid = Grid::from_times(std::move(times), std::move(kinks));
    Mat values(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (Eigen::Index i = 0; i < dim; ++i) values(i, static_cast<Eigen::Index>(k)) = rows[k][static_cast<std::size_t>(i)];
    return GridFunction(grid, std::move(values), std::move(tail));
}

Json certificate_to_json(const HusCertificate& c) {
    Json updates = Json::array();
    for (double u : c.update_norms) updates.push_back(json_number(u));
    return {{"p", exponent_to_json(c.triple.p)},
            {"q", exponent_to_json(c.triple.q)},
            {"r", exponent_to_json(c.triple.r)},
            {"epsilon", json_number(c.epsilon)},
            {"residual_norm", json_number(c.residual_norm)},
            {"L", json_number(c.L)},
            {"deviation", json_number(c.deviation)},
            {"kappa", json_number(c.kappa)},
            {"iterations", c.iterations},
            {"final_update", json_number(c.final_update)},
            {"update_norms", std::move(updates)},
            {"observed_rate", json_number(c.observed_rate)},
            {"residual_check", json_number(c.residual_check)},
            {"residual_ok", c.residual_ok},
            {"bound_ok", c.bound_ok},
            {"converged", c.converged},
            {"finite_difference_derivative", c.finite_difference_derivative}};
}

Json gap_to_json(const GapReport& g) {
    Json out = {{"upper", json_number(g.upper)},
                {"lower", json_number(g.lower)},
                {"ratio", json_number(g.ratio)},
                {"argmax_u", vector_to_json(g.argmax_u)},
                {"argmax_gamma", json_number(g.argmax_gamma)},
                {"jordan_case", g.jordan_case == JordanForm::Case::diagonal ? "diagonal" : "jordan_block"}};
    out["delta_star"] = g.delta_star ? json_number(*g.delta_star) : Json(nullptr);
    return out;
}

Json scenario_to_json(const ScenarioReport& r) {
    Json params = Json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    Json quantities = Json::object();
    for (const auto& [k, v] : r.quantities) quantities[k] = json_number(v);
    Json assertions = Json::array();
    for (const auto& a : r.assertions)
        assertions.push_back({{"name", a.name},
                              {"relation", relation_name(a.relation)},
                              {"expected", json_number(a.expected)},
                              {"computed", json_number(a.computed)},
                              {"tolerance", json_number(a.tolerance)},
                              {"passed", a.passed}});
    Json out = {{"name", r.name},
                {"passed", r.passed()},
                {"parameters", std::move(params)},
                {"quantities", std::move(quantities)},
                {"assertions", std::move(assertions)},
                {"notes", r.notes}};
    out["certificate"] = r.certificate ? certificate_to_json(*r.certificate) : Json(nullptr);
    return out;
}

}  // namespace hus
