#include "commands.hpp"

#include "hus/error.hpp"
#include "hus/hus_bounds.hpp"
#include "hus/scenarios.hpp"
#include "hus/serialize.hpp"
#include "hus/shadowing.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>

namespace hus {

namespace {

// ---- config access with field diagnostics -------------------------------

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    fail(Errc::config, "field '" + path + "': " + what);
}

class Field {
public:
    Field(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

    Field at(const std::string& key) const {
        const std::string sub = path_.empty() ? key : path_ + "." + key;
        if (!j_.is_object()) field_error(path_, "expected an object");
        if (!j_.contains(key)) field_error(sub, "missing");
        return Field(j_.at(key), sub);
    }
    bool is_null() const { return j_.is_null(); }
    const Json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    double number() const {
        if (!j_.is_number() && !j_.is_string()) field_error(path_, "expected a number, got " + j_.dump());
        return wrap([&] { return number_from_json(j_); });
    }
    double positive() const {
        const double v = number();
        if (!(v > 0.0) || !std::isfinite(v)) field_error(path_, "expected a positive number");
        return v;
    }
    std::size_t count(std::size_t min) const {
        if (!j_.is_number_integer() && !j_.is_number_unsigned()) field_error(path_, "expected an integer");
        const auto v = j_.get<long long>();
        if (v < static_cast<long long>(min)) field_error(path_, "must be at least " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }
    bool boolean() const {
        if (!j_.is_boolean()) field_error(path_, "expected true or false");
        return j_.get<bool>();
    }
    std::string string() const {
        if (!j_.is_string()) field_error(path_, "expected a string");
        return j_.get<std::string>();
    }
    Exponent exponent() const {
        return wrap([&] { return exponent_from_json(j_); });
    }
    Mat matrix() const {
        return wrap([&] { return matrix_from_json(j_); });
    }
    Vec vector() const {
        return wrap([&] { return vector_from_json(j_); });
    }
    std::vector<double> numbers() const {
        if (!j_.is_array()) field_error(path_, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(Field(j_[i], path_ + "[" + std::to_string(i) + "]").number());
        return out;
    }
    std::vector<Exponent> exponents() const {
        if (!j_.is_array()) field_error(path_, "expected an array of exponents");
        std::vector<Exponent> out;
        for (std::size_t i = 0; i < j_.size(); ++i)
            out.push_back(Field(j_[i], path_ + "[" + std::to_string(i) + "]").exponent());
        return out;
    }

private:
    template <typename F>
    auto wrap(F&& f) const -> decltype(f()) {
        try {
            return f();
        } catch (const Error& e) {
            field_error(path_, e.what());
        } catch (const Json::exception& e) {
            field_error(path_, e.what());
        }
    }

    const Json& j_;
    std::string path_;
};

Json merge(const Json& defaults, const Json& user, const std::string& path) {
    if (!user.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
    Json out = defaults;
    for (const auto& [key, value] : user.items()) {
        const std::string sub = path.empty() ? key : path + "." + key;
        if (!defaults.contains(key)) field_error(sub, "unknown field");
        const Json& d = defaults.at(key);
        if (d.is_object() && value.is_object())
            out[key] = merge(d, value, sub);
        else if (d.is_number_float() && value.is_number())
            out[key] = value.get<double>();  // 25 and 25.0 hash alike
        else
            out[key] = value;
    }
    return out;
}

Json parse_config(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        fail(Errc::config, "config parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                               ": " + e.what());
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_cell(const Json& v) {
    if (v.is_number()) return fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

// ---- defaults ------------------------------------------------------------

Json lower_bound_defaults() {
    return {{"gamma_min", 1e-4}, {"gamma_max", 1e2}, {"gamma_count", 60},
            {"phases", 16},      {"radii", 8},       {"refine_passes", 2}};
}

Json constants_defaults() {
    return {{"matrix", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 3.0})})},
            {"p", "inf"},
            {"q", "inf"},
            {"delta", nullptr},
            {"lower_bound", lower_bound_defaults()},
            {"dichotomy", nullptr}};
}

Json solve_defaults() {
    return {{"matrix", Json::array({Json::array({1.0})})},
            {"projection", nullptr},
            {"dichotomy", {{"D", nullptr}, {"lambda", nullptr}, {"fit_horizon", 10.0}, {"fit_samples", 41}}},
            {"nonlinearity", {{"type", "none"}, {"b", 0.0}, {"matrix", nullptr}}},
            {"lipschitz", nullptr},
            {"pseudosolution",
             {{"type", "exponential"},
              {"coefficient", Json::array({-0.5})},
              {"gamma", 1.0},
              {"times", nullptr},
              {"values", nullptr},
              {"derivative", nullptr},
              {"kinks", nullptr},
              {"tail", nullptr}}},
            {"epsilon", nullptr},
            {"p", 2.0},
            {"q", 2.0},
            {"grid", {{"t_max", 25.0}, {"intervals", 2500}}},
            {"tolerances",
             {{"picard", 1e-10}, {"max_iter", 200}, {"residual", 1e-6}, {"cert_atol", 1e-9}, {"cert_rtol", 1e-7}}},
            {"uniqueness_probe", {{"enabled", false}, {"horizon", 10.0}, {"factor", 10.0}}}};
}

Json sweep_defaults() {
    return {{"matrix", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 3.0})})},
            {"p", "inf"},
            {"q", "inf"},
            {"parameter", "gamma"},
            {"values", nullptr},
            {"range", nullptr},
            {"u", Json::array({1.0, 0.0})},
            {"gamma", 1e-3},
            {"lower_bound", lower_bound_defaults()}};
}

Json scenario_defaults(const std::string& name) {
    if (name == "sine") {
        const SineParams d;
        return {{"a", d.a}, {"b", d.b}, {"gamma", d.gamma}, {"p", exponent_to_json(d.p)},
                {"q", exponent_to_json(d.q)}, {"t_max", d.t_max}, {"intervals", d.intervals}};
    }
    if (name == "sharpness") {
        const SharpnessParams d;
        return {{"a", d.a},
                {"gamma", d.gamma},
                {"p", exponent_to_json(d.p)},
                {"amplitude", d.amplitude},
                {"t_max", d.t_max},
                {"intervals", d.intervals},
                {"gamma_grid", d.gamma_grid}};
    }
    if (name == "pq_counterexample") {
        const PqParams d;
        return {{"p", exponent_to_json(d.p)}, {"q", exponent_to_json(d.q)}, {"delta", d.delta}, {"z0", d.z0},
                {"t_mid", d.t_mid},           {"t_end", d.t_end},           {"intervals_per_decade", d.intervals_per_decade}};
    }
    if (name == "2d_minimal") {
        const Minimal2dParams d;
        return {{"mu1", d.mu1},           {"mu2", d.mu2},           {"p", exponent_to_json(d.p)},
                {"gamma_min", d.gamma_min}, {"gamma_max", d.gamma_max}, {"min_ratio", d.min_ratio}};
    }
    if (name == "unbounded_residual") {
        const UnboundedParams d;
        return {{"a", d.a}, {"p", exponent_to_json(d.p)}, {"q", exponent_to_json(d.q)}, {"spikes", d.spikes}, {"h", d.h}};
    }
    fail(Errc::config, "unknown scenario '" + name + "'");
}

Json defaults_for(const std::string& command, const std::string& scenario) {
    if (command == "constants") return constants_defaults();
    if (command == "solve") return solve_defaults();
    if (command == "sweep") return sweep_defaults();
    if (command == "scenario") return scenario_defaults(scenario);
    fail(Errc::config, "unknown command '" + command + "'");
}

// ---- shared pieces -------------------------------------------------------

LowerBoundGrid lower_bound_grid(const Field& f) {
    const double lo = f.at("gamma_min").positive();
    const double hi = f.at("gamma_max").positive();
    if (!(hi > lo)) field_error(f.path() + ".gamma_max", "must exceed gamma_min");
    auto grid = LowerBoundGrid::defaults(lo, hi, f.at("gamma_count").count(2), f.at("phases").count(1),
                                         f.at("radii").count(1));
    grid.refine_passes = static_cast<int>(f.at("refine_passes").count(0));
    return grid;
}

Matrix2 matrix2(const Field& f) {
    const Mat m = f.matrix();
    if (m.rows() != 2 || m.cols() != 2) field_error(f.path(), "expected a 2x2 matrix");
    return m;
}

Json triple_json(const ConjugateTriple& t) {
    return {{"p", exponent_to_json(t.p)}, {"q", exponent_to_json(t.q)}, {"r", exponent_to_json(t.r)}};
}

DichotomyKind kind_from(const Field& f) {
    const auto s = f.string();
    if (s == "contraction") return DichotomyKind::contraction;
    if (s == "expansion") return DichotomyKind::expansion;
    if (s == "general") return DichotomyKind::general;
    field_error(f.path(), "expected contraction, expansion or general");
}

struct Outcome {
    Json report;
    std::string csv;
    bool passed = true;
};

// ---- constants -----------------------------------------------------------

Outcome cmd_constants(const Field& cfg) {
    const auto triple = ConjugateTriple::make(cfg.at("p").exponent(), cfg.at("q").exponent());
    Outcome out;
    out.report["triple"] = triple_json(triple);
    std::vector<std::pair<std::string, Json>> rows;

    if (!cfg.at("matrix").is_null()) {
        const Matrix2 a = matrix2(cfg.at("matrix"));
        const auto jf = jordan_decompose(a);
        const auto gap = constant_gap(a, triple, lower_bound_grid(cfg.at("lower_bound")));
        Json bounds = gap_to_json(gap);
        bounds["eigenvalues"] = Json::array({complex_to_json(jf.mu1), complex_to_json(jf.mu2)});
        bounds["conditioning"] = json_number(jf.conditioning);
        bounds["ill_conditioned"] = jf.ill_conditioned;
        if (!cfg.at("delta").is_null()) {
            const double delta = cfg.at("delta").number();
            bounds["upper_at_delta"] = json_number(corollary_2d_constant(a, triple, delta));
            rows.emplace_back("upper_at_delta", bounds["upper_at_delta"]);
        }
        for (const char* key : {"upper", "lower", "ratio", "argmax_gamma", "delta_star"}) rows.emplace_back(key, bounds[key]);
        out.report["bounds"] = std::move(bounds);
    }
    if (!cfg.at("dichotomy").is_null()) {
        const Field d = cfg.at("dichotomy");
        const UpperConstantQuery q{d.at("D").positive(), d.at("lambda").positive(), kind_from(d.at("kind")),
                                   d.at("c").number(), triple};
        if (q.c < 0.0) field_error(d.path() + ".c", "must be >= 0");
        const double kappa = contraction_factor(q.kind, q.D, q.lambda, q.c);
        const double L = upper_hus_constant(q);
        out.report["hus_constant"] = {{"D", json_number(q.D)},   {"lambda", json_number(q.lambda)},
                                      {"kind", dichotomy_kind_name(q.kind)}, {"c", json_number(q.c)},
                                      {"kappa", json_number(kappa)}, {"L", json_number(L)}};
        rows.emplace_back("kappa", json_number(kappa));
        rows.emplace_back("L", json_number(L));
    }
    out.csv = "quantity,value\n";
    for (const auto& [k, v] : rows) out.csv += k + "," + csv_cell(v) + "\n";
    return out;
}

// ---- solve ---------------------------------------------------------------

struct SolveSetup {
    SemilinearProblem prob;
    PseudoSolution ps;
    ConjugateTriple triple;
    SolveOptions opts;
};

PseudoSolution pseudosolution_from(const Field& f, const Field& grid_cfg, Eigen::Index dim) {
    const auto type = f.at("type").string();
    if (type == "exponential") {
        const Vec v = f.at("coefficient").vector();
        if (v.size() != dim) field_error(f.path() + ".coefficient", "length differs from the system dimension");
        const double gamma = f.at("gamma").positive();
        const auto grid = Grid::uniform(grid_cfg.at("t_max").positive(), grid_cfg.at("intervals").count(4));
        auto y = GridFunction::sample(grid, dim, [&](double t) -> Vec { return v * std::exp(-gamma * t); });
        auto dy = GridFunction::sample(grid, dim, [&](double t) -> Vec { return -gamma * v * std::exp(-gamma * t); });
        y.set_tail(ExpTail{y.at(y.size() - 1), gamma});
        dy.set_tail(ExpTail{dy.at(dy.size() - 1), gamma});
        return {std::move(y), std::move(dy), std::nullopt};
    }
    if (type == "samples") {
        const auto times = f.at("times").numbers();
        std::vector<std::size_t> kinks;
        if (!f.at("kinks").is_null())
            for (double k : f.at("kinks").numbers()) kinks.push_back(static_cast<std::size_t>(k));
        GridPtr grid;
        try {
            grid = Grid::from_times(times, kinks);
        } catch (const Error& e) {
            field_error(f.path() + ".times", e.what());
        }
        auto load = [&](const Field& m) {
            const Mat values = m.matrix();
            if (values.rows() != dim || values.cols() != static_cast<Eigen::Index>(grid->size()))
                field_error(m.path(), "expected dim rows with one entry per time");
            return values;
        };
        std::optional<ExpTail> tail;
        if (!f.at("tail").is_null()) {
            const Field t = f.at("tail");
            tail = ExpTail{t.at("coefficient").vector(), t.at("rate").positive()};
            if (tail->coefficient.size() != dim) field_error(t.path() + ".coefficient", "wrong length");
        }
        PseudoSolution ps{GridFunction(grid, load(f.at("values")), tail), std::nullopt, std::nullopt};
        if (!f.at("derivative").is_null()) {
            std::optional<ExpTail> dtail;
            if (tail) dtail = ExpTail{-tail->rate * tail->coefficient, tail->rate};
            ps.derivative = GridFunction(grid, load(f.at("derivative")), dtail);
        }
        return ps;
    }
    field_error(f.path() + ".type", "expected exponential or samples");
}

SolveSetup solve_setup(const Field& cfg) {
    const auto triple = ConjugateTriple::make(cfg.at("p").exponent(), cfg.at("q").exponent());
    const Mat a = cfg.at("matrix").matrix();
    if (a.rows() != a.cols()) field_error("matrix", "expected a square matrix");
    const auto d = a.rows();
    const auto sys = LinearSystem::autonomous(a);

    Mat P;
    if (cfg.at("projection").is_null()) {
        P = stable_projection(a);
    } else {
        P = cfg.at("projection").matrix();
        if (P.rows() != d || P.cols() != d) field_error("projection", "dimension differs from the matrix");
    }

    const Field dich = cfg.at("dichotomy");
    DichotomySpec spec;
    if (dich.at("D").is_null() != dich.at("lambda").is_null())
        field_error(dich.path(), "give both D and lambda, or neither");
    if (dich.at("D").is_null()) {
        const auto times = sample_times(dich.at("fit_horizon").positive(), dich.at("fit_samples").count(3));
        spec = fit_dichotomy(sys, P, times);
    } else {
        spec = DichotomySpec::make(dich.at("D").positive(), dich.at("lambda").positive(), P);
    }

    const Field nl = cfg.at("nonlinearity");
    const auto type = nl.at("type").string();
    Nonlinearity f;
    double natural = 0.0;
    if (type == "sine") {
        const double b = nl.at("b").number();
        natural = std::abs(b);
        if (b != 0.0) f = [b](double, const Vec& x) -> Vec { return b * x.unaryExpr([](Complex v) { return std::sin(v); }); };
    } else if (type == "linear") {
        const Mat B = nl.at("matrix").matrix();
        if (B.rows() != d || B.cols() != d) field_error(nl.path() + ".matrix", "dimension differs from the matrix");
        natural = op_norm_inf(B);
        f = [B](double, const Vec& x) -> Vec { return B * x; };
    } else if (type != "none") {
        field_error(nl.path() + ".type", "expected none, sine or linear");
    }
    const double c = cfg.at("lipschitz").is_null() ? natural : cfg.at("lipschitz").number();
    auto prob = SemilinearProblem::make(sys, std::move(f), c, spec);

    auto ps = pseudosolution_from(cfg.at("pseudosolution"), cfg.at("grid"), d);
    if (!cfg.at("epsilon").is_null()) ps.epsilon = cfg.at("epsilon").number();

    const Field tol = cfg.at("tolerances");
    SolveOptions opts;
    opts.tol = tol.at("picard").positive();
    opts.max_iter = static_cast<int>(tol.at("max_iter").count(1));
    opts.residual_tol = tol.at("residual").positive();
    opts.cert_atol = tol.at("cert_atol").number();
    opts.cert_rtol = tol.at("cert_rtol").number();
    return {std::move(prob), std::move(ps), triple, opts};
}

void append_columns(std::string& header, const char* prefix, Eigen::Index d, bool complex) {
    for (Eigen::Index i = 0; i < d; ++i) {
        header += std::string(",") + prefix + "_" + std::to_string(i);
        if (complex) header += std::string(",") + prefix + "_im_" + std::to_string(i);
    }
}

Outcome cmd_solve(const Field& cfg) {
    const auto s = solve_setup(cfg);
    const auto res = picard_solve(s.ps, s.prob, s.triple, s.opts);
    Outcome out;
    out.report["dichotomy"] = {{"D", json_number(s.prob.dichotomy.D)},
                               {"lambda", json_number(s.prob.dichotomy.lambda)},
                               {"kind", dichotomy_kind_name(s.prob.dichotomy.kind)},
                               {"projection", matrix_to_json(s.prob.dichotomy.P)}};
    out.report["lipschitz"] = json_number(s.prob.lipschitz);
    out.report["certificate"] = certificate_to_json(res.certificate);

    const Field probe = cfg.at("uniqueness_probe");
    if (probe.at("enabled").boolean()) {
        UniquenessOptions uo;
        uo.horizon = probe.at("horizon").positive();
        uo.factor = probe.at("factor").positive();
        const bool unique = uniqueness_probe(s.prob, s.ps, res.x, s.triple, res.certificate.deviation, uo);
        out.report["uniqueness"] = unique;
        out.passed = unique;
    } else {
        out.report["uniqueness"] = nullptr;
    }

    const bool complex = !res.x.is_real() || !s.ps.y.is_real();
    const auto d = res.x.dim();
    std::string csv = "t";
    append_columns(csv, "x", d, complex);
    append_columns(csv, "y", d, complex);
    csv += "\n";
    for (std::size_t k = 0; k < res.x.size(); ++k) {
        csv += fmt(res.x.grid()[k]);
        for (const auto* g : {&res.x, &s.ps.y})
            for (Eigen::Index i = 0; i < d; ++i) {
                csv += "," + fmt(g->at(k)(i).real());
                if (complex) csv += "," + fmt(g->at(k)(i).imag());
            }
        csv += "\n";
    }
    out.csv = std::move(csv);
    return out;
}

// ---- sweep ---------------------------------------------------------------

std::vector<double> sweep_range(const Field& cfg, double lo, double hi, std::size_t count, bool log) {
    if (!cfg.at("values").is_null()) return cfg.at("values").numbers();
    if (!cfg.at("range").is_null()) {
        const Field r = cfg.at("range");
        lo = r.at("min").number();
        hi = r.at("max").number();
        count = r.at("count").count(1);
        log = r.at("log").boolean();
        if (log && !(lo > 0.0 && hi > 0.0)) field_error(r.path(), "log range needs positive bounds");
    }
    std::vector<double> v;
    for (std::size_t i = 0; i < count; ++i) {
        const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        v.push_back(log ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
    }
    return v;
}

std::vector<Exponent> exponent_values(const Field& cfg) {
    if (!cfg.at("values").is_null()) return cfg.at("values").exponents();
    if (!cfg.at("range").is_null()) {
        std::vector<Exponent> out;
        for (double v : sweep_range(cfg, 1.0, 1.0, 1, false)) {
            if (!(v >= 1.0)) field_error("range", "exponents must be >= 1");
            out.push_back(Exponent::finite(v));
        }
        return out;
    }
    std::vector<Exponent> out;
    for (double v : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) out.push_back(Exponent::finite(v));
    out.push_back(Exponent::infinity());
    return out;
}

Outcome cmd_sweep(const Field& cfg) {
    const Matrix2 a = matrix2(cfg.at("matrix"));
    const auto param = cfg.at("parameter").string();
    const auto p = cfg.at("p").exponent();
    const auto q = cfg.at("q").exponent();
    std::vector<std::string> columns;
    Json rows = Json::array();

    if (param == "gamma") {
        const auto triple = ConjugateTriple::make(p, q);
        const Vec u = cfg.at("u").vector();
        if (u.size() != 2) field_error("u", "expected two entries");
        columns = {"gamma", "lower_bound"};
        for (double g : sweep_range(cfg, 1e-4, 1e2, 25, true))
            rows.push_back({{"gamma", json_number(g)}, {"lower_bound", json_number(lower_bound({a, u, g, triple}))}});
    } else if (param == "u") {
        const auto triple = ConjugateTriple::make(p, q);
        const double g = cfg.at("gamma").positive();
        const auto grid = lower_bound_grid(cfg.at("lower_bound"));
        columns = {"u0_re", "u0_im", "u1_re", "u1_im", "lower_bound"};
        for (const auto& u : grid.directions)
            rows.push_back({{"u0_re", json_number(u(0).real())},
                            {"u0_im", json_number(u(0).imag())},
                            {"u1_re", json_number(u(1).real())},
                            {"u1_im", json_number(u(1).imag())},
                            {"lower_bound", json_number(lower_bound({a, u, g, triple}))}});
    } else if (param == "delta") {
        const auto triple = ConjugateTriple::make(p, q);
        const auto jf = jordan_decompose(a);
        if (jf.kind != JordanForm::Case::jordan_block) fail(Errc::precondition, "delta sweep needs a Jordan block");
        const DeltaSearch search{jf.nu(), triple.r, jf.conditioning};
        const double hi = search.upper();
        columns = {"delta", "factor", "constant"};
        for (double delta : sweep_range(cfg, hi / 25.0, hi, 25, false))
            rows.push_back({{"delta", json_number(delta)},
                            {"factor", json_number(jordan_delta_factor(jf.nu().real(), triple.r, delta))},
                            {"constant", json_number(corollary_2d_constant(a, triple, delta))}});
    } else if (param == "p" || param == "q") {
        const auto grid = lower_bound_grid(cfg.at("lower_bound"));
        columns = {"p", "q", "r", "upper", "lower", "ratio"};
        for (const auto& e : exponent_values(cfg)) {
            const auto triple = ConjugateTriple::make(param == "p" ? e : p, param == "q" ? e : q);
            const auto gap = constant_gap(a, triple, grid);
            rows.push_back({{"p", exponent_to_json(triple.p)},
                            {"q", exponent_to_json(triple.q)},
                            {"r", exponent_to_json(triple.r)},
                            {"upper", json_number(gap.upper)},
                            {"lower", json_number(gap.lower)},
                            {"ratio", json_number(gap.ratio)}});
        }
    } else {
        field_error("parameter", "expected gamma, delta, u, p or q");
    }

    Outcome out;
    out.report["parameter"] = param;
    out.report["columns"] = columns;
    out.report["rows"] = rows;
    std::string csv;
    for (std::size_t i = 0; i < columns.size(); ++i) csv += (i ? "," : "") + columns[i];
    csv += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < columns.size(); ++i) csv += (i ? "," : "") + csv_cell(row.at(columns[i]));
        csv += "\n";
    }
    out.csv = std::move(csv);
    return out;
}

// ---- scenario ------------------------------------------------------------

ScenarioReport run_scenario(const std::string& name, const Field& c) {
    if (name == "sine") {
        SineParams p;
        p.a = c.at("a").number();
        p.b = c.at("b").number();
        p.gamma = c.at("gamma").number();
        p.p = c.at("p").exponent();
        p.q = c.at("q").exponent();
        p.t_max = c.at("t_max").positive();
        p.intervals = c.at("intervals").count(4);
        return scenario_sine(p);
    }
    if (name == "sharpness") {
        SharpnessParams p;
        p.a = c.at("a").number();
        p.gamma = c.at("gamma").number();
        p.p = c.at("p").exponent();
        p.amplitude = c.at("amplitude").number();
        p.t_max = c.at("t_max").positive();
        p.intervals = c.at("intervals").count(4);
        p.gamma_grid = c.at("gamma_grid").numbers();
        return scenario_sharpness(p);
    }
    if (name == "pq_counterexample") {
        PqParams p;
        p.p = c.at("p").exponent();
        p.q = c.at("q").exponent();
        p.delta = c.at("delta").number();
        p.z0 = c.at("z0").number();
        p.t_mid = c.at("t_mid").number();
        p.t_end = c.at("t_end").number();
        p.intervals_per_decade = c.at("intervals_per_decade").count(10);
        return scenario_pq_counterexample(p);
    }
    if (name == "2d_minimal") {
        Minimal2dParams p;
        p.mu1 = c.at("mu1").number();
        p.mu2 = c.at("mu2").number();
        p.p = c.at("p").exponent();
        p.gamma_min = c.at("gamma_min").number();
        p.gamma_max = c.at("gamma_max").number();
        p.min_ratio = c.at("min_ratio").number();
        return scenario_2d_minimal(p);
    }
    if (name == "unbounded_residual") {
        UnboundedParams p;
        p.a = c.at("a").number();
        p.p = c.at("p").exponent();
        p.q = c.at("q").exponent();
        p.spikes = c.at("spikes").count(0);
        p.h = c.at("h").positive();
        return scenario_unbounded_residual(p);
    }
    fail(Errc::config, "unknown scenario '" + name + "'");
}

Outcome cmd_scenario(const std::string& name, const Field& cfg) {
    const auto rep = run_scenario(name, cfg);
    Outcome out;
    out.report["report"] = scenario_to_json(rep);
    out.passed = rep.passed();
    if (rep.trajectory) {
        out.csv = grid_function_to_csv(*rep.trajectory);
    } else {
        out.csv = "name,relation,expected,computed,tolerance,passed\n";
        for (const auto& a : rep.assertions)
            out.csv += a.name + "," + relation_name(a.relation) + "," + fmt(a.expected) + "," + fmt(a.computed) + "," +
                       fmt(a.tolerance) + "," + (a.passed ? "true" : "false") + "\n";
    }
    return out;
}

}  // namespace

Status status_for(Errc code) noexcept {
    switch (code) {
    case Errc::config:
    case Errc::invalid_argument: return Status::config;
    case Errc::certificate_failure: return Status::certificate;
    case Errc::no_convergence: return Status::no_convergence;
    case Errc::precedence:
    case Errc::divergent_norm:
    case Errc::singular_matrix:
    case Errc::not_expansion:
    case Errc::no_dichotomy:
    case Errc::smallness_violation:
    case Errc::precondition: return Status::precondition;
    }
    return Status::internal;
}

std::string config_hash(const std::string& canonical_json) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical_json) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string default_config(const std::string& command, const std::string& scenario_name) {
    if (command.empty()) {
        Json all = {{"constants", constants_defaults()}, {"solve", solve_defaults()}, {"sweep", sweep_defaults()}};
        Json scen = Json::object();
        for (const auto& n : scenario_names()) scen[n] = scenario_defaults(n);
        all["scenario"] = std::move(scen);
        return all.dump(2) + "\n";
    }
    if (command == "scenario" && scenario_name.empty()) {
        Json scen = Json::object();
        for (const auto& n : scenario_names()) scen[n] = scenario_defaults(n);
        return scen.dump(2) + "\n";
    }
    return defaults_for(command, scenario_name).dump(2) + "\n";
}

CommandOutput run_command(const std::string& command, const std::string& scenario_name, const std::string& config,
                          OutputFormat format) {
    CommandOutput result;
    try {
        if (command == "scenario" && scenario_name.empty()) fail(Errc::config, "scenario command needs a scenario name");
        const Json effective = merge(defaults_for(command, scenario_name), parse_config(config), "");
        Json provenance = {{"command", command}, {"config", effective}};
        if (command == "scenario") provenance["scenario"] = scenario_name;
        const std::string hash = config_hash(provenance.dump());

        const Field cfg(effective, "");
        Outcome out;
        if (command == "constants") out = cmd_constants(cfg);
        else if (command == "solve") out = cmd_solve(cfg);
        else if (command == "sweep") out = cmd_sweep(cfg);
        else out = cmd_scenario(scenario_name, cfg);

        Json report = {{"command", command}, {"config_hash", hash}, {"config", effective}, {"passed", out.passed}};
        if (command == "scenario") report["scenario"] = scenario_name;
        for (auto& [k, v] : out.report.items()) report[k] = v;

        if (format == OutputFormat::json) {
            result.text = report.dump(2) + "\n";
        } else {
            result.text = "# config_hash," + hash + "\n" + out.csv;
        }
        result.passed = out.passed;
        result.status = out.passed ? Status::ok : Status::certificate;
        if (!out.passed) result.error = "one or more assertions failed";
    } catch (const Error& e) {
        result.status = status_for(e.code());
        result.error = std::string(errc_name(e.code())) + ": " + e.what();
    } catch (const Json::exception& e) {
        result.status = Status::config;
        result.error = std::string("config: ") + e.what();
    } catch (const std::exception& e) {
        result.status = Status::internal;
        result.error = std::string("internal: ") + e.what();
    }
    return result;
}

}  // namespace hus
