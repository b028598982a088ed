#include "hus/exponent.hpp"

#include "hus/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace hus {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::precedence: return "PrecedenceError";
    case Errc::divergent_norm: return "DivergentNorm";
    case Errc::singular_matrix: return "SingularMatrix";
    case Errc::not_expansion: return "NotExpansion";
    case Errc::no_dichotomy: return "NoDichotomy";
    case Errc::smallness_violation: return "SmallnessViolation";
    case Errc::precondition: return "PreconditionError";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::certificate_failure: return "CertificateFailure";
    case Errc::config: return "ConfigError";
    }
    return "Unknown";
}

Exponent Exponent::finite(double value) {
    if (!std::isfinite(value) || value < 1.0)
        fail(Errc::invalid_argument, "exponent must be a finite real >= 1 or inf, got " +
                                         std::to_string(value));
    Exponent e;
    e.infinite_ = false;
    e.value_ = value;
    return e;
}

Exponent Exponent::parse(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity" || text == "∞")
        return infinity();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        fail(Errc::config, "cannot parse exponent '" + text + "'");
    return finite(v);
}

double Exponent::value() const {
    if (infinite_) fail(Errc::invalid_argument, "exponent is infinite");
    return value_;
}

std::string Exponent::to_string() const {
    if (infinite_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
}

Exponent conjugate_exponent(Exponent p, Exponent q) {
    if (p < q)
        fail(Errc::precedence, "conjugate exponent needs p >= q (p=" + p.to_string() +
                                   ", q=" + q.to_string() + ")");
    if (p.is_finite()) {
        // p >= q, so q is finite as well.
        const double pv = p.value(), qv = q.value();
        return Exponent::finite(pv * qv / (qv - pv + pv * qv));
    }
    if (q.is_infinite()) return Exponent::finite(1.0);
    const double qv = q.value();
    if (qv == 1.0) return Exponent::infinity();
    return Exponent::finite(qv / (qv - 1.0));
}

ConjugateTriple ConjugateTriple::make(Exponent p, Exponent q) {
    return ConjugateTriple{p, q, conjugate_exponent(p, q)};
}

double kernel_lr_norm(double lambda, Exponent r) {
    if (!(lambda > 0.0)) fail(Errc::invalid_argument, "kernel rate must be positive");
    if (r.is_infinite()) return 1.0;
    const double rv = r.value();
    return std::pow(1.0 / (lambda * rv), 1.0 / rv);
}

double root_or_one(double x, Exponent e) {
    if (e.is_infinite()) return 1.0;
    return std::pow(x, 1.0 / e.value());
}

}  // namespace hus
