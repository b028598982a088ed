#include "hus/hus.h"

#include "commands.hpp"
#include "hus/error.hpp"
#include "hus/hus_bounds.hpp"

#include <cmath>
#include <new>
#include <string>

struct hus_context {
    std::string last_error;
    std::string defaults;
};

struct hus_report {
    std::string text;
    bool passed = false;
};

namespace {

hus_status to_status(hus::Status s) { return static_cast<hus_status>(static_cast<int>(s)); }

hus_status status_of(hus::Errc code) { return to_status(hus::status_for(code)); }

hus::Exponent exponent(double v) { return std::isinf(v) && v > 0 ? hus::Exponent::infinity() : hus::Exponent::finite(v); }

double to_double(const hus::Exponent& e) { return e.is_infinite() ? INFINITY : e.value(); }

template <typename F>
hus_status guarded(hus_context* ctx, F&& f) {
    if (ctx) ctx->last_error.clear();
    try {
        f();
        return HUS_OK;
    } catch (const hus::Error& e) {
        if (ctx) ctx->last_error = std::string(hus::errc_name(e.code())) + ": " + e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        if (ctx) ctx->last_error = e.what();
        return HUS_ERR_INTERNAL;
    }
}

}  // namespace

extern "C" {

const char* hus_version(void) { return "1.0.0"; }

hus_context* hus_context_create(void) { return new (std::nothrow) hus_context(); }

void hus_context_destroy(hus_context* ctx) { delete ctx; }

const char* hus_last_error(const hus_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

hus_status hus_run(hus_context* ctx, const char* command, const char* scenario_name, const char* config_json,
                   hus_format format, hus_report** out) {
    if (out) *out = nullptr;
    if (!ctx || !command || !out) return HUS_ERR_CONFIG;
    const auto res = hus::run_command(command, scenario_name ? scenario_name : "", config_json ? config_json : "",
                                      format == HUS_FORMAT_CSV ? hus::OutputFormat::csv : hus::OutputFormat::json);
    ctx->last_error = res.error;
    if (!res.text.empty()) {
        auto* rep = new (std::nothrow) hus_report();
        if (!rep) return HUS_ERR_INTERNAL;
        rep->text = res.text;
        rep->passed = res.passed;
        *out = rep;
    }
    return to_status(res.status);
}

const char* hus_report_text(const hus_report* report) { return report ? report->text.c_str() : ""; }

int hus_report_passed(const hus_report* report) { return report && report->passed ? 1 : 0; }

void hus_report_destroy(hus_report* report) { delete report; }

hus_status hus_default_config(hus_context* ctx, const char* command, const char* scenario_name, const char** out) {
    if (!ctx || !out) return HUS_ERR_CONFIG;
    return guarded(ctx, [&] {
        ctx->defaults = hus::default_config(command ? command : "", scenario_name ? scenario_name : "");
        *out = ctx->defaults.c_str();
    });
}

hus_status hus_conjugate_exponent(hus_context* ctx, double p, double q, double* r) {
    if (!r) return HUS_ERR_CONFIG;
    return guarded(ctx, [&] { *r = to_double(hus::conjugate_exponent(exponent(p), exponent(q))); });
}

hus_status hus_upper_constant(hus_context* ctx, double D, double lambda, hus_dichotomy_kind kind, double c, double p,
                              double q, double* out) {
    if (!out) return HUS_ERR_CONFIG;
    return guarded(ctx, [&] {
        hus::DichotomyKind k = hus::DichotomyKind::general;
        if (kind == HUS_CONTRACTION) k = hus::DichotomyKind::contraction;
        else if (kind == HUS_EXPANSION) k = hus::DichotomyKind::expansion;
        else if (kind != HUS_GENERAL) hus::fail(hus::Errc::invalid_argument, "unknown dichotomy kind");
        const auto triple = hus::ConjugateTriple::make(exponent(p), exponent(q));
        *out = hus::upper_hus_constant({D, lambda, k, c, triple});
    });
}

hus_status hus_corollary_2d_constant(hus_context* ctx, const double a_re[4], const double a_im[4], double p, double q,
                                     double* out) {
    if (!out || !a_re) return HUS_ERR_CONFIG;
    return guarded(ctx, [&] {
        hus::Matrix2 a;
        for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = {a_re[i], a_im ? a_im[i] : 0.0};
        *out = hus::corollary_2d_constant(a, hus::ConjugateTriple::make(exponent(p), exponent(q)));
    });
}

}  // extern "C"
