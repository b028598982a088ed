#pragma once

#include <stdexcept>
#include <string>

namespace hus {

/// Failure categories raised by the library. The C API maps each one onto a
/// status code; the CLI maps those onto process exit codes.
enum class Errc {
    invalid_argument,
    precedence,          // p < q, no conjugate exponent in [1, inf]
    divergent_norm,      // improper integral cannot be bounded
    singular_matrix,
    not_expansion,
    no_dichotomy,
    smallness_violation, // Lipschitz constant too large for the dichotomy
    precondition,
    no_convergence,
    certificate_failure,
    config,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace hus
