#pragma once

#include <compare>
#include <string>

namespace hus {

/// Extended real in [1, inf] indexing an L^p space. Infinity is a separate
/// state, never a floating sentinel, so the branches of the conjugate
/// exponent formula stay exact.
class Exponent {
public:
    static Exponent finite(double value);
    static Exponent infinity() noexcept { return Exponent{}; }
    /// Accepts a number or the token "inf" (also "infinity", "∞").
    static Exponent parse(const std::string& text);

    bool is_infinite() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }
    /// Finite value; throws if infinite.
    double value() const;
    /// 1/value, or 0 for infinity.
    double reciprocal() const noexcept { return infinite_ ? 0.0 : 1.0 / value_; }

    std::string to_string() const;

    friend bool operator==(const Exponent& a, const Exponent& b) noexcept {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend std::partial_ordering operator<=>(const Exponent& a, const Exponent& b) noexcept {
        if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
        return a.value_ <=> b.value_;
    }

private:
    Exponent() = default;
    bool infinite_ = true;
    double value_ = 0.0;
};

/// r with 1/p + 1 = 1/q + 1/r. Requires p >= q; throws Errc::precedence otherwise.
Exponent conjugate_exponent(Exponent p, Exponent q);

/// (p, q, r) satisfying the Young relation. Construct through make().
struct ConjugateTriple {
    Exponent p = Exponent::infinity();
    Exponent q = Exponent::infinity();
    Exponent r = Exponent::finite(1.0);

    static ConjugateTriple make(Exponent p, Exponent q);
};

/// (1/(lambda r))^(1/r) with the 0^0 = 1 convention at r = inf. This is the
/// L^r norm of the kernel e^{-lambda t} on the half-line.
double kernel_lr_norm(double lambda, Exponent r);

/// x^(1/e) with the convention that the factor is 1 for e = inf.
double root_or_one(double x, Exponent e);

}  // namespace hus
