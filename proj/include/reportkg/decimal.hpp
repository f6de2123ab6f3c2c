#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace reportkg {

/// Exact base-10 number: coefficient * 10^exponent.
///
/// Always kept normalized (no trailing zeros in the coefficient, zero has
/// exponent 0), so structural equality is numeric equality.
class Decimal {
public:
    using Coefficient = boost::multiprecision::cpp_int;

    Decimal() = default;
    Decimal(long long value);  // NOLINT(google-explicit-constructor)
    Decimal(Coefficient coefficient, int exponent);

    /// Accepts `[+-]digits[.digits][(e|E)[+-]digits]`; the whole input must match.
    static std::optional<Decimal> parse(std::string_view text);
    static Decimal pow10(int exponent);

    const Coefficient& coefficient() const { return coefficient_; }
    int exponent() const { return exponent_; }

    bool is_zero() const { return coefficient_.is_zero(); }
    int sign() const { return coefficient_.sign(); }

    /// Plain positional notation, no exponent: "1900000", "0.0015", "-2".
    std::string to_string() const;
    double to_double() const;

    Decimal operator-() const;
    friend Decimal operator+(const Decimal& a, const Decimal& b);
    friend Decimal operator-(const Decimal& a, const Decimal& b);
    friend Decimal operator*(const Decimal& a, const Decimal& b);

    /// Exact quotient, or nullopt when the result does not terminate in base 10
    /// (or the divisor is zero).
    std::optional<Decimal> divide_exact(const Decimal& divisor) const;

    friend bool operator==(const Decimal& a, const Decimal& b) = default;
    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

private:
    void normalize();

    Coefficient coefficient_ = 0;
    int exponent_ = 0;
};

}  // namespace reportkg
