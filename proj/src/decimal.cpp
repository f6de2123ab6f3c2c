#include "reportkg/decimal.hpp"

#include <algorithm>
#include <cctype>

namespace reportkg {

namespace {

const Decimal::Coefficient& ten() {
    static const Decimal::Coefficient value = 10;
    return value;
}

Decimal::Coefficient power_of_ten(unsigned exponent) {
    return boost::multiprecision::pow(Decimal::Coefficient(10), exponent);
}

}  // namespace

Decimal::Decimal(long long value) : coefficient_(value) { normalize(); }

Decimal::Decimal(Coefficient coefficient, int exponent)
    : coefficient_(std::move(coefficient)), exponent_(exponent) {
    normalize();
}

void Decimal::normalize() {
    if (coefficient_.is_zero()) {
        exponent_ = 0;
        return;
    }
    while (true) {
        Coefficient quotient;
        Coefficient remainder;
        boost::multiprecision::divide_qr(coefficient_, ten(), quotient, remainder);
        if (!remainder.is_zero()) {
            break;
        }
        coefficient_ = std::move(quotient);
        ++exponent_;
    }
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string digits;
    int fraction_digits = 0;
    bool seen_point = false;
    bool any_digit = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            any_digit = true;
            if (seen_point) {
                ++fraction_digits;
            }
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit) {
        return std::nullopt;
    }
    long long exponent = 0;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        bool exp_negative = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            exp_negative = text[pos] == '-';
            ++pos;
        }
        const std::size_t exp_start = pos;
        for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
            exponent = exponent * 10 + (text[pos] - '0');
            if (exponent > 100000) {
                return std::nullopt;
            }
        }
        if (pos == exp_start) {
            return std::nullopt;
        }
        if (exp_negative) {
            exponent = -exponent;
        }
    }
    if (pos != text.size()) {
        return std::nullopt;
    }
    // cpp_int reads a leading zero as an octal prefix.
    const auto first = digits.find_first_not_of('0');
    Coefficient coefficient(first == std::string::npos ? std::string("0") : digits.substr(first));
    if (negative) {
        coefficient = -coefficient;
    }
    return Decimal(std::move(coefficient), static_cast<int>(exponent - fraction_digits));
}

Decimal Decimal::pow10(int exponent) { return Decimal(Coefficient(1), exponent); }

std::string Decimal::to_string() const {
    const bool negative = coefficient_.sign() < 0;
    std::string digits = (negative ? Coefficient(-coefficient_) : coefficient_).str();
    std::string out;
    if (exponent_ >= 0) {
        out = digits + std::string(static_cast<std::size_t>(exponent_), '0');
    } else {
        const auto shift = static_cast<std::size_t>(-exponent_);
        if (digits.size() <= shift) {
            out = "0." + std::string(shift - digits.size(), '0') + digits;
        } else {
            out = digits.substr(0, digits.size() - shift) + "." + digits.substr(digits.size() - shift);
        }
    }
    return negative ? "-" + out : out;
}

double Decimal::to_double() const { return std::stod(to_string()); }

Decimal Decimal::operator-() const { return Decimal(-coefficient_, exponent_); }

namespace {

// Rescales both coefficients to the smaller exponent.
std::pair<Decimal::Coefficient, Decimal::Coefficient> align(const Decimal& a, const Decimal& b, int& exponent) {
    exponent = std::min(a.exponent(), b.exponent());
    Decimal::Coefficient ca = a.coefficient() * power_of_ten(static_cast<unsigned>(a.exponent() - exponent));
    Decimal::Coefficient cb = b.coefficient() * power_of_ten(static_cast<unsigned>(b.exponent() - exponent));
    return {std::move(ca), std::move(cb)};
}

}  // namespace

Decimal operator+(const Decimal& a, const Decimal& b) {
    int exponent = 0;
    auto [ca, cb] = align(a, b, exponent);
    return Decimal(ca + cb, exponent);
}

Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }

Decimal operator*(const Decimal& a, const Decimal& b) {
    return Decimal(a.coefficient_ * b.coefficient_, a.exponent_ + b.exponent_);
}

std::optional<Decimal> Decimal::divide_exact(const Decimal& divisor) const {
    if (divisor.is_zero()) {
        return std::nullopt;
    }
    // 1/c terminates iff c = 2^a * 5^b; then 1/c = 2^(k-a) * 5^(k-b) * 10^-k with k = max(a, b).
    Coefficient rest = abs(divisor.coefficient_);
    unsigned twos = 0;
    unsigned fives = 0;
    while (rest % 2 == 0) {
        rest /= 2;
        ++twos;
    }
    while (rest % 5 == 0) {
        rest /= 5;
        ++fives;
    }
    if (rest != 1) {
        return std::nullopt;
    }
    const unsigned k = std::max(twos, fives);
    const Coefficient reciprocal = boost::multiprecision::pow(Coefficient(2), k - twos) *
                                   boost::multiprecision::pow(Coefficient(5), k - fives);
    Coefficient numerator = coefficient_ * reciprocal;
    if (divisor.sign() < 0) {
        numerator = -numerator;
    }
    return Decimal(std::move(numerator), exponent_ - divisor.exponent_ - static_cast<int>(k));
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    int exponent = 0;
    auto [ca, cb] = align(a, b, exponent);
    if (ca < cb) {
        return std::strong_ordering::less;
    }
    if (ca > cb) {
        return std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
}

}  // namespace reportkg
