#pragma once

#include "reportkg/config.hpp"
#include "reportkg/decimal.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::units {

enum class Dimension { Voltage, Resistance, Current, Power, Dimensionless };

std::string_view to_string(Dimension dimension);
std::optional<Dimension> dimension_from_string(std::string_view name);

/// A base unit scaled by a decimal factor (1 for V, 1e6 for MΩ).
struct Unit {
    Dimension dimension = Dimension::Dimensionless;
    Decimal scale = 1;
    /// Rendering symbol including any prefix ("MΩ"); not part of equality.
    std::string symbol;

    static Unit dimensionless() { return Unit{}; }

    friend bool operator==(const Unit& a, const Unit& b) {
        return a.dimension == b.dimension && a.scale == b.scale;
    }
};

/// A value expressed in `unit`; `base_value()` is the value in the base unit.
struct Quantity {
    Decimal value;
    Unit unit;
    std::string raw;

    Decimal base_value() const { return value * unit.scale; }
    Dimension dimension() const { return unit.dimension; }

    friend bool operator==(const Quantity& a, const Quantity& b) {
        return a.value == b.value && a.unit == b.unit;
    }
};

enum class LimitKind { ClosedInterval, AtLeast, AtMost };

struct AcceptanceLimits {
    LimitKind kind = LimitKind::ClosedInterval;
    std::optional<Quantity> lower;
    std::optional<Quantity> upper;
    std::string raw;

    Dimension dimension() const;
    /// The unit a bare measured value adopts when checked against these limits.
    const Unit& unit() const;

    friend bool operator==(const AcceptanceLimits& a, const AcceptanceLimits& b) {
        return a.kind == b.kind && a.lower == b.lower && a.upper == b.upper;
    }
};

enum class Mark { Pass, Fail };

struct SuccessMark {
    Mark verdict = Mark::Fail;
    std::string raw;
};

/// Unit symbols, SI prefixes and success tokens.
///
/// Config keys (all optional, applied on top of the compiled-in defaults):
///   unit.<symbol>   = <Dimension>[, <canonical symbol>]   e.g. `unit.Ohm = Resistance, Ω`
///   prefix.<symbol> = <power of ten>                       e.g. `prefix.k = 3`
///   success.pass    = <token>[, <token>...]                replaces the Pass tokens
class UnitRegistry {
public:
    /// V, Ω (Ohm, ohm, U+2126), A, W; prefixes p n µ/u m k M G; Pass token "ok".
    static const UnitRegistry& defaults();
    static UnitRegistry from_config(const KeyValueConfig& config);

    void add_unit(const std::string& symbol, Dimension dimension, const std::string& canonical);
    void add_prefix(const std::string& symbol, int exponent);
    void set_pass_tokens(std::vector<std::string> tokens);

    Quantity parse_quantity(std::string_view text) const;
    AcceptanceLimits parse_acceptance_limits(std::string_view text) const;
    SuccessMark parse_success_mark(std::string_view text) const;

    /// Resolves "MΩ", "mV", "V", "" (dimensionless); throws UnknownUnit.
    Unit unit(std::string_view symbol) const;
    /// True when `symbol` is a (possibly prefixed) unit with a dimension.
    bool is_unit_symbol(std::string_view symbol) const;

    Unit base_unit(Dimension dimension) const;
    const std::vector<std::string>& pass_tokens() const { return pass_tokens_; }

private:
    struct BaseSymbol {
        Dimension dimension;
        std::string canonical;
    };
    struct Suffix {
        std::optional<int> prefix_exponent;
        std::optional<BaseSymbol> base;
    };

    std::optional<Suffix> resolve_suffix(std::string_view token) const;
    std::string prefix_symbol(int exponent) const;
    Unit make_unit(const BaseSymbol& base, int prefix_exponent) const;
    Quantity make_quantity(const Decimal& number, const Suffix& suffix, std::string raw) const;

    std::map<std::string, BaseSymbol, std::less<>> symbols_;
    std::map<std::string, int, std::less<>> prefixes_;
    std::map<int, std::string> canonical_prefixes_;
    std::vector<std::string> pass_tokens_;
};

Quantity parse_quantity(std::string_view text, const UnitRegistry& registry = UnitRegistry::defaults());
AcceptanceLimits parse_acceptance_limits(std::string_view text,
                                         const UnitRegistry& registry = UnitRegistry::defaults());
SuccessMark parse_success_mark(std::string_view text, const UnitRegistry& registry = UnitRegistry::defaults());

/// Rescales `q` into `target`. A dimensionless `q` adopts the target unit as-is.
/// Throws DimensionMismatch, or InexactConversion for non-terminating scale ratios.
Quantity convert(const Quantity& q, const Unit& target);

/// "1.097 V", "1.9 MΩ", "12.5". Parses back to an equal Quantity.
std::string format_quantity(const Quantity& q);
/// "[1.076, 1.224] V", ">= 100 MΩ", "<= 5 mA". Parses back to equal limits.
std::string format_limits(const AcceptanceLimits& limits);

}  // namespace reportkg::units
