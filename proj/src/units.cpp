#include "reportkg/units.hpp"

#include "reportkg/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace reportkg::units {

namespace {

constexpr std::string_view kOhmGreek = "\xCE\xA9";   // U+03A9
constexpr std::string_view kOhmSign = "\xE2\x84\xA6";  // U+2126
constexpr std::string_view kMicroSign = "\xC2\xB5";    // U+00B5
constexpr std::string_view kGreekMu = "\xCE\xBC";      // U+03BC
constexpr std::string_view kGreaterEqual = "\xE2\x89\xA5";
constexpr std::string_view kLessEqual = "\xE2\x89\xA4";
constexpr std::array<std::string_view, 4> kDashes = {"-", "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x88\x92"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string strip_spaces(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (!is_space(c)) {
            out.push_back(c);
        }
    }
    return out;
}

bool starts_with(std::string_view text, std::string_view prefix) {
    return text.substr(0, prefix.size()) == prefix;
}

// Length of the leading numeric token `[+-]digits[.digits][e[+-]digits]`, 0 if none.
std::size_t number_length(std::string_view text) {
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        ++pos;
    }
    bool digits = false;
    bool point = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = true;
        } else if (c == '.' && !point) {
            point = true;
        } else {
            break;
        }
    }
    if (!digits) {
        return 0;
    }
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        std::size_t exp = pos + 1;
        if (exp < text.size() && (text[exp] == '+' || text[exp] == '-')) {
            ++exp;
        }
        const std::size_t exp_digits = exp;
        while (exp < text.size() && std::isdigit(static_cast<unsigned char>(text[exp]))) {
            ++exp;
        }
        if (exp > exp_digits) {
            pos = exp;
        }
    }
    return pos;
}

struct Endpoint {
    Decimal number;
    std::string suffix;
};

Endpoint split_endpoint(std::string_view text, std::string_view raw) {
    const std::string trimmed = trim(text);
    const std::size_t length = number_length(trimmed);
    if (length == 0) {
        throw Error(ErrorKind::UnparseableRange, "no numeric bound in '" + std::string(raw) + "'");
    }
    auto number = Decimal::parse(std::string_view(trimmed).substr(0, length));
    if (!number) {
        throw Error(ErrorKind::UnparseableRange, "bad number in '" + std::string(raw) + "'");
    }
    return Endpoint{*number, strip_spaces(std::string_view(trimmed).substr(length))};
}

}  // namespace

std::string_view to_string(Dimension dimension) {
    switch (dimension) {
        case Dimension::Voltage: return "Voltage";
        case Dimension::Resistance: return "Resistance";
        case Dimension::Current: return "Current";
        case Dimension::Power: return "Power";
        case Dimension::Dimensionless: return "Dimensionless";
    }
    return "Dimensionless";
}

std::optional<Dimension> dimension_from_string(std::string_view name) {
    for (auto d : {Dimension::Voltage, Dimension::Resistance, Dimension::Current, Dimension::Power,
                   Dimension::Dimensionless}) {
        if (to_lower_ascii(to_string(d)) == to_lower_ascii(name)) {
            return d;
        }
    }
    return std::nullopt;
}

Dimension AcceptanceLimits::dimension() const { return lower ? lower->dimension() : upper->dimension(); }

const Unit& AcceptanceLimits::unit() const { return upper ? upper->unit : lower->unit; }

const UnitRegistry& UnitRegistry::defaults() {
    static const UnitRegistry registry = [] {
        UnitRegistry r;
        r.add_unit("V", Dimension::Voltage, "V");
        r.add_unit(std::string(kOhmGreek), Dimension::Resistance, std::string(kOhmGreek));
        r.add_unit(std::string(kOhmSign), Dimension::Resistance, std::string(kOhmGreek));
        r.add_unit("Ohm", Dimension::Resistance, std::string(kOhmGreek));
        r.add_unit("ohm", Dimension::Resistance, std::string(kOhmGreek));
        r.add_unit("A", Dimension::Current, "A");
        r.add_unit("W", Dimension::Power, "W");
        r.add_prefix("p", -12);
        r.add_prefix("n", -9);
        r.add_prefix(std::string(kMicroSign), -6);
        r.add_prefix(std::string(kGreekMu), -6);
        r.add_prefix("u", -6);
        r.add_prefix("m", -3);
        r.add_prefix("k", 3);
        r.add_prefix("M", 6);
        r.add_prefix("G", 9);
        r.set_pass_tokens({"ok"});
        return r;
    }();
    return registry;
}

UnitRegistry UnitRegistry::from_config(const KeyValueConfig& config) {
    UnitRegistry registry = defaults();
    for (const auto& [symbol, value] : config.section("unit.")) {
        const auto parts = split(value, ',');
        const auto dimension = dimension_from_string(trim(parts.front()));
        if (!dimension || *dimension == Dimension::Dimensionless) {
            throw Error(ErrorKind::ConfigError, "unit." + symbol + ": unknown dimension '" + value + "'");
        }
        const std::string canonical = parts.size() > 1 ? trim(parts[1]) : symbol;
        registry.add_unit(symbol, *dimension, canonical);
    }
    for (const auto& [symbol, value] : config.section("prefix.")) {
        try {
            registry.add_prefix(symbol, std::stoi(value));
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::ConfigError, "prefix." + symbol + ": not an integer exponent");
        }
    }
    if (config.contains("success.pass")) {
        registry.set_pass_tokens(config.get_list("success.pass"));
    }
    return registry;
}

void UnitRegistry::add_unit(const std::string& symbol, Dimension dimension, const std::string& canonical) {
    symbols_[symbol] = BaseSymbol{dimension, canonical};
}

void UnitRegistry::add_prefix(const std::string& symbol, int exponent) {
    prefixes_[symbol] = exponent;
    canonical_prefixes_.try_emplace(exponent, symbol);
    if (symbol == kMicroSign) {
        canonical_prefixes_[exponent] = symbol;
    }
}

void UnitRegistry::set_pass_tokens(std::vector<std::string> tokens) {
    pass_tokens_.clear();
    for (auto& token : tokens) {
        pass_tokens_.push_back(to_lower_ascii(trim(token)));
    }
}

std::string UnitRegistry::prefix_symbol(int exponent) const {
    if (exponent == 0) {
        return {};
    }
    const auto it = canonical_prefixes_.find(exponent);
    return it == canonical_prefixes_.end() ? "e" + std::to_string(exponent) : it->second;
}

std::optional<UnitRegistry::Suffix> UnitRegistry::resolve_suffix(std::string_view token) const {
    if (token.empty()) {
        return Suffix{};
    }
    if (const auto it = symbols_.find(token); it != symbols_.end()) {
        return Suffix{std::nullopt, it->second};
    }
    // Longest matching prefix first so multi-byte prefixes win over shorter ones.
    std::optional<Suffix> best;
    std::size_t best_length = 0;
    for (const auto& [prefix, exponent] : prefixes_) {
        if (!starts_with(token, prefix) || prefix.size() <= best_length) {
            continue;
        }
        const std::string_view rest = token.substr(prefix.size());
        if (rest.empty()) {
            best = Suffix{exponent, std::nullopt};
            best_length = prefix.size();
        } else if (const auto it = symbols_.find(rest); it != symbols_.end()) {
            best = Suffix{exponent, it->second};
            best_length = prefix.size();
        }
    }
    return best;
}

Unit UnitRegistry::make_unit(const BaseSymbol& base, int prefix_exponent) const {
    return Unit{base.dimension, Decimal::pow10(prefix_exponent), prefix_symbol(prefix_exponent) + base.canonical};
}

Unit UnitRegistry::base_unit(Dimension dimension) const {
    if (dimension == Dimension::Dimensionless) {
        return Unit::dimensionless();
    }
    for (const auto& [symbol, base] : symbols_) {
        if (base.dimension == dimension && symbol == base.canonical) {
            return make_unit(base, 0);
        }
    }
    for (const auto& [symbol, base] : symbols_) {
        if (base.dimension == dimension) {
            return make_unit(base, 0);
        }
    }
    throw Error(ErrorKind::UnknownUnit, "no unit registered for " + std::string(to_string(dimension)));
}

Unit UnitRegistry::unit(std::string_view symbol) const {
    const auto suffix = resolve_suffix(strip_spaces(symbol));
    if (!suffix) {
        throw Error(ErrorKind::UnknownUnit, "unknown unit '" + std::string(symbol) + "'");
    }
    if (!suffix->base) {
        if (suffix->prefix_exponent) {
            throw Error(ErrorKind::UnknownUnit, "prefix without unit '" + std::string(symbol) + "'");
        }
        return Unit::dimensionless();
    }
    return make_unit(*suffix->base, suffix->prefix_exponent.value_or(0));
}

bool UnitRegistry::is_unit_symbol(std::string_view symbol) const {
    const auto suffix = resolve_suffix(strip_spaces(symbol));
    return suffix && suffix->base;
}

Quantity UnitRegistry::make_quantity(const Decimal& number, const Suffix& suffix, std::string raw) const {
    const int exponent = suffix.prefix_exponent.value_or(0);
    if (!suffix.base) {
        // A bare prefix on a unitless number scales the value itself.
        return Quantity{number * Decimal::pow10(exponent), Unit::dimensionless(), std::move(raw)};
    }
    return Quantity{number, make_unit(*suffix.base, exponent), std::move(raw)};
}

Quantity UnitRegistry::parse_quantity(std::string_view text) const {
    const std::string trimmed = trim(text);
    if (trimmed.empty()) {
        throw Error(ErrorKind::UnparseableQuantity, "empty quantity");
    }
    const std::size_t length = number_length(trimmed);
    if (length == 0) {
        throw Error(ErrorKind::UnparseableQuantity, "no numeric value in '" + trimmed + "'");
    }
    const auto number = Decimal::parse(std::string_view(trimmed).substr(0, length));
    if (!number) {
        throw Error(ErrorKind::UnparseableQuantity, "bad number in '" + trimmed + "'");
    }
    const std::string unit_token = strip_spaces(std::string_view(trimmed).substr(length));
    // Unit symbols never hold digits; "1.1O3 V" is a mistyped number.
    if (std::any_of(unit_token.begin(), unit_token.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw Error(ErrorKind::UnparseableQuantity, "malformed number in '" + trimmed + "'");
    }
    const auto suffix = resolve_suffix(unit_token);
    if (!suffix) {
        throw Error(ErrorKind::UnknownUnit, "unknown unit '" + unit_token + "' in '" + trimmed + "'");
    }
    return make_quantity(*number, *suffix, std::string(text));
}

AcceptanceLimits UnitRegistry::parse_acceptance_limits(std::string_view text) const {
    const std::string raw(text);
    const std::string trimmed = trim(text);
    if (trimmed.empty()) {
        throw Error(ErrorKind::UnparseableRange, "empty acceptance limits");
    }
    const auto resolve = [&](const std::string& token) {
        auto suffix = resolve_suffix(token);
        if (!suffix) {
            throw Error(ErrorKind::UnparseableRange, "unknown unit '" + token + "' in '" + raw + "'");
        }
        return *suffix;
    };

    // One-sided forms.
    for (const auto& [op, kind] : std::array<std::pair<std::string_view, LimitKind>, 4>{
             {{">=", LimitKind::AtLeast}, {kGreaterEqual, LimitKind::AtLeast}, {"<=", LimitKind::AtMost},
              {kLessEqual, LimitKind::AtMost}}}) {
        if (!starts_with(trimmed, op)) {
            continue;
        }
        const Endpoint endpoint = split_endpoint(std::string_view(trimmed).substr(op.size()), raw);
        Quantity bound = make_quantity(endpoint.number, resolve(endpoint.suffix), trim(trimmed.substr(op.size())));
        AcceptanceLimits limits{kind, std::nullopt, std::nullopt, raw};
        (kind == LimitKind::AtLeast ? limits.lower : limits.upper) = std::move(bound);
        return limits;
    }

    std::string first_text;
    std::string second_text;
    std::string trailing;
    if (trimmed.front() == '[') {
        const auto close = trimmed.find(']');
        if (close == std::string::npos) {
            throw Error(ErrorKind::UnparseableRange, "unterminated '[' in '" + raw + "'");
        }
        const auto inner = split(std::string_view(trimmed).substr(1, close - 1), ',');
        if (inner.size() != 2) {
            throw Error(ErrorKind::UnparseableRange, "expected two bounds in '" + raw + "'");
        }
        first_text = inner[0];
        second_text = inner[1];
        trailing = strip_spaces(std::string_view(trimmed).substr(close + 1));
    } else {
        // "a - b U": the first bound is a number plus a suffix without spaces or dashes.
        const std::size_t length = number_length(trimmed);
        if (length == 0) {
            throw Error(ErrorKind::UnparseableRange, "unrecognized range syntax '" + raw + "'");
        }
        std::size_t pos = length;
        while (pos < trimmed.size() && is_space(trimmed[pos])) {
            ++pos;
        }
        while (pos < trimmed.size() && !is_space(trimmed[pos]) &&
               std::none_of(kDashes.begin(), kDashes.end(),
                            [&](std::string_view d) { return starts_with(std::string_view(trimmed).substr(pos), d); })) {
            ++pos;
        }
        first_text = trimmed.substr(0, pos);
        while (pos < trimmed.size() && is_space(trimmed[pos])) {
            ++pos;
        }
        const auto dash = std::find_if(kDashes.begin(), kDashes.end(), [&](std::string_view d) {
            return starts_with(std::string_view(trimmed).substr(pos), d);
        });
        if (dash == kDashes.end()) {
            throw Error(ErrorKind::UnparseableRange, "unrecognized range syntax '" + raw + "'");
        }
        second_text = trimmed.substr(pos + dash->size());
    }

    const Endpoint first = split_endpoint(first_text, raw);
    const Endpoint second = split_endpoint(second_text, raw);
    Suffix first_suffix = resolve(first.suffix);
    Suffix second_suffix = resolve(second.suffix);

    // A trailing unit (or, without one, the other bound's unit) completes bounds that lack one.
    std::optional<Suffix> fallback;
    if (!trailing.empty()) {
        fallback = resolve(trailing);
    } else if (second_suffix.base) {
        fallback = second_suffix;
    } else if (first_suffix.base) {
        fallback = first_suffix;
    }
    const auto complete = [&](Suffix suffix) {
        if (suffix.base || !fallback) {
            if (suffix.base && fallback && fallback->base && fallback->base->dimension != suffix.base->dimension) {
                throw Error(ErrorKind::UnparseableRange, "bounds disagree on dimension in '" + raw + "'");
            }
            return suffix;
        }
        if (!suffix.prefix_exponent) {
            suffix.prefix_exponent = fallback->prefix_exponent;
        }
        suffix.base = fallback->base;
        return suffix;
    };
    first_suffix = complete(first_suffix);
    second_suffix = complete(second_suffix);

    AcceptanceLimits limits{LimitKind::ClosedInterval, make_quantity(first.number, first_suffix, trim(first_text)),
                            make_quantity(second.number, second_suffix, trim(second_text)), raw};
    if (limits.lower->dimension() != limits.upper->dimension()) {
        throw Error(ErrorKind::UnparseableRange, "bounds disagree on dimension in '" + raw + "'");
    }
    if (limits.lower->base_value() > limits.upper->base_value()) {
        throw Error(ErrorKind::InvertedInterval, "lower bound exceeds upper bound in '" + raw + "'");
    }
    return limits;
}

SuccessMark UnitRegistry::parse_success_mark(std::string_view text) const {
    const std::string token = to_lower_ascii(trim(text));
    const bool pass = std::find(pass_tokens_.begin(), pass_tokens_.end(), token) != pass_tokens_.end();
    return SuccessMark{pass ? Mark::Pass : Mark::Fail, std::string(text)};
}

Quantity parse_quantity(std::string_view text, const UnitRegistry& registry) {
    return registry.parse_quantity(text);
}

AcceptanceLimits parse_acceptance_limits(std::string_view text, const UnitRegistry& registry) {
    return registry.parse_acceptance_limits(text);
}

SuccessMark parse_success_mark(std::string_view text, const UnitRegistry& registry) {
    return registry.parse_success_mark(text);
}

Quantity convert(const Quantity& q, const Unit& target) {
    if (q.dimension() == Dimension::Dimensionless) {
        return Quantity{q.value, target, q.raw};
    }
    if (q.dimension() != target.dimension) {
        throw Error(ErrorKind::DimensionMismatch, "cannot convert " + std::string(to_string(q.dimension())) +
                                                      " to " + std::string(to_string(target.dimension)));
    }
    const auto value = q.base_value().divide_exact(target.scale);
    if (!value) {
        throw Error(ErrorKind::InexactConversion, "scale ratio does not terminate");
    }
    return Quantity{*value, target, q.raw};
}

std::string format_quantity(const Quantity& q) {
    if (q.unit.symbol.empty()) {
        return q.value.to_string();
    }
    return q.value.to_string() + " " + q.unit.symbol;
}

std::string format_limits(const AcceptanceLimits& limits) {
    switch (limits.kind) {
        case LimitKind::AtLeast: return ">= " + format_quantity(*limits.lower);
        case LimitKind::AtMost: return "<= " + format_quantity(*limits.upper);
        case LimitKind::ClosedInterval: break;
    }
    const Quantity& lo = *limits.lower;
    const Quantity& hi = *limits.upper;
    if (lo.unit == hi.unit) {
        std::string out = "[" + lo.value.to_string() + ", " + hi.value.to_string() + "]";
        return lo.unit.symbol.empty() ? out : out + " " + lo.unit.symbol;
    }
    return "[" + format_quantity(lo) + ", " + format_quantity(hi) + "]";
}

}  // namespace reportkg::units
