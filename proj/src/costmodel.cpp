#include "reportkg/costmodel.hpp"

#include "reportkg/error.hpp"

#include <boost/rational.hpp>

#include <cctype>
#include <sstream>

namespace reportkg::cost {

namespace {

std::int64_t floor_of(const Rational& value) {
    std::int64_t q = value.numerator() / value.denominator();
    if (value.numerator() % value.denominator() != 0 && value.numerator() < 0) {
        --q;
    }
    return q;
}

std::string savings_percent(const EffortPoint& point) {
    if (point.asis.numerator() == 0) {
        return "—";
    }
    const Rational ratio = (point.asis - point.kgllm) / point.asis * 100;
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << boost::rational_cast<double>(ratio) << '%';
    return out.str();
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const std::string value = trim(text);
    if (const auto slash = value.find('/'); slash != std::string::npos) {
        const Rational numerator = parse_rational(value.substr(0, slash));
        const Rational denominator = parse_rational(value.substr(slash + 1));
        if (denominator.numerator() == 0) {
            throw Error(ErrorKind::InvalidCostInputs, "zero denominator in '" + value + "'");
        }
        return numerator / denominator;
    }
    std::int64_t numerator = 0;
    std::int64_t denominator = 1;
    bool negative = false;
    bool fraction = false;
    bool digits = false;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const char c = value[i];
        if (i == 0 && (c == '-' || c == '+')) {
            negative = c == '-';
        } else if (c == '.' && !fraction) {
            fraction = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            numerator = numerator * 10 + (c - '0');
            denominator *= fraction ? 10 : 1;
            digits = true;
        } else {
            digits = false;
            break;
        }
    }
    if (!digits) {
        throw Error(ErrorKind::InvalidCostInputs, "not a number: '" + value + "'");
    }
    return Rational(negative ? -numerator : numerator, denominator);
}

std::string format_rational(const Rational& value) {
    // Exact decimal when the denominator allows it (2^a 5^b), else "p/q".
    std::int64_t q = value.denominator();
    int places = 0;
    std::int64_t scale = 1;
    while (q % 10 == 0 || q % 2 == 0 || q % 5 == 0) {
        if (q % 10 == 0) {
            q /= 10;
        } else if (q % 2 == 0) {
            q /= 2;
        } else {
            q /= 5;
        }
        ++places;
        scale *= 10;
    }
    if (q != 1) {
        return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
    }
    const Rational scaled = value * scale;
    std::int64_t units = scaled.numerator();
    std::string sign = units < 0 ? "-" : "";
    units = units < 0 ? -units : units;
    std::string digits = std::to_string(units);
    if (places == 0) {
        return sign + digits;
    }
    if (static_cast<int>(digits.size()) <= places) {
        digits.insert(0, static_cast<std::size_t>(places + 1) - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    while (digits.back() == '0') {
        digits.pop_back();
    }
    if (digits.back() == '.') {
        digits.pop_back();
    }
    return sign + digits;
}

CostCoefficients CostCoefficients::defaults() {
    // Output of tools/fit_cost_defaults with FitOptions{}.
    return CostCoefficients{Rational(1, 4), Rational(3, 4), Rational(295, 4), Rational(31, 2), Rational(1, 4)};
}

CostCoefficients CostCoefficients::from_config(const KeyValueConfig& config) {
    CostCoefficients c = defaults();
    const auto read = [&](const char* key, Rational& target) {
        if (const auto value = config.get(key)) {
            target = parse_rational(*value);
        }
    };
    read("cost.template", c.template_cost);
    read("cost.manual_per_test", c.manual_per_test);
    read("cost.setup", c.setup);
    read("cost.annotation", c.annotation);
    read("cost.residual_per_test", c.residual_per_test);
    c.validate();
    return c;
}

void CostCoefficients::validate() const {
    for (const auto& value : {template_cost, manual_per_test, setup, annotation, residual_per_test}) {
        if (value < 0) {
            throw Error(ErrorKind::InvalidCostInputs, "cost coefficients must be non-negative");
        }
    }
}

Rational effort_asis(const CostInputs& in, const CostCoefficients& c) {
    return c.template_cost * in.templates + c.manual_per_test * (in.templates * in.reports * in.tests_per_report);
}

Rational effort_kgllm(const CostInputs& in, const CostCoefficients& c) {
    return c.setup + c.annotation * in.templates + c.residual_per_test * (in.templates * in.reports * in.tests_per_report);
}

std::int64_t break_even(std::int64_t templates, std::int64_t tests_per_report, const CostCoefficients& c) {
    if (templates < 1 || tests_per_report < 1) {
        throw Error(ErrorKind::InvalidCostInputs, "templates and tests per report must be at least 1");
    }
    if (!(c.manual_per_test > c.residual_per_test)) {
        throw Error(ErrorKind::NoBreakEven, "manual per-test cost must exceed the residual per-test cost");
    }
    // kgllm < asis  <=>  r > x
    const Rational x = (c.setup / templates + c.annotation - c.template_cost) /
                       ((c.manual_per_test - c.residual_per_test) * tests_per_report);
    return std::max<std::int64_t>(1, floor_of(x) + 1);
}

std::vector<EffortPoint> effort_curve(std::int64_t templates, std::int64_t tests_per_report, std::int64_t max_reports,
                                      const CostCoefficients& c) {
    std::vector<EffortPoint> out;
    for (std::int64_t r = 0; r <= max_reports; ++r) {
        const CostInputs inputs{templates, r, tests_per_report};
        out.push_back(EffortPoint{r, effort_asis(inputs, c), effort_kgllm(inputs, c)});
    }
    return out;
}

std::string render_curve_text(const std::vector<EffortPoint>& curve, std::int64_t break_even_reports) {
    std::ostringstream out;
    out << "reports        AS-IS       KG+LLM   savings\n";
    for (const auto& point : curve) {
        char line[128];
        std::snprintf(line, sizeof line, "%7lld %12s %12s %9s%s\n", static_cast<long long>(point.reports),
                      format_rational(point.asis).c_str(), format_rational(point.kgllm).c_str(),
                      savings_percent(point).c_str(), point.reports == break_even_reports ? "  * break-even" : "");
        out << line;
    }
    return out.str();
}

std::string render_curve_csv(const std::vector<EffortPoint>& curve, std::int64_t break_even_reports) {
    std::ostringstream out;
    out << "reports,asis,kgllm,break_even\n";
    for (const auto& point : curve) {
        out << point.reports << ',' << format_rational(point.asis) << ',' << format_rational(point.kgllm) << ','
            << (point.reports == break_even_reports ? 1 : 0) << '\n';
    }
    return out.str();
}

std::optional<CostCoefficients> fit_defaults(const FitOptions& options) {
    const auto grid = [&](const Rational& max) {
        std::vector<Rational> values;
        for (Rational v = options.step; v <= max; v += options.step) {
            values.push_back(v);
        }
        return values;
    };
    const auto per_test = grid(options.max_per_test);
    const auto per_template = grid(options.max_per_template);
    const auto setups = grid(options.max_setup);
    const std::int64_t t = options.tests_per_report;

    for (const auto& manual : per_test) {
        for (const auto& residual : per_test) {
            if (!(residual < manual)) {
                break;
            }
            for (const auto& tmpl : per_template) {
                for (const auto& annotation : per_template) {
                    for (const auto& setup : setups) {
                        const CostCoefficients c{tmpl, manual, setup, annotation, residual};
                        bool ok = true;
                        bool overshoot = false;
                        for (const auto& target : options.targets) {
                            const std::int64_t reports = break_even(target.templates, t, c);
                            ok = ok && reports == target.reports;
                            overshoot = overshoot || reports > target.reports;
                        }
                        if (overshoot) {
                            break;  // break-even only grows with setup
                        }
                        if (!ok) {
                            continue;
                        }
                        const CostInputs at{options.savings_templates, options.savings_reports, t};
                        const Rational asis = effort_asis(at, c);
                        if (asis - effort_kgllm(at, c) > options.min_savings * asis) {
                            return c;
                        }
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace reportkg::cost
