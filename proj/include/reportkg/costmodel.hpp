#pragma once

#include "reportkg/config.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::cost {

using Rational = boost::rational<std::int64_t>;

struct CostInputs {
    std::int64_t templates = 1;         // n
    std::int64_t reports = 1;           // r, per template; 0 is allowed
    std::int64_t tests_per_report = 30; // t
};

/// Person-days.
///
///   AS-IS  = n*template + n*r*t*manual_per_test
///   KG+LLM = setup + n*annotation + n*r*t*residual_per_test
struct CostCoefficients {
    Rational template_cost;       // authoring one report template
    Rational manual_per_test;     // fill, check and extract one test by hand
    Rational setup;               // pipeline and ontology core, shared by all templates
    Rational annotation;          // modeling and tagging one template
    Rational residual_per_test;   // review left over per test once automated

    /// Compiled-in values found by `fit_defaults` (see tools/fit_cost_defaults).
    static CostCoefficients defaults();
    /// Keys cost.template, cost.manual_per_test, cost.setup, cost.annotation,
    /// cost.residual_per_test; missing keys keep the defaults.
    static CostCoefficients from_config(const KeyValueConfig& config);
    /// Throws InvalidCostInputs on negative values.
    void validate() const;

    friend bool operator==(const CostCoefficients&, const CostCoefficients&) = default;
};

/// Parses "73.75", "3/4" or "12".
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& value);

Rational effort_asis(const CostInputs& inputs, const CostCoefficients& c);
Rational effort_kgllm(const CostInputs& inputs, const CostCoefficients& c);

/// Smallest r >= 1 with effort_kgllm < effort_asis. Throws NoBreakEven unless
/// manual_per_test > residual_per_test, InvalidCostInputs for n < 1 or t < 1.
std::int64_t break_even(std::int64_t templates, std::int64_t tests_per_report, const CostCoefficients& c);

struct EffortPoint {
    std::int64_t reports = 0;
    Rational asis;
    Rational kgllm;
};

std::vector<EffortPoint> effort_curve(std::int64_t templates, std::int64_t tests_per_report, std::int64_t max_reports,
                                      const CostCoefficients& c);

/// Columns reports, asis, kgllm, savings; break-even row marked with '*' in the text form.
std::string render_curve_text(const std::vector<EffortPoint>& curve, std::int64_t break_even_reports);
std::string render_curve_csv(const std::vector<EffortPoint>& curve, std::int64_t break_even_reports);

struct BreakEvenTarget {
    std::int64_t templates;
    std::int64_t reports;
};

struct FitOptions {
    std::int64_t tests_per_report = 30;
    std::vector<BreakEvenTarget> targets = {{1, 6}, {5, 3}, {10, 2}};
    Rational step{1, 4};
    Rational max_per_test{2};
    Rational max_per_template{20};
    Rational max_setup{200};
    /// Savings required at (n = savings_templates, r = savings_reports); savings
    /// grow with n, so one point covers every larger n.
    Rational min_savings{1, 2};
    std::int64_t savings_templates = 5;
    std::int64_t savings_reports = 100;
};

/// Grid search over strictly positive multiples of `step`, in the order
/// manual_per_test, residual_per_test, template, annotation, setup (each ascending);
/// returns the first set meeting every target and the savings floor.
std::optional<CostCoefficients> fit_defaults(const FitOptions& options = {});

}  // namespace reportkg::cost
