// Grid search for effort-model coefficients that place the break-even point at
// 6, 3 and 2 reports for 1, 5 and 10 templates (30 tests per report). Prints the
// first coefficient set found as config lines.

#include "reportkg/costmodel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cost = reportkg::cost;

int main(int argc, char** argv) {
    CLI::App app{"Fit default effort-model coefficients"};
    cost::FitOptions options;
    std::string step = "1/4";
    app.add_option("--tests-per-report", options.tests_per_report, "t");
    app.add_option("--step", step, "grid granularity in person-days");
    CLI11_PARSE(app, argc, argv);
    options.step = cost::parse_rational(step);

    const auto found = cost::fit_defaults(options);
    if (!found) {
        std::cerr << "no coefficients on the grid meet the targets\n";
        return 1;
    }
    const auto& c = *found;
    std::cout << "cost.template = " << cost::format_rational(c.template_cost) << '\n'
              << "cost.manual_per_test = " << cost::format_rational(c.manual_per_test) << '\n'
              << "cost.setup = " << cost::format_rational(c.setup) << '\n'
              << "cost.annotation = " << cost::format_rational(c.annotation) << '\n'
              << "cost.residual_per_test = " << cost::format_rational(c.residual_per_test) << '\n';
    for (const auto& target : options.targets) {
        std::cout << "# break_even(n=" << target.templates << ") = "
                  << cost::break_even(target.templates, options.tests_per_report, c) << '\n';
    }
    return 0;
}
