// Writes the synthetic 198-row compliance benchmark (53 POL voltage, 86 internal
// isolation, 59 external isolation rows) with a fixed number of out-of-range rows
// per test type. Output is deterministic for a given seed.

#include "reportkg/bench.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

using reportkg::bench::DatasetRow;

namespace {

std::string fixed(double value, int places) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", places, value);
    return buffer;
}

struct Spec {
    std::string prefix;
    std::string test_type;
    int rows;
    int out_of_range;
};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    DatasetRow pol(bool out) {
        static const double nominal[] = {0.9, 1.0, 1.05, 1.15, 1.2, 1.35, 1.5, 1.8, 2.5, 3.3, 5.0};
        static const double tolerance[] = {0.03, 0.05, 0.1};
        const double v = nominal[pick(std::size(nominal))];
        const double tol = tolerance[pick(std::size(tolerance))];
        const double lo = v * (1 - tol);
        const double hi = v * (1 + tol);
        double measured;
        if (out) {
            const double excess = uniform(0.02, 0.12) * v;
            measured = coin() ? hi + excess : lo - excess;
        } else {
            measured = uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo));
        }
        DatasetRow row;
        const std::size_t limits_form = pick(4);
        switch (limits_form) {
            case 0: row.limits_raw = "[" + fixed(lo, 3) + ", " + fixed(hi, 3) + "] V"; break;
            case 1: row.limits_raw = fixed(lo, 3) + " - " + fixed(hi, 3) + " V"; break;
            case 2: row.limits_raw = "[" + fixed(lo * 1000, 0) + ", " + fixed(hi * 1000, 0) + "] mV"; break;
            default: row.limits_raw = "[" + fixed(lo, 3) + " V, " + fixed(hi, 3) + " V]"; break;
        }
        // A bare number takes the unit of the limits, so only pair it with volts.
        switch (pick(limits_form == 2 ? 2 : 3)) {
            case 0: row.measured_raw = fixed(measured, 3) + " V"; break;
            case 1: row.measured_raw = fixed(measured * 1000, 1) + " mV"; break;
            default: row.measured_raw = fixed(measured, 3); break;
        }
        row.success_raw = out ? (coin() ? "KO" : "-") : "OK";
        return row;
    }

    DatasetRow isolation(bool out) {
        DatasetRow row;
        if (coin()) {
            // one-sided minimum resistance
            static const int minimum[] = {10, 20, 50, 100, 200, 500};
            const int m = minimum[pick(std::size(minimum))];
            const double measured = out ? uniform(0.2, 0.9) * m : uniform(1.2, 40.0) * m;
            row.limits_raw = ">= " + std::to_string(m) + " MΩ";
            row.measured_raw = measured >= 1000 && coin() ? fixed(measured / 1000, 2) + " GΩ" : fixed(measured, 1) + " MΩ";
        } else {
            static const double centre[] = {1.5, 2.2, 4.7, 10.0, 47.0};
            const double c = centre[pick(std::size(centre))];
            const double lo = c * 0.7;
            const double hi = c * 1.3;
            double measured;
            if (out) {
                measured = coin() ? hi * uniform(1.05, 1.4) : lo * uniform(0.6, 0.95);
            } else {
                measured = uniform(lo * 1.02, hi * 0.98);
            }
            switch (pick(3)) {
                case 0: row.limits_raw = fixed(lo, 2) + "M - " + fixed(hi, 2) + "MΩ"; break;
                case 1: row.limits_raw = "[" + fixed(lo, 2) + ", " + fixed(hi, 2) + "] MΩ"; break;
                default: row.limits_raw = "[" + fixed(lo * 1000, 0) + ", " + fixed(hi * 1000, 0) + "] kΩ"; break;
            }
            row.measured_raw = coin() ? fixed(measured, 3) + " MΩ" : fixed(measured * 1000, 0) + " kΩ";
        }
        row.success_raw = out ? "KO" : "OK";
        return row;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin() { return pick(2) == 0; }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    std::mt19937_64 rng_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic compliance benchmark dataset"};
    std::uint64_t seed = 20240301;
    std::string output;
    app.add_option("--seed", seed, "generator seed");
    app.add_option("-o,--output", output, "CSV file (default: stdout)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Spec> specs = {{"POL", "POLVoltage", 53, 10},
                                     {"IST", "InternalIsolation", 86, 3},
                                     {"EST", "ExternalIsolation", 59, 3}};
    Generator gen(seed);
    std::mt19937_64 shuffle_rng(seed ^ 0x5eed);
    std::set<std::pair<std::string, std::string>> prompts;
    std::vector<DatasetRow> rows;
    for (const auto& spec : specs) {
        std::vector<bool> out(static_cast<std::size_t>(spec.rows), false);
        std::fill(out.begin(), out.begin() + spec.out_of_range, true);
        std::shuffle(out.begin(), out.end(), shuffle_rng);
        for (int i = 0; i < spec.rows; ++i) {
            const bool out_of_range = out[static_cast<std::size_t>(i)];
            DatasetRow row;
            do {
                row = spec.prefix == "POL" ? gen.pol(out_of_range) : gen.isolation(out_of_range);
            } while (!prompts.emplace(row.measured_raw, row.limits_raw).second);
            char id[32];
            std::snprintf(id, sizeof id, "%s-%03d", spec.prefix.c_str(), i + 1);
            row.id = id;
            row.test_type = spec.test_type;
            const auto truth = reportkg::bench::ground_truth(row);
            if ((truth == reportkg::compliance::Verdict::OutOfRange) != out_of_range) {
                std::cerr << "generated row " << row.id << " has the wrong verdict: " << row.measured_raw << " vs "
                          << row.limits_raw << '\n';
                return 1;
            }
            rows.push_back(std::move(row));
        }
    }

    const std::string csv = reportkg::bench::write_dataset(rows);
    if (output.empty()) {
        std::cout << csv;
    } else {
        std::ofstream(output, std::ios::binary) << csv;
    }
    return 0;
}
