// Recovers integer confusion matrices from published, rounded benchmark metrics.
//
// For every (model, test type) row, enumerates all (tp, fp, fn, tn) with the
// published number of tests whose accuracy, precision and recall round to the
// printed values, then picks the per-type combination whose pooled counts also
// reproduce the model's overall row. Reports whether micro- or macro-averaging
// explains each overall row, and can write a replay fixture that makes a backend
// reproduce one model's matrices on the benchmark dataset.

#include "reportkg/bench.hpp"
#include "reportkg/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace bench = reportkg::bench;

namespace {

std::string counts_text(const bench::ConfusionCounts& c) {
    std::ostringstream out;
    out << "(tp " << c.tp << ", fp " << c.fp << ", fn " << c.fn << ", tn " << c.tn << ")";
    return out.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw reportkg::Error(reportkg::ErrorKind::IoError, "cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const bench::PublishedRow* find_row(const std::vector<bench::PublishedRow>& rows, const std::string& model,
                                    const std::string& type) {
    for (const auto& row : rows) {
        if (row.model == model && row.test_type == type) {
            return &row;
        }
    }
    return nullptr;
}

// Published value check for one metric; prints the mismatch when there is one.
bool check(const std::string& what, const std::optional<bench::Rational>& value, const std::string& printed) {
    const bool ok = bench::within_rounding(value, printed);
    if (!ok) {
        std::cout << "    MISMATCH " << what << ": computed " << bench::render_metric(value) << " ("
                  << (value ? std::to_string(boost::rational_cast<double>(*value)) : std::string("undefined"))
                  << "), published " << printed << '\n';
    }
    return ok;
}

std::optional<bench::Rational> mean(const std::vector<std::optional<bench::Rational>>& values) {
    bench::Rational sum = 0;
    for (const auto& v : values) {
        if (!v) {
            return std::nullopt;
        }
        sum += *v;
    }
    return sum / static_cast<std::int64_t>(values.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Derive confusion matrices from published benchmark metrics"};
    std::string published_path = "data/bench/published_results.csv";
    std::string dataset_path;
    std::string replay_model;
    std::string replay_out;
    app.add_option("published", published_path, "CSV: model,test_type,tests,accuracy,precision,recall,f1");
    app.add_option("--dataset", dataset_path, "benchmark dataset for --replay-out");
    app.add_option("--replay-model", replay_model, "model whose matrices the replay fixture reproduces");
    app.add_option("--replay-out", replay_out, "write a replay fixture (JSONL)");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto published = bench::parse_published(slurp(published_path));
        const auto derivations = bench::derive(published);
        bool all_reproduced = true;

        for (const auto& d : derivations) {
            std::cout << d.model << '\n';
            bench::ConfusionCounts pooled;
            std::vector<std::optional<bench::Rational>> acc, prec, rec, f1;
            for (std::size_t i = 0; i < d.test_types.size(); ++i) {
                const auto& type = d.test_types[i];
                std::cout << "  " << type << ": " << d.candidates[i].size() << " candidate(s)";
                for (std::size_t k = 0; k < d.candidates[i].size() && k < 4; ++k) {
                    std::cout << ' ' << counts_text(d.candidates[i][k]);
                }
                if (d.candidates[i].size() > 4) {
                    std::cout << " ...";
                }
                std::cout << '\n';
                if (d.chosen.size() <= i) {
                    all_reproduced = false;
                    std::cout << "    no matrix matches accuracy, precision and recall\n";
                    continue;
                }
                const auto& chosen = d.chosen[i];
                pooled += chosen;
                const auto m = bench::metrics(chosen);
                acc.push_back(m.accuracy);
                prec.push_back(m.precision);
                rec.push_back(m.recall);
                f1.push_back(m.f1);
                std::cout << "    chosen " << counts_text(chosen) << " -> " << bench::render_metric(m.accuracy) << ' '
                          << bench::render_metric(m.precision) << ' ' << bench::render_metric(m.recall) << ' '
                          << bench::render_metric(m.f1) << '\n';
                const auto* row = find_row(published, d.model, type);
                bool ok = check("f1", m.f1, row->f1);
                all_reproduced = all_reproduced && ok;
            }
            if (const auto* overall = find_row(published, d.model, "Overall")) {
                const auto m = bench::metrics(pooled);
                std::cout << "  Overall (micro, pooled " << counts_text(pooled) << "): " << bench::render_metric(m.accuracy)
                          << ' ' << bench::render_metric(m.precision) << ' ' << bench::render_metric(m.recall) << ' '
                          << bench::render_metric(m.f1) << '\n';
                bool ok = check("accuracy", m.accuracy, overall->accuracy);
                ok = check("precision", m.precision, overall->precision) && ok;
                ok = check("recall", m.recall, overall->recall) && ok;
                ok = check("f1", m.f1, overall->f1) && ok;
                all_reproduced = all_reproduced && ok;
                std::cout << "    per-type combinations consistent with the overall row: " << d.consistent_choices << '\n';

                const bool macro = bench::within_rounding(mean(acc), overall->accuracy) &&
                                   bench::within_rounding(mean(prec), overall->precision) &&
                                   bench::within_rounding(mean(rec), overall->recall) &&
                                   bench::within_rounding(mean(f1), overall->f1);
                std::cout << "    micro-average " << (ok ? "matches" : "does not match") << ", macro-average "
                          << (macro ? "matches" : "does not match") << '\n';
            }

            if (!replay_out.empty() && d.model == replay_model) {
                if (dataset_path.empty()) {
                    std::cerr << "--replay-out needs --dataset\n";
                    return 2;
                }
                std::map<std::string, bench::ConfusionCounts> counts;
                for (std::size_t i = 0; i < d.chosen.size(); ++i) {
                    counts[d.test_types[i]] = d.chosen[i];
                }
                const auto records = bench::reconstruct_replay(bench::load_dataset(dataset_path), counts);
                reportkg::llm::write_replay_fixture(replay_out, records);
                std::cout << "  wrote " << records.size() << " replay records to " << replay_out << '\n';
            }
        }
        std::cout << (all_reproduced ? "all published values reproduced\n"
                                     : "some published values are not reproducible by any integer matrix\n");
        return all_reproduced ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
}
