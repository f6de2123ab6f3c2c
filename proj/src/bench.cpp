#include "reportkg/bench.hpp"

#include "reportkg/csv.hpp"
#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace reportkg::bench {

using compliance::Verdict;

namespace {

const std::vector<std::string> kDatasetColumns = {"id", "test_type", "measured_raw", "limits_raw", "success_raw"};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Exact value of a plain decimal such as "0.981" or "1".
Rational parse_printed(std::string_view text) {
    const std::string trimmed = trim(text);
    std::int64_t numerator = 0;
    std::int64_t denominator = 1;
    bool fraction = false;
    for (char c : trimmed) {
        if (c == '.' && !fraction) {
            fraction = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            numerator = numerator * 10 + (c - '0');
            if (fraction) {
                denominator *= 10;
            }
        } else {
            throw Error(ErrorKind::ParseError, "not a plain decimal: '" + trimmed + "'");
        }
    }
    return Rational(numerator, denominator);
}

std::optional<Rational> ratio(std::uint64_t numerator, std::uint64_t denominator) {
    if (denominator == 0) {
        return std::nullopt;
    }
    return Rational(static_cast<std::int64_t>(numerator), static_cast<std::int64_t>(denominator));
}

nlohmann::json counts_json(const ConfusionCounts& counts) {
    return {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}};
}

nlohmann::json metric_json(const std::optional<Rational>& value) {
    if (!value) {
        return nullptr;
    }
    return render_metric(value);
}

}  // namespace

Observation DatasetRow::to_observation() const {
    Observation observation;
    observation.id = id;
    observation.test_type = test_type;
    observation.label = id;
    observation.result_raw = measured_raw;
    observation.limits_raw = limits_raw;
    observation.success_raw = success_raw;
    return observation;
}

std::vector<DatasetRow> parse_dataset(std::string_view csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) {
        return {};
    }
    const auto& header = rows.front();
    std::vector<std::size_t> index;
    for (const auto& column : kDatasetColumns) {
        const auto it = std::find(header.begin(), header.end(), column);
        if (it == header.end()) {
            throw Error(ErrorKind::SchemaViolation, "dataset is missing column " + column);
        }
        index.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::vector<DatasetRow> out;
    std::set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw Error(ErrorKind::SchemaViolation, "dataset line " + std::to_string(r + 1) + " has " +
                                                        std::to_string(row.size()) + " cells");
        }
        DatasetRow entry{row[index[0]], row[index[1]], row[index[2]], row[index[3]], row[index[4]]};
        if (!ids.insert(entry.id).second) {
            throw Error(ErrorKind::IdMismatch, "duplicate dataset id " + entry.id);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<DatasetRow> load_dataset(const std::filesystem::path& path) { return parse_dataset(slurp(path)); }

std::string write_dataset(const std::vector<DatasetRow>& rows) {
    std::vector<std::vector<std::string>> table{kDatasetColumns};
    for (const auto& row : rows) {
        table.push_back({row.id, row.test_type, row.measured_raw, row.limits_raw, row.success_raw});
    }
    return write_csv(table);
}

Verdict ground_truth(const DatasetRow& row, const units::UnitRegistry& registry) {
    const auto assessment = compliance::assess_row(row.to_observation(), registry);
    if (assessment.verdict == Verdict::Unknown) {
        throw Error(ErrorKind::UnknownVerdict, "row " + row.id + " has no oracle verdict: " + assessment.detail);
    }
    return assessment.verdict;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
    return *this;
}

Confusion confusion(const std::vector<llm::LLMJudgement>& judgements,
                    const std::vector<std::pair<std::string, Truth>>& truths, UnparseablePolicy policy) {
    std::map<std::string, const llm::LLMJudgement*> by_id;
    for (const auto& judgement : judgements) {
        if (!by_id.emplace(judgement.observation_id, &judgement).second) {
            throw Error(ErrorKind::IdMismatch, "two judgements for " + judgement.observation_id);
        }
    }
    Confusion out;
    std::set<std::string> seen;
    for (const auto& [id, truth] : truths) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw Error(ErrorKind::IdMismatch, "no judgement for " + id);
        }
        if (!seen.insert(id).second) {
            throw Error(ErrorKind::IdMismatch, "duplicate ground truth for " + id);
        }
        if (truth.verdict == Verdict::Unknown) {
            throw Error(ErrorKind::UnknownVerdict, "ground truth for " + id + " is Unknown");
        }
        if (out.per_type.count(truth.test_type) == 0) {
            out.test_types.push_back(truth.test_type);
        }
        ConfusionCounts& counts = out.per_type[truth.test_type];
        const bool positive = truth.verdict == Verdict::OutOfRange;
        switch (it->second->verdict) {
            case llm::JudgementVerdict::True:  // predicted InRange
                ++(positive ? counts.fn : counts.tn);
                break;
            case llm::JudgementVerdict::False:  // predicted OutOfRange
                ++(positive ? counts.tp : counts.fp);
                break;
            case llm::JudgementVerdict::Unparseable:
                ++out.unparseable;
                if (policy == UnparseablePolicy::CountAsWrong) {
                    ++(positive ? counts.fn : counts.fp);
                }
                break;
        }
    }
    if (seen.size() != by_id.size()) {
        for (const auto& [id, judgement] : by_id) {
            if (seen.count(id) == 0) {
                throw Error(ErrorKind::IdMismatch, "judgement " + id + " has no ground truth");
            }
        }
    }
    for (const auto& type : out.test_types) {
        out.overall += out.per_type[type];
    }
    return out;
}

Metrics metrics(const ConfusionCounts& counts) {
    Metrics m;
    m.accuracy = ratio(counts.tp + counts.tn, counts.total());
    m.precision = ratio(counts.tp, counts.tp + counts.fp);
    m.recall = ratio(counts.tp, counts.tp + counts.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall).numerator() != 0) {
        m.f1 = Rational(2) * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

std::string render_metric(const std::optional<Rational>& value) {
    if (!value) {
        return "—";
    }
    const std::int64_t p = value->numerator();
    const std::int64_t q = value->denominator();
    const std::int64_t thousandths = (2 * 1000 * p + q) / (2 * q);
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%lld.%03lld", static_cast<long long>(thousandths / 1000),
                  static_cast<long long>(thousandths % 1000));
    return buffer;
}

std::string display_name(std::string_view test_type) {
    std::string out;
    for (std::size_t i = 0; i < test_type.size(); ++i) {
        const auto c = static_cast<unsigned char>(test_type[i]);
        const bool boundary =
            i > 0 && std::isupper(c) && test_type[i - 1] != ' ' &&
            (std::islower(static_cast<unsigned char>(test_type[i - 1])) ||
             (i + 1 < test_type.size() && std::islower(static_cast<unsigned char>(test_type[i + 1]))));
        if (boundary) {
            out.push_back(' ');
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::vector<BenchRow> score(const std::string& model, const Confusion& confusion) {
    std::vector<BenchRow> rows;
    for (const auto& type : confusion.test_types) {
        const auto& counts = confusion.per_type.at(type);
        rows.push_back(BenchRow{model, display_name(type), counts.total(), metrics(counts)});
    }
    rows.push_back(BenchRow{model, "Overall", confusion.overall.total(), metrics(confusion.overall)});
    return rows;
}

BenchReport bench_run(const std::vector<DatasetRow>& dataset, llm::ChatBackend& backend, const BenchOptions& options) {
    if (dataset.empty()) {
        throw Error(ErrorKind::EmptyDataset, "benchmark dataset has no rows");
    }
    std::vector<Observation> observations;
    std::map<std::string, Truth> truth_by_id;
    for (const auto& row : dataset) {
        observations.push_back(row.to_observation());
        truth_by_id[row.id] = Truth{row.test_type, ground_truth(row, *options.registry)};
    }
    llm::RowChecker checker(backend, options.prompt_template, options.dispatch);
    const llm::BatchResult batch = checker.check_rows(observations);

    BenchReport report;
    report.failures = batch.failures;
    std::set<std::string> failed;
    for (const auto& [id, error] : batch.failures) {
        failed.insert(id);
        spdlog::warn("benchmark row {} failed: {}", id, error);
    }
    std::vector<std::pair<std::string, Truth>> truths;
    for (const auto& row : dataset) {
        if (failed.count(row.id) == 0) {
            truths.emplace_back(row.id, truth_by_id.at(row.id));
        }
    }
    report.confusion = confusion(batch.judgements, truths, options.policy);
    const std::string model = options.model_label.empty() ? backend.id() : options.model_label;
    report.rows = score(model, report.confusion);
    return report;
}

std::string render_table(const std::vector<BenchRow>& rows) {
    std::vector<std::vector<std::string>> cells{
        {"Model", "Test Type", "#Tests", "Accuracy", "Precision", "Recall", "F1-Score"}};
    for (const auto& row : rows) {
        cells.push_back({row.model, row.test_type, std::to_string(row.tests), render_metric(row.metrics.accuracy),
                         render_metric(row.metrics.precision), render_metric(row.metrics.recall),
                         render_metric(row.metrics.f1)});
    }
    // Display width: "—" is three bytes but one column.
    const auto width = [](const std::string& text) {
        std::size_t n = 0;
        for (unsigned char c : text) {
            n += (c & 0xC0) != 0x80 ? 1 : 0;
        }
        return n;
    };
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            widths[i] = std::max(widths[i], width(line[i]));
        }
    }
    std::string out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            const std::string& text = cells[r][i];
            const std::string pad(widths[i] - width(text), ' ');
            out += i < 2 ? text + pad : pad + text;
            out += i + 1 < cells[r].size() ? "  " : "\n";
        }
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : widths) {
                total += w + 2;
            }
            out += std::string(total - 2, '-') + "\n";
        }
    }
    return out;
}

std::string render_json(const BenchReport& report) {
    nlohmann::json out;
    out["partial"] = report.partial();
    out["unparseable"] = report.confusion.unparseable;
    out["failures"] = nlohmann::json::array();
    for (const auto& [id, error] : report.failures) {
        out["failures"].push_back({{"id", id}, {"error", error}});
    }
    out["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        const auto it = std::find_if(report.confusion.test_types.begin(), report.confusion.test_types.end(),
                                     [&](const std::string& type) { return display_name(type) == row.test_type; });
        const ConfusionCounts& counts =
            it == report.confusion.test_types.end() ? report.confusion.overall : report.confusion.per_type.at(*it);
        out["rows"].push_back({{"model", row.model},
                               {"test_type", row.test_type},
                               {"tests", row.tests},
                               {"accuracy", metric_json(row.metrics.accuracy)},
                               {"precision", metric_json(row.metrics.precision)},
                               {"recall", metric_json(row.metrics.recall)},
                               {"f1", metric_json(row.metrics.f1)},
                               {"counts", counts_json(counts)}});
    }
    return out.dump(2);
}

std::vector<PublishedRow> parse_published(std::string_view csv_text) {
    auto rows = parse_csv(csv_text);
    const std::vector<std::string> expected = {"model", "test_type", "tests", "accuracy", "precision", "recall", "f1"};
    if (rows.empty() || rows.front() != expected) {
        throw Error(ErrorKind::SchemaViolation, "published results need columns model,test_type,tests,accuracy,precision,recall,f1");
    }
    std::vector<PublishedRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != expected.size()) {
            throw Error(ErrorKind::SchemaViolation, "published results line " + std::to_string(r + 1) + " is ragged");
        }
        out.push_back(PublishedRow{row[0], row[1], std::stoull(row[2]), row[3], row[4], row[5], row[6]});
    }
    return out;
}

bool within_rounding(const std::optional<Rational>& value, std::string_view printed) {
    if (!value) {
        return false;
    }
    Rational difference = *value - parse_printed(printed);
    if (difference < 0) {
        difference = -difference;
    }
    return difference <= Rational(1, 2000);
}

std::vector<ConfusionCounts> enumerate_confusions(std::uint64_t tests, std::string_view accuracy,
                                                  std::string_view precision, std::string_view recall) {
    std::vector<ConfusionCounts> out;
    for (std::uint64_t tp = 0; tp <= tests; ++tp) {
        for (std::uint64_t fp = 0; tp + fp <= tests; ++fp) {
            for (std::uint64_t fn = 0; tp + fp + fn <= tests; ++fn) {
                const ConfusionCounts counts{tp, fp, fn, tests - tp - fp - fn};
                const Metrics m = metrics(counts);
                if (within_rounding(m.accuracy, accuracy) && within_rounding(m.precision, precision) &&
                    within_rounding(m.recall, recall)) {
                    out.push_back(counts);
                }
            }
        }
    }
    return out;
}

std::vector<Derivation> derive(const std::vector<PublishedRow>& published) {
    std::vector<std::string> models;
    for (const auto& row : published) {
        if (std::find(models.begin(), models.end(), row.model) == models.end()) {
            models.push_back(row.model);
        }
    }
    std::vector<Derivation> out;
    for (const auto& model : models) {
        Derivation d;
        d.model = model;
        const PublishedRow* overall = nullptr;
        for (const auto& row : published) {
            if (row.model != model) {
                continue;
            }
            if (row.test_type == "Overall") {
                overall = &row;
                continue;
            }
            d.test_types.push_back(row.test_type);
            d.candidates.push_back(enumerate_confusions(row.tests, row.accuracy, row.precision, row.recall));
        }
        for (const auto& candidates : d.candidates) {
            d.chosen.push_back(candidates.empty() ? ConfusionCounts{} : candidates.front());
        }
        const bool all_nonempty = std::none_of(d.candidates.begin(), d.candidates.end(),
                                               [](const auto& c) { return c.empty(); });
        if (overall != nullptr && all_nonempty && !d.candidates.empty()) {
            // Odometer over the per-type candidate lists, lexicographic by type order.
            std::vector<std::size_t> index(d.candidates.size(), 0);
            while (true) {
                ConfusionCounts pooled;
                for (std::size_t i = 0; i < index.size(); ++i) {
                    pooled += d.candidates[i][index[i]];
                }
                const Metrics m = metrics(pooled);
                if (within_rounding(m.accuracy, overall->accuracy) && within_rounding(m.precision, overall->precision) &&
                    within_rounding(m.recall, overall->recall) && within_rounding(m.f1, overall->f1)) {
                    if (d.consistent_choices++ == 0) {
                        for (std::size_t i = 0; i < index.size(); ++i) {
                            d.chosen[i] = d.candidates[i][index[i]];
                        }
                    }
                }
                std::size_t i = index.size();
                while (i > 0 && ++index[i - 1] == d.candidates[i - 1].size()) {
                    index[--i] = 0;
                }
                if (i == 0) {
                    break;
                }
            }
            d.overall_consistent = d.consistent_choices > 0;
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> reconstruct_replay(
    const std::vector<DatasetRow>& dataset, const std::map<std::string, ConfusionCounts>& counts,
    const llm::PromptTemplate& prompt_template, const units::UnitRegistry& registry) {
    std::map<std::string, ConfusionCounts> remaining_errors;
    std::map<std::string, ConfusionCounts> actual;
    for (const auto& row : dataset) {
        ConfusionCounts& a = actual[row.test_type];
        ++(ground_truth(row, registry) == Verdict::OutOfRange ? a.tp : a.tn);
    }
    for (const auto& [type, target] : counts) {
        const auto it = actual.find(type);
        if (it == actual.end() || it->second.tp != target.tp + target.fn || it->second.tn != target.tn + target.fp) {
            throw Error(ErrorKind::IdMismatch, "dataset class balance for " + type + " cannot realize the requested counts");
        }
        remaining_errors[type] = ConfusionCounts{0, target.fp, target.fn, 0};
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& row : dataset) {
        const bool positive = ground_truth(row, registry) == Verdict::OutOfRange;
        bool predict_positive = positive;
        if (const auto it = remaining_errors.find(row.test_type); it != remaining_errors.end()) {
            std::uint64_t& budget = positive ? it->second.fn : it->second.fp;
            if (budget > 0) {
                --budget;
                predict_positive = !positive;
            }
        }
        out.emplace_back(prompt_template.render(row.measured_raw, row.limits_raw),
                         predict_positive ? "False. The measured value is outside the acceptance limits."
                                          : "True. The measured value is within the acceptance limits.");
    }
    return out;
}

}  // namespace reportkg::bench
