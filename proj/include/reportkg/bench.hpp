#pragma once

#include "reportkg/compliance.hpp"
#include "reportkg/llm.hpp"
#include "reportkg/model.hpp"
#include "reportkg/units.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::bench {

/// One benchmark row: CSV columns id, test_type, measured_raw, limits_raw, success_raw.
struct DatasetRow {
    std::string id;
    std::string test_type;
    std::string measured_raw;
    std::string limits_raw;
    std::string success_raw;

    Observation to_observation() const;
    friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

std::vector<DatasetRow> parse_dataset(std::string_view csv_text);
std::vector<DatasetRow> load_dataset(const std::filesystem::path& path);
std::string write_dataset(const std::vector<DatasetRow>& rows);

/// Ground truth: the oracle verdict on the raw cells. Throws UnknownVerdict when
/// the oracle cannot decide.
compliance::Verdict ground_truth(const DatasetRow& row,
                                 const units::UnitRegistry& registry = units::UnitRegistry::defaults());

/// Positive class = OutOfRange.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& other);
    friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

enum class UnparseablePolicy { CountAsWrong, Skip };

struct Confusion {
    std::vector<std::string> test_types;  // first-appearance order
    std::map<std::string, ConfusionCounts> per_type;
    ConfusionCounts overall;  // sum of per_type
    std::uint64_t unparseable = 0;
};

struct Truth {
    std::string test_type;
    compliance::Verdict verdict = compliance::Verdict::InRange;
};

/// "True" predicts InRange, "False" predicts OutOfRange. Throws IdMismatch unless
/// every truth has exactly one judgement and vice versa.
Confusion confusion(const std::vector<llm::LLMJudgement>& judgements, const std::vector<std::pair<std::string, Truth>>& truths,
                    UnparseablePolicy policy = UnparseablePolicy::CountAsWrong);

using Rational = boost::rational<std::int64_t>;

struct Metrics {
    std::optional<Rational> accuracy;
    std::optional<Rational> precision;
    std::optional<Rational> recall;
    std::optional<Rational> f1;
};

/// Exact metrics; zero denominators give nullopt (Undefined).
Metrics metrics(const ConfusionCounts& counts);

/// Half-up to three decimals ("0.947"); Undefined renders as "—".
std::string render_metric(const std::optional<Rational>& value);

/// "POLVoltage" -> "POL Voltage".
std::string display_name(std::string_view test_type);

struct BenchRow {
    std::string model;
    std::string test_type;  // display name, or "Overall"
    std::uint64_t tests = 0;
    Metrics metrics;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    Confusion confusion;
    std::vector<std::pair<std::string, std::string>> failures;  // (row id, error)
    bool partial() const { return !failures.empty(); }
};

struct BenchOptions {
    std::string model_label;
    llm::PromptTemplate prompt_template;
    llm::DispatchOptions dispatch;
    UnparseablePolicy policy = UnparseablePolicy::CountAsWrong;
    const units::UnitRegistry* registry = &units::UnitRegistry::defaults();
};

/// Checks every row through the backend and scores it. Rows whose backend call
/// failed are reported in `failures` and left out of the counts. Throws EmptyDataset.
BenchReport bench_run(const std::vector<DatasetRow>& dataset, llm::ChatBackend& backend, const BenchOptions& options);

/// Scores an existing confusion into per-type rows plus a pooled "Overall" row.
std::vector<BenchRow> score(const std::string& model, const Confusion& confusion);

/// Aligned text table: Model, Test Type, #Tests, Accuracy, Precision, Recall, F1-Score.
std::string render_table(const std::vector<BenchRow>& rows);
std::string render_json(const BenchReport& report);

// ---------------------------------------------------------------------------
// Confusion-matrix derivation from published, rounded metrics.

struct PublishedRow {
    std::string model;
    std::string test_type;
    std::uint64_t tests = 0;
    std::string accuracy;  // decimal text as printed, e.g. "0.981"
    std::string precision;
    std::string recall;
    std::string f1;
};

/// CSV columns model, test_type, tests, accuracy, precision, recall, f1.
std::vector<PublishedRow> parse_published(std::string_view csv_text);

/// |value - printed| <= 0.0005, evaluated exactly.
bool within_rounding(const std::optional<Rational>& value, std::string_view printed);

/// Every (tp, fp, fn, tn) with the given total whose accuracy, precision and
/// recall all lie within rounding of the printed values, in lexicographic order.
std::vector<ConfusionCounts> enumerate_confusions(std::uint64_t tests, std::string_view accuracy,
                                                  std::string_view precision, std::string_view recall);

struct Derivation {
    std::string model;
    std::vector<std::string> test_types;
    std::vector<std::vector<ConfusionCounts>> candidates;  // per test type
    /// Lexicographically first per-type choice whose pooled counts reproduce the
    /// overall row's accuracy, precision and recall; or the first candidates when none does.
    std::vector<ConfusionCounts> chosen;
    bool overall_consistent = false;
    std::size_t consistent_choices = 0;
};

/// Groups published rows by model; the row named "Overall" is the pooled target.
std::vector<Derivation> derive(const std::vector<PublishedRow>& published);

/// Replay records that make a backend reproduce `counts` per test type on `dataset`:
/// the first fn positives and first fp negatives (dataset order) are answered wrongly.
std::vector<std::pair<std::string, std::string>> reconstruct_replay(
    const std::vector<DatasetRow>& dataset, const std::map<std::string, ConfusionCounts>& counts,
    const llm::PromptTemplate& prompt_template = llm::PromptTemplate(),
    const units::UnitRegistry& registry = units::UnitRegistry::defaults());

}  // namespace reportkg::bench
