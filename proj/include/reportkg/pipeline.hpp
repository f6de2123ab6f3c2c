#pragma once

#include "reportkg/compliance.hpp"
#include "reportkg/config.hpp"
#include "reportkg/csv.hpp"
#include "reportkg/extraction.hpp"
#include "reportkg/kg.hpp"
#include "reportkg/llm.hpp"
#include "reportkg/review.hpp"
#include "reportkg/units.hpp"
#include "reportkg/vkg.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reportkg::pipeline {

/// Everything a run needs, read from the shared key-value config:
///
///   paths.ontology   Turtle ontology with test types and structure definitions
///   paths.mappings   mapping file for the row tables
///   paths.data_dir   root for row tables, kg.ttl, review.jsonl and the lock file
///   paths.review_queue, paths.kg_store   optional overrides
///   llm.backend      name of the `llm.<name>.*` block to use
///   prompt.template  optional prompt override
///   unit.*, prefix.*, success.*, synonym.*   registry extensions
struct PipelineConfig {
    std::filesystem::path ontology;
    std::filesystem::path mappings;
    std::filesystem::path data_dir;
    std::filesystem::path review_queue;
    std::filesystem::path kg_store;
    std::string backend_name;
    llm::BackendConfig backend;
    llm::PromptTemplate prompt_template;
    units::UnitRegistry units;
    extraction::SynonymRegistry synonyms;

    /// `backend_override` replaces llm.backend; `seed` replaces the backend seed.
    /// Throws ConfigError.
    static PipelineConfig from_config(const KeyValueConfig& config, const std::optional<std::string>& backend_override = {},
                                      const std::optional<std::uint64_t>& seed = {});
    /// Throws ConfigError when a referenced input file is missing.
    void validate() const;
};

/// Exclusive lock on a data directory; one run or review at a time. Throws LockHeld.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& data_dir);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Persistent state of a data directory: ontology plus registered metadata, the
/// per-test-type row tables and the review queue.
class Workspace {
public:
    explicit Workspace(const PipelineConfig& config);

    kg::TripleStore& store() { return store_; }
    const kg::TripleStore& store() const { return store_; }
    review::ReviewQueue& queue() { return queue_; }
    const review::ReviewQueue& queue() const { return queue_; }
    const PipelineConfig& config() const { return config_; }

    void save_store() const;

    /// Row-table file for a test type (from its results location).
    std::filesystem::path table_path(const std::string& property) const;
    /// Appends rows to the test type's table. `review_status` is "validated",
    /// "corrected" or "confirmed-anomaly".
    void integrate(const std::vector<Observation>& rows, const std::string& review_status);
    /// Every row table under the results locations of the known test types.
    std::vector<RowTable> tables() const;
    std::vector<vkg::Mapping> mappings() const;

private:
    PipelineConfig config_;
    kg::TripleStore store_;
    review::ReviewQueue queue_;
};

/// Columns of every row table.
const std::vector<std::string>& table_columns();

/// "1.097" with default unit V becomes "1.097 V"; anything else is kept as written.
std::string measured_value_cell(const Observation& row, const units::UnitRegistry& units);

struct ReportOutcome {
    std::string source;  // document path
    std::string reference;
    std::optional<ReportStatus> status;
    std::size_t rows_integrated = 0;
    std::size_t items_queued = 0;
    bool skipped = false;  // already processed
    std::string error;     // non-empty when ingestion failed
};

struct RunSummary {
    std::vector<ReportOutcome> reports;

    std::size_t failed() const;
    std::size_t rows_integrated() const;
    std::size_t items_queued() const;
    /// 0 when every report was processed or skipped, 1 when any failed.
    int exit_code() const;
    std::string to_json() const;
};

/// Per report: extract, register metadata, check rows with the oracle and the LLM,
/// queue anomalies, integrate the clean rows, set testReportValidation. A row is
/// queued when the oracle cannot decide, the LLM gives no verdict, or either
/// classifies it as anomalous. A failing report never stops the batch.
RunSummary run_pipeline(const std::vector<std::filesystem::path>& documents, Workspace& workspace,
                        llm::ChatBackend& backend, const llm::DispatchOptions& dispatch);

enum class ResolveAction { Confirm, Correct };

struct ResolveResult {
    review::ReviewItem item;
    std::optional<ReportStatus> report_status;  // set when the report's queue emptied
};

/// Confirm integrates the row as a confirmed anomaly. Correct applies the new raw
/// values, re-runs the oracle and integrates the row if it is now valid (throws
/// StillAnomalous otherwise, changing nothing). Once a report has no open items its
/// status becomes OK, or Anomalous if any item was confirmed. Throws UnknownItem and
/// AlreadyResolved.
ResolveResult resolve(Workspace& workspace, const std::string& item_id, ResolveAction action,
                      const review::Correction& correction = {});

}  // namespace reportkg::pipeline
