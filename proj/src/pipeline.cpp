#include "reportkg/pipeline.hpp"

#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace reportkg::pipeline {

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::filesystem::path required_path(const KeyValueConfig& config, const char* key) {
    if (!config.contains(key)) {
        throw Error(ErrorKind::ConfigError, std::string("missing configuration key ") + key);
    }
    return config.resolve_path(key);
}

compliance::Verdict verdict_of(llm::JudgementVerdict verdict) {
    return verdict == llm::JudgementVerdict::True ? compliance::Verdict::InRange : compliance::Verdict::OutOfRange;
}

}  // namespace

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& config, const std::optional<std::string>& backend_override,
                                           const std::optional<std::uint64_t>& seed) {
    PipelineConfig out;
    try {
        out.ontology = required_path(config, "paths.ontology");
        out.mappings = required_path(config, "paths.mappings");
        out.data_dir = required_path(config, "paths.data_dir");
        out.review_queue =
            config.contains("paths.review_queue") ? config.resolve_path("paths.review_queue") : out.data_dir / "review.jsonl";
        out.kg_store = config.contains("paths.kg_store") ? config.resolve_path("paths.kg_store") : out.data_dir / "kg.ttl";
        out.backend_name = backend_override.value_or(config.get_or("llm.backend", "mock"));
        out.backend = llm::BackendConfig::from_config(config, out.backend_name);
        if (seed) {
            out.backend.seed = *seed;
        }
        if (const auto text = config.get("prompt.template")) {
            out.prompt_template = llm::PromptTemplate(*text);
        }
        out.units = units::UnitRegistry::from_config(config);
        out.synonyms = extraction::SynonymRegistry::from_config(config);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) {
            throw;
        }
        throw Error(ErrorKind::ConfigError, e.what());
    }
    return out;
}

void PipelineConfig::validate() const {
    for (const auto* path : {&ontology, &mappings}) {
        if (!std::filesystem::is_regular_file(*path)) {
            throw Error(ErrorKind::ConfigError, "missing input file " + path->string());
        }
    }
    if (backend.kind == llm::BackendKind::Replay && !std::filesystem::is_regular_file(backend.replay_path)) {
        throw Error(ErrorKind::ConfigError, "missing replay fixture " + backend.replay_path.string());
    }
}

DirectoryLock::DirectoryLock(const std::filesystem::path& data_dir) : path_(data_dir / ".reportkg.lock") {
    std::filesystem::create_directories(data_dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw Error(ErrorKind::LockHeld, "another run or review holds " + path_.string());
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

DirectoryLock::~DirectoryLock() {
    std::error_code ignored;
    std::filesystem::remove(path_, ignored);
}

Workspace::Workspace(const PipelineConfig& config) : config_(config), queue_(config.review_queue) {
    store_.load_turtle(slurp(config.ontology));
    if (std::filesystem::exists(config.kg_store)) {
        store_.load_turtle(slurp(config.kg_store));
    }
    const auto incomplete = store_.incomplete_structure_defs();
    for (const auto& property : incomplete) {
        spdlog::warn("test type {} has no results or acceptance-limits location", property);
    }
}

void Workspace::save_store() const {
    if (config_.kg_store.has_parent_path()) {
        std::filesystem::create_directories(config_.kg_store.parent_path());
    }
    const auto temporary = std::filesystem::path(config_.kg_store.string() + ".tmp");
    {
        std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
        out << store_.serialize();
        if (!out) {
            throw Error(ErrorKind::IoError, "cannot write " + temporary.string());
        }
    }
    std::filesystem::rename(temporary, config_.kg_store);
}

std::filesystem::path Workspace::table_path(const std::string& property) const {
    const auto def = store_.structure_def(property);
    if (!def || def->results_location.empty()) {
        throw Error(ErrorKind::ConfigError, "test type " + property + " has no results location");
    }
    std::string location = def->results_location;
    while (!location.empty() && location.front() == '/') {
        location.erase(location.begin());
    }
    return config_.data_dir / location;
}

const std::vector<std::string>& table_columns() {
    static const std::vector<std::string> columns = {"tr_reference",       "label",         "observation_id",
                                                     "measured_value",     "acceptance_limits", "test_report_date",
                                                     "successful",         "review_status"};
    return columns;
}

std::string measured_value_cell(const Observation& row, const units::UnitRegistry& units) {
    if (!row.default_unit) {
        return row.result_raw;
    }
    try {
        if (units.parse_quantity(row.result_raw).dimension() == units::Dimension::Dimensionless) {
            return trim(row.result_raw) + " " + *row.default_unit;
        }
    } catch (const Error&) {
    }
    return row.result_raw;
}

void Workspace::integrate(const std::vector<Observation>& rows, const std::string& review_status) {
    std::map<std::string, std::vector<const Observation*>> by_property;
    for (const auto& row : rows) {
        by_property[row.observed_property].push_back(&row);
    }
    for (const auto& [property, group] : by_property) {
        const auto path = table_path(property);
        RowTable table;
        if (std::filesystem::exists(path)) {
            table = read_row_table(path);
        } else {
            table.name = path.stem().string();
            table.columns = table_columns();
        }
        for (const Observation* row : group) {
            table.rows.push_back({row->report_reference, row->label, row->id, measured_value_cell(*row, config_.units),
                                  row->limits_raw, row->date, row->success_raw, review_status});
        }
        write_row_table(path, table);
    }
}

std::vector<RowTable> Workspace::tables() const {
    std::vector<RowTable> out;
    std::set<std::filesystem::path> seen;
    for (const auto& property : store_.observable_properties()) {
        const auto def = store_.structure_def(property);
        if (!def || def->results_location.empty()) {
            continue;
        }
        const auto path = table_path(property);
        if (seen.insert(path).second && std::filesystem::exists(path)) {
            out.push_back(read_row_table(path));
        }
    }
    return out;
}

std::vector<vkg::Mapping> Workspace::mappings() const {
    auto prefixes = vkg::default_mapping_prefixes();
    return vkg::parse_mappings(slurp(config_.mappings), prefixes);
}

std::size_t RunSummary::failed() const {
    return static_cast<std::size_t>(
        std::count_if(reports.begin(), reports.end(), [](const ReportOutcome& r) { return !r.error.empty(); }));
}

std::size_t RunSummary::rows_integrated() const {
    std::size_t n = 0;
    for (const auto& r : reports) {
        n += r.rows_integrated;
    }
    return n;
}

std::size_t RunSummary::items_queued() const {
    std::size_t n = 0;
    for (const auto& r : reports) {
        n += r.items_queued;
    }
    return n;
}

int RunSummary::exit_code() const { return failed() > 0 ? 1 : 0; }

std::string RunSummary::to_json() const {
    nlohmann::json out;
    out["reports"] = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json entry = {{"source", r.source},
                                {"reference", r.reference},
                                {"rows_integrated", r.rows_integrated},
                                {"items_queued", r.items_queued},
                                {"skipped", r.skipped}};
        entry["status"] = r.status ? nlohmann::json(std::string(to_string(*r.status))) : nlohmann::json(nullptr);
        entry["error"] = r.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.error);
        out["reports"].push_back(std::move(entry));
    }
    out["failed"] = failed();
    out["rows_integrated"] = rows_integrated();
    out["items_queued"] = items_queued();
    return out.dump(2);
}

namespace {

/// Reason text for a row that needs review, or empty when the row is clean.
std::string review_reason(const Observation& row, const compliance::RowAssessment& oracle,
                          const llm::LLMJudgement* judgement, const std::string* failure,
                          const units::UnitRegistry& units) {
    const std::string subject = "\"" + row.result_raw + "\" vs \"" + row.limits_raw + "\"";
    if (oracle.verdict == compliance::Verdict::Unknown) {
        return "Unknown verdict for " + subject + ": " + oracle.detail;
    }
    if (failure != nullptr) {
        return "LLM backend failure for " + subject + ": " + *failure;
    }
    if (judgement == nullptr || judgement->verdict == llm::JudgementVerdict::Unparseable) {
        std::string excerpt = judgement ? judgement->raw_response.substr(0, 120) : std::string();
        return "Unparseable LLM response for " + subject + ": \"" + excerpt + "\"";
    }
    const auto mark = units.parse_success_mark(row.success_raw);
    const auto llm_verdict = verdict_of(judgement->verdict);
    const auto llm_validity = compliance::classify(llm_verdict, mark);
    const bool oracle_anomalous = !oracle.is_valid();
    const bool llm_anomalous = llm_validity.validity == compliance::Validity::Anomalous;
    if (!oracle_anomalous && !llm_anomalous) {
        return {};
    }
    std::string reason = "Anomalous " + subject + " marked \"" + row.success_raw + "\": oracle " +
                         std::string(compliance::to_string(oracle.verdict)) + ", LLM " +
                         std::string(compliance::to_string(llm_verdict));
    if (oracle.verdict != llm_verdict) {
        reason += " (oracle and LLM disagree)";
    }
    return reason;
}

}  // namespace

RunSummary run_pipeline(const std::vector<std::filesystem::path>& documents, Workspace& workspace,
                        llm::ChatBackend& backend, const llm::DispatchOptions& dispatch) {
    const PipelineConfig& config = workspace.config();
    RunSummary summary;
    llm::RowChecker checker(backend, config.prompt_template, dispatch);
    std::set<std::string> batch_references;

    for (const auto& document : documents) {
        ReportOutcome outcome;
        outcome.source = document.string();
        try {
            const auto report = extraction::load_report_file(document);
            outcome.reference = report.reference;
            if (workspace.store().report(report.reference)) {
                spdlog::warn("report {} was already processed; skipping {}", report.reference, document.string());
                outcome.skipped = true;
                outcome.status = workspace.store().report(report.reference)->validation;
                summary.reports.push_back(std::move(outcome));
                continue;
            }
            if (!batch_references.insert(report.reference).second) {
                throw Error(ErrorKind::DuplicateReport, "reference " + report.reference + " appears twice in this batch");
            }
            auto extracted = extraction::extract_observations(report, workspace.store(), config.synonyms, config.units);

            const auto batch = checker.check_rows(extracted.observations);
            std::map<std::string, const llm::LLMJudgement*> judgements;
            for (const auto& judgement : batch.judgements) {
                judgements[judgement.observation_id] = &judgement;
            }
            std::map<std::string, std::string> failures(batch.failures.begin(), batch.failures.end());

            std::vector<Observation> clean;
            std::vector<review::ReviewItem> queued;
            for (const auto& row : extracted.observations) {
                const auto oracle = compliance::assess_row(row, config.units);
                const auto j = judgements.find(row.id);
                const auto f = failures.find(row.id);
                std::string reason = review_reason(row, oracle, j == judgements.end() ? nullptr : j->second,
                                                   f == failures.end() ? nullptr : &f->second, config.units);
                if (reason.empty()) {
                    clean.push_back(row);
                } else {
                    queued.push_back(review::ReviewItem{row.id, row, std::move(reason), review::Status::Open, std::nullopt});
                }
            }

            for (const auto& item : queued) {
                if (const auto existing = workspace.queue().find(item.id); existing) {
                    throw Error(ErrorKind::DuplicateReport, "review queue already holds " + item.id);
                }
            }
            workspace.integrate(clean, "validated");
            for (const auto& item : queued) {
                workspace.queue().append(item);
            }
            extracted.meta.validation = queued.empty() ? ReportStatus::OK : ReportStatus::Pending;
            workspace.store().register_report(extracted.meta);
            workspace.save_store();

            outcome.status = extracted.meta.validation;
            outcome.rows_integrated = clean.size();
            outcome.items_queued = queued.size();
            spdlog::info("report {}: {} rows integrated, {} queued for review, status {}", report.reference,
                         clean.size(), queued.size(), to_string(*outcome.status));
        } catch (const std::exception& e) {
            outcome.error = e.what();
            spdlog::error("{}: {}", document.string(), e.what());
        }
        summary.reports.push_back(std::move(outcome));
    }
    return summary;
}

ResolveResult resolve(Workspace& workspace, const std::string& item_id, ResolveAction action,
                      const review::Correction& correction) {
    auto found = workspace.queue().find(item_id);
    if (!found) {
        throw Error(ErrorKind::UnknownItem, "no review item " + item_id);
    }
    if (found->status != review::Status::Open) {
        throw Error(ErrorKind::AlreadyResolved,
                    "review item " + item_id + " is already " + std::string(review::to_string(found->status)));
    }
    review::ReviewItem item = *found;
    if (action == ResolveAction::Correct) {
        if (!correction.measured_raw && !correction.success_raw) {
            throw Error(ErrorKind::ConfigError, "a correction needs a new measured value or success mark");
        }
        Observation corrected = item.observation;
        corrected.result_raw = correction.measured_raw.value_or(corrected.result_raw);
        corrected.success_raw = correction.success_raw.value_or(corrected.success_raw);
        const auto assessment = compliance::assess_row(corrected, workspace.config().units);
        if (!assessment.is_valid()) {
            const std::string why = assessment.validity ? assessment.validity->reason : assessment.detail;
            throw Error(ErrorKind::StillAnomalous, "corrected row " + item_id + " is still anomalous: " + why);
        }
        workspace.integrate({corrected}, "corrected");
        item.status = review::Status::Corrected;
        item.correction = correction;
    } else {
        workspace.integrate({item.observation}, "confirmed-anomaly");
        item.status = review::Status::ConfirmedAnomaly;
    }
    workspace.queue().append(item);

    ResolveResult result{item, std::nullopt};
    const auto report_items = workspace.queue().for_report(item.report_reference());
    const bool open = std::any_of(report_items.begin(), report_items.end(),
                                  [](const review::ReviewItem& i) { return i.status == review::Status::Open; });
    if (!open) {
        const bool confirmed = std::any_of(report_items.begin(), report_items.end(), [](const review::ReviewItem& i) {
            return i.status == review::Status::ConfirmedAnomaly;
        });
        const ReportStatus status = confirmed ? ReportStatus::Anomalous : ReportStatus::OK;
        workspace.store().set_report_validation(item.report_reference(), status);
        workspace.save_store();
        result.report_status = status;
    }
    return result;
}

}  // namespace reportkg::pipeline
