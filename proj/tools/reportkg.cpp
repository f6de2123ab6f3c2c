// reportkg: command-line front end for the test-report pipeline.
//
// Exit codes: 0 success, 1 partial failure or command error, 2 configuration error.

#include "reportkg/bench.hpp"
#include "reportkg/compliance.hpp"
#include "reportkg/costmodel.hpp"
#include "reportkg/error.hpp"
#include "reportkg/pipeline.hpp"
#include "reportkg/turtle.hpp"
#include "reportkg/vkg.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace reportkg;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

struct Globals {
    std::string config_path = "reportkg.conf";
    bool config_given = false;
    std::optional<std::string> backend;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

KeyValueConfig load_config(const Globals& g) {
    if (!g.config_given && !fs::exists(g.config_path)) {
        return KeyValueConfig();
    }
    return KeyValueConfig::load(g.config_path);
}

pipeline::PipelineConfig pipeline_config(const Globals& g) {
    auto config = pipeline::PipelineConfig::from_config(load_config(g), g.backend, g.seed);
    config.validate();
    return config;
}

json observation_json(const Observation& o) {
    json out = {{"id", o.id},
                {"test_type", o.test_type},
                {"observed_property", o.observed_property},
                {"label", o.label},
                {"measured_raw", o.result_raw},
                {"limits_raw", o.limits_raw},
                {"success_raw", o.success_raw},
                {"report_reference", o.report_reference},
                {"date", o.date}};
    out["default_unit"] = o.default_unit ? json(*o.default_unit) : json(nullptr);
    return out;
}

json meta_json(const ReportMeta& m) {
    return {{"reference", m.reference},
            {"name", m.name},
            {"date", m.date},
            {"location", m.location},
            {"validation", std::string(to_string(m.validation))},
            {"reports", m.reported_properties}};
}

kg::TripleStore ontology_store(const pipeline::PipelineConfig& config) {
    kg::TripleStore store;
    store.load_turtle(slurp(config.ontology));
    return store;
}

int cmd_extract(const Globals& g, const std::vector<std::string>& documents) {
    const auto config = pipeline_config(g);
    const auto store = ontology_store(config);
    json out = json::array();
    int code = kOk;
    for (const auto& document : documents) {
        try {
            const auto report = extraction::load_report_file(document);
            const auto extracted = extraction::extract_observations(report, store, config.synonyms, config.units);
            json entry = {{"source", document}, {"meta", meta_json(extracted.meta)}};
            entry["observations"] = json::array();
            for (const auto& o : extracted.observations) {
                entry["observations"].push_back(observation_json(o));
            }
            out.push_back(std::move(entry));
        } catch (const Error& e) {
            spdlog::error("{}: {}", document, e.what());
            out.push_back({{"source", document}, {"error", e.what()}});
            code = kFailure;
        }
    }
    std::cout << out.dump(2) << '\n';
    return code;
}

int cmd_validate(const Globals& g, const std::vector<std::string>& documents) {
    const auto config = pipeline_config(g);
    const auto store = ontology_store(config);
    int code = kOk;
    for (const auto& document : documents) {
        try {
            const auto report = extraction::load_report_file(document);
            const auto extracted = extraction::extract_observations(report, store, config.synonyms, config.units);
            const auto validation = compliance::validate_observations(extracted.observations, config.units);
            std::cout << report.reference << ": " << to_string(validation.status) << " ("
                      << extracted.observations.size() << " rows, " << validation.anomalies.size() << " anomalies)\n";
            for (const auto& a : validation.anomalies) {
                std::cout << "  " << a.observation_id << " [" << compliance::to_string(a.verdict) << "] " << a.reason
                          << '\n';
            }
        } catch (const Error& e) {
            std::cerr << document << ": " << e.what() << '\n';
            code = kFailure;
        }
    }
    return code;
}

int cmd_run(const Globals& g, const std::vector<std::string>& documents) {
    const auto config = pipeline_config(g);
    pipeline::DirectoryLock lock(config.data_dir);
    pipeline::Workspace workspace(config);
    auto backend = llm::make_backend(config.backend, config.prompt_template, workspace.config().units);
    auto dispatch = llm::DispatchOptions::from(config.backend);
    std::vector<fs::path> paths(documents.begin(), documents.end());
    const auto summary = pipeline::run_pipeline(paths, workspace, *backend, dispatch);
    std::cout << summary.to_json() << '\n';
    return summary.exit_code();
}

json review_item_json(const review::ReviewItem& item) {
    json out = {{"id", item.id},
                {"report", item.report_reference()},
                {"status", std::string(review::to_string(item.status))},
                {"reason", item.reason},
                {"observation", observation_json(item.observation)}};
    if (item.correction) {
        json c = json::object();
        if (item.correction->measured_raw) {
            c["measured_raw"] = *item.correction->measured_raw;
        }
        if (item.correction->success_raw) {
            c["success_raw"] = *item.correction->success_raw;
        }
        out["correction"] = c;
    }
    return out;
}

int cmd_review_list(const Globals& g, const std::string& status_filter) {
    const auto config = pipeline_config(g);
    review::ReviewQueue queue(config.review_queue);
    std::optional<review::Status> status;
    if (status_filter != "all") {
        status = review::status_from_string(status_filter);
        if (!status) {
            throw Error(ErrorKind::ConfigError, "unknown status '" + status_filter + "'");
        }
    }
    for (const auto& item : queue.items_with(status)) {
        std::cout << item.id << '\t' << review::to_string(item.status) << '\t' << item.reason << '\n';
    }
    return kOk;
}

int cmd_review_show(const Globals& g, const std::string& id) {
    const auto config = pipeline_config(g);
    review::ReviewQueue queue(config.review_queue);
    const auto item = queue.find(id);
    if (!item) {
        throw Error(ErrorKind::UnknownItem, "no review item " + id);
    }
    std::cout << review_item_json(*item).dump(2) << '\n';
    return kOk;
}

int cmd_review_resolve(const Globals& g, const std::string& id, bool confirm,
                       const std::optional<std::string>& measured, const std::optional<std::string>& success) {
    const auto config = pipeline_config(g);
    pipeline::DirectoryLock lock(config.data_dir);
    pipeline::Workspace workspace(config);
    const auto action = confirm ? pipeline::ResolveAction::Confirm : pipeline::ResolveAction::Correct;
    const auto result = pipeline::resolve(workspace, id, action, review::Correction{measured, success});
    std::cout << id << ": " << review::to_string(result.item.status);
    if (result.report_status) {
        std::cout << "; report " << result.item.report_reference() << " is now " << to_string(*result.report_status);
    }
    std::cout << '\n';
    return kOk;
}

int cmd_integrate(const Globals& g, const std::string& output) {
    const auto config = pipeline_config(g);
    pipeline::Workspace workspace(config);
    auto triples = workspace.store().triples();
    const auto virtual_triples = vkg::materialize(workspace.mappings(), workspace.tables());
    triples.insert(triples.end(), virtual_triples.begin(), virtual_triples.end());
    auto prefixes = vkg::default_mapping_prefixes();
    for (const auto& [p, iri] : workspace.store().prefixes().entries()) {
        prefixes.add(p, iri);
    }
    const std::string text = rdf::serialize_turtle(triples, prefixes);
    if (output.empty() || output == "-") {
        std::cout << text;
    } else {
        std::ofstream(output, std::ios::binary) << text;
        spdlog::info("wrote {} triples to {}", triples.size(), output);
    }
    return kOk;
}

int cmd_query(const Globals& g, const std::string& query_arg, bool materialized) {
    const auto config = pipeline_config(g);
    pipeline::Workspace workspace(config);
    const std::string text = fs::is_regular_file(query_arg) ? slurp(query_arg) : query_arg;
    const auto query = vkg::parse_query(text);
    const auto mappings = workspace.mappings();
    const auto tables = workspace.tables();
    const auto result = materialized ? vkg::answer_materialized(query, workspace.store(), mappings, tables)
                                     : vkg::answer(query, workspace.store(), mappings, tables);
    std::cout << vkg::bindings_to_json(query, result) << '\n';
    return kOk;
}

int cmd_bench(const Globals& g, const std::string& dataset_path, std::string model, bool as_json) {
    const auto kv = load_config(g);
    const std::string backend_name = g.backend.value_or(kv.get_or("llm.backend", "mock"));
    auto backend_config = llm::BackendConfig::from_config(kv, backend_name);
    if (g.seed) {
        backend_config.seed = *g.seed;
    }
    const auto units = units::UnitRegistry::from_config(kv);
    llm::PromptTemplate prompt_template;
    if (const auto text = kv.get("prompt.template")) {
        prompt_template = llm::PromptTemplate(*text);
    }
    auto backend = llm::make_backend(backend_config, prompt_template, units);
    bench::BenchOptions options;
    options.model_label = model.empty() ? backend_config.model : model;
    options.prompt_template = prompt_template;
    options.dispatch = llm::DispatchOptions::from(backend_config);
    options.registry = &units;
    const auto report = bench::bench_run(bench::load_dataset(dataset_path), *backend, options);
    std::cout << (as_json ? bench::render_json(report) + "\n" : bench::render_table(report.rows));
    for (const auto& [id, error] : report.failures) {
        spdlog::error("{}: {}", id, error);
    }
    return report.partial() ? kFailure : kOk;
}

int cmd_cost(const Globals& g, std::int64_t templates, std::int64_t tests, std::int64_t max_reports, bool csv) {
    const auto coefficients = cost::CostCoefficients::from_config(load_config(g));
    const auto reports = cost::break_even(templates, tests, coefficients);
    const auto curve = cost::effort_curve(templates, tests, max_reports, coefficients);
    if (csv) {
        std::cout << cost::render_curve_csv(curve, reports);
    } else {
        std::cout << "templates " << templates << ", tests per report " << tests << ", break-even after report "
                  << reports << "\n\n"
                  << cost::render_curve_text(curve, reports);
    }
    return kOk;
}

bool is_config_error(ErrorKind kind) {
    return kind == ErrorKind::ConfigError || kind == ErrorKind::InvalidBackendConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Test-report knowledge graph pipeline"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "key-value config file")->each([&](const std::string&) {
        g.config_given = true;
    });
    app.add_option("--backend", g.backend, "LLM backend name (llm.<name>.* block)");
    app.add_option("--seed", g.seed, "seed for the mock backend");
    app.add_flag("-v,--verbose", g.verbose, "debug logging");

    std::vector<std::string> documents;
    auto* extract = app.add_subcommand("extract", "extract observations from normalized report documents");
    extract->add_option("documents", documents, "report JSON files")->required();
    auto* validate = app.add_subcommand("validate", "check rows with the deterministic oracle only");
    validate->add_option("documents", documents, "report JSON files")->required();
    auto* run = app.add_subcommand("run", "full pipeline: extract, check, queue anomalies, integrate");
    run->add_option("documents", documents, "report JSON files")->required();

    auto* review_cmd = app.add_subcommand("review", "anomaly review queue");
    review_cmd->require_subcommand(1);
    std::string status_filter = "Open";
    auto* review_list = review_cmd->add_subcommand("list", "list review items");
    review_list->add_option("--status", status_filter, "Open, ConfirmedAnomaly, Corrected or all");
    std::string item_id;
    auto* review_show = review_cmd->add_subcommand("show", "show one review item");
    review_show->add_option("id", item_id, "observation id")->required();
    auto* review_resolve = review_cmd->add_subcommand("resolve", "confirm or correct a review item");
    review_resolve->add_option("id", item_id, "observation id")->required();
    bool confirm = false;
    std::optional<std::string> corrected_measured;
    std::optional<std::string> corrected_success;
    auto* confirm_flag = review_resolve->add_flag("--confirm", confirm, "keep the row as a confirmed anomaly");
    auto* measured_opt = review_resolve->add_option("--measured", corrected_measured, "corrected measured value");
    auto* success_opt = review_resolve->add_option("--success", corrected_success, "corrected success mark");
    confirm_flag->excludes(measured_opt)->excludes(success_opt);

    std::string output;
    auto* integrate = app.add_subcommand("integrate", "export the knowledge graph with the virtual triples as Turtle");
    integrate->add_option("-o,--output", output, "output file (default: stdout)");

    std::string query_arg;
    bool materialized = false;
    auto* query = app.add_subcommand("query", "answer a basic graph pattern query");
    query->add_option("query", query_arg, "query file or inline query text")->required();
    query->add_flag("--materialize", materialized, "evaluate over fully materialized triples");

    std::string dataset_path = "data/bench/dataset.csv";
    std::string model_label;
    bool as_json = false;
    auto* bench_cmd = app.add_subcommand("bench", "score a backend on the benchmark dataset");
    bench_cmd->add_option("--dataset", dataset_path, "dataset CSV");
    bench_cmd->add_option("--model", model_label, "model label for the table");
    bench_cmd->add_flag("--json", as_json, "machine-readable output");

    std::int64_t templates = 1;
    std::int64_t tests = 30;
    std::int64_t max_reports = 10;
    bool csv = false;
    auto* cost_cmd = app.add_subcommand("cost", "effort of the manual process vs the pipeline");
    cost_cmd->add_option("-n,--templates", templates, "number of report templates");
    cost_cmd->add_option("-t,--tests", tests, "test types per report");
    cost_cmd->add_option("-r,--max-reports", max_reports, "last report count in the table");
    cost_cmd->add_flag("--csv", csv, "CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("reportkg"));
    spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*extract) return cmd_extract(g, documents);
        if (*validate) return cmd_validate(g, documents);
        if (*run) return cmd_run(g, documents);
        if (*review_list) return cmd_review_list(g, status_filter);
        if (*review_show) return cmd_review_show(g, item_id);
        if (*review_resolve) {
            if (!confirm && !corrected_measured && !corrected_success) {
                std::cerr << "resolve needs --confirm, --measured or --success\n";
                return kConfigError;
            }
            return cmd_review_resolve(g, item_id, confirm, corrected_measured, corrected_success);
        }
        if (*integrate) return cmd_integrate(g, output);
        if (*query) return cmd_query(g, query_arg, materialized);
        if (*bench_cmd) return cmd_bench(g, dataset_path, model_label, as_json);
        if (*cost_cmd) return cmd_cost(g, templates, tests, max_reports, csv);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return is_config_error(e.kind()) ? kConfigError : kFailure;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
