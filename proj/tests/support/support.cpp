#include "support.hpp"

#include "reportkg/decimal.hpp"
#include "reportkg/error.hpp"
#include "reportkg/extraction.hpp"
#include "reportkg/units.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace reportkg::support {

namespace fs = std::filesystem;
using boost::multiprecision::cpp_int;
using nlohmann::json;

fs::path source_dir() { return fs::path(REPORTKG_SOURCE_DIR); }

fs::path fixture(const std::string& relative) { return source_dir() / "tests" / "fixtures" / relative; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

TempDir::TempDir(const std::string& tag) {
    std::random_device device;
    for (;;) {
        path_ = fs::temp_directory_path() / ("reportkg-" + tag + "-" + std::to_string(device()));
        if (fs::create_directories(path_)) {
            break;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ignored;
    fs::remove_all(path_, ignored);
}

// ---------------------------------------------------------------------------
// Parser corpus

namespace {

std::string limit_kind_name(units::LimitKind kind) {
    switch (kind) {
        case units::LimitKind::ClosedInterval: return "ClosedInterval";
        case units::LimitKind::AtLeast: return "AtLeast";
        case units::LimitKind::AtMost: return "AtMost";
    }
    return "?";
}

Decimal decimal(const std::string& text) {
    auto value = Decimal::parse(text);
    if (!value) {
        throw std::invalid_argument("corpus holds a malformed decimal: " + text);
    }
    return *value;
}

std::string describe_bound(const std::optional<units::Quantity>& q) {
    return q ? q->base_value().to_string() : std::string("none");
}

void check_quantity(const json& entry, std::vector<std::string>& failures) {
    const std::string text = entry.at("text");
    const auto q = units::parse_quantity(text);
    std::ostringstream problem;
    if (q.value != decimal(entry.at("value"))) {
        problem << " value " << q.value.to_string();
    }
    if (q.base_value() != decimal(entry.at("base"))) {
        problem << " base " << q.base_value().to_string();
    }
    if (units::to_string(q.dimension()) != entry.at("dimension").get<std::string>()) {
        problem << " dimension " << units::to_string(q.dimension());
    }
    if (units::parse_quantity(units::format_quantity(q)) != q) {
        problem << " round trip through \"" << units::format_quantity(q) << "\"";
    }
    if (!problem.str().empty()) {
        failures.push_back("quantity \"" + text + "\":" + problem.str());
    }
}

void check_limits(const json& entry, std::vector<std::string>& failures) {
    const std::string text = entry.at("text");
    const auto limits = units::parse_acceptance_limits(text);
    std::ostringstream problem;
    if (limit_kind_name(limits.kind) != entry.at("kind").get<std::string>()) {
        problem << " kind " << limit_kind_name(limits.kind);
    }
    for (const auto& [key, bound] : {std::pair{"lower", &limits.lower}, std::pair{"upper", &limits.upper}}) {
        const bool expected = entry.contains(key);
        if (expected != bound->has_value() || (expected && (*bound)->base_value() != decimal(entry.at(key)))) {
            problem << ' ' << key << ' ' << describe_bound(*bound);
        }
    }
    if (units::to_string(limits.dimension()) != entry.at("dimension").get<std::string>()) {
        problem << " dimension " << units::to_string(limits.dimension());
    }
    if (limits.lower && limits.upper && limits.upper->base_value() < limits.lower->base_value()) {
        problem << " inverted";
    }
    if (units::parse_acceptance_limits(units::format_limits(limits)) != limits) {
        problem << " round trip through \"" << units::format_limits(limits) << "\"";
    }
    if (!problem.str().empty()) {
        failures.push_back("limits \"" + text + "\":" + problem.str());
    }
}

void check_mark(const json& entry, std::vector<std::string>& failures) {
    const std::string text = entry.at("text");
    const auto mark = units::parse_success_mark(text);
    const std::string got = mark.verdict == units::Mark::Pass ? "Pass" : "Fail";
    if (got != entry.at("verdict").get<std::string>() || mark.raw != text) {
        failures.push_back("mark \"" + text + "\": " + got);
    }
}

void check_headers(const json& entry, std::vector<std::string>& failures) {
    const auto headers = entry.at("headers").get<std::vector<std::string>>();
    const auto roles = extraction::resolve_columns(headers, nullptr, extraction::SynonymRegistry::defaults(),
                                                   entry.at("title").get<std::string>());
    std::vector<std::string> names;
    for (auto role : roles.roles) {
        names.emplace_back(extraction::to_string(role));
    }
    const auto expected_unit = entry.at("default_unit").is_null()
                                   ? std::optional<std::string>()
                                   : std::optional<std::string>(entry.at("default_unit").get<std::string>());
    if (names != entry.at("roles").get<std::vector<std::string>>() || roles.default_unit != expected_unit) {
        failures.push_back("headers \"" + headers.front() + "...\": roles or default unit differ");
    }
}

void check_rowspan(const json& entry, std::vector<std::string>& failures) {
    extraction::RawTable table;
    table.title = "span";
    for (const auto& row : entry.at("rows")) {
        std::vector<extraction::Cell> cells;
        for (const auto& cell : row) {
            cells.push_back(cell.is_null() ? extraction::Cell() : extraction::Cell(cell.get<std::string>()));
        }
        table.rows.push_back(std::move(cells));
    }
    for (std::size_t c = 0; c < table.rows.front().size(); ++c) {
        table.headers.push_back("c" + std::to_string(c));
    }
    const auto expanded = extraction::expand_rowspans(table);
    std::vector<std::vector<std::string>> got;
    for (const auto& row : expanded.rows) {
        std::vector<std::string> cells;
        for (const auto& cell : row) {
            cells.push_back(cell.value_or("<absent>"));
        }
        got.push_back(std::move(cells));
    }
    if (got != entry.at("expected").get<std::vector<std::vector<std::string>>>()) {
        failures.push_back("row span table " + entry.at("rows").dump() + " expanded differently");
    }
}

}  // namespace

CorpusResult check_parser_corpus(const fs::path& corpus) {
    const json doc = json::parse(read_file(corpus));
    CorpusResult result;
    const std::vector<std::pair<const char*, std::function<void(const json&, std::vector<std::string>&)>>> sections = {
        {"quantities", check_quantity}, {"limits", check_limits},     {"marks", check_mark},
        {"headers", check_headers},     {"rowspans", check_rowspan},
    };
    for (const auto& [name, check] : sections) {
        for (const auto& entry : doc.at(name)) {
            ++result.entries;
            try {
                check(entry, result.failures);
            } catch (const std::exception& e) {
                result.failures.push_back(std::string(name) + " " + entry.dump() + ": " + e.what());
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Oracle cases

namespace {

constexpr int kScale = 15;  // quantities are integers in units of 1e-15 of the base unit

struct Prefix {
    const char* symbol;
    int exponent;
};

const Prefix kPrefixes[] = {{"p", -12}, {"n", -9}, {"µ", -6}, {"u", -6}, {"m", -3},
                            {"", 0},    {"k", 3},  {"M", 6},  {"G", 9}};
const char* const kUnits[] = {"V", "Ω", "A", "W"};

/// n * 10^-(kScale + exponent) in positional notation, trailing zeros dropped.
std::string render(const cpp_int& n, int exponent) {
    const int places = kScale + exponent;
    std::string digits = n.str();
    if (static_cast<int>(digits.size()) <= places) {
        digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    std::string text = digits.substr(0, digits.size() - places) + "." + digits.substr(digits.size() - places);
    text.erase(text.find_last_not_of('0') + 1);
    if (text.back() == '.') {
        text.pop_back();
    }
    return text;
}

}  // namespace

OracleCase random_oracle_case(std::mt19937_64& rng) {
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
    auto quantity = [&]() -> cpp_int {
        cpp_int n = std::uniform_int_distribution<int>(1, 99999)(rng);
        return n * boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(6 + pick(19)));
    };
    auto prefix = [&] { return kPrefixes[pick(std::size(kPrefixes))]; };

    const std::size_t unit_index = pick(std::size(kUnits));
    const std::string unit = kUnits[unit_index];
    cpp_int lo = quantity();
    cpp_int hi = quantity();
    if (hi < lo) {
        std::swap(lo, hi);
    }

    OracleCase c;
    const std::size_t form = pick(4);
    const Prefix shared = prefix();
    switch (form) {
        case 0:
            c.limits_text = "[" + render(lo, shared.exponent) + ", " + render(hi, shared.exponent) + "] " +
                            shared.symbol + unit;
            break;
        case 1: {
            // A bare first endpoint would borrow the second one's prefix, so both carry one.
            Prefix first = prefix();
            while (first.exponent == 0) {
                first = prefix();
            }
            const Prefix second = prefix();
            c.limits_text = render(lo, first.exponent) + first.symbol + " - " + render(hi, second.exponent) +
                            second.symbol + unit;
            break;
        }
        case 2: c.limits_text = ">= " + render(lo, shared.exponent) + " " + shared.symbol + unit; break;
        default: c.limits_text = "<= " + render(hi, shared.exponent) + " " + shared.symbol + unit; break;
    }

    cpp_int measured;
    const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
    if (roll < 0.3) {
        c.boundary = true;
        measured = (form == 3 || (form != 2 && chance(0.5))) ? hi : lo;
    } else if (roll < 0.45) {
        measured = (form == 3 || (form != 2 && chance(0.5))) ? hi : lo;
        measured += chance(0.5) ? 1 : -1;
    } else {
        measured = quantity();
    }

    if (form == 0 && chance(0.1)) {
        c.measured_text = render(measured, shared.exponent);  // bare number adopts the limits' unit
    } else if (chance(0.07)) {
        const std::string other = kUnits[(unit_index + 1 + pick(std::size(kUnits) - 1)) % std::size(kUnits)];
        c.measured_text = render(measured, 0) + " " + other;
        c.expected = compliance::Verdict::Unknown;
        return c;
    } else {
        const Prefix p = prefix();
        c.measured_text = render(measured, p.exponent) + " " + p.symbol + unit;
    }

    bool inside = true;
    if (form == 0 || form == 1) {
        inside = lo <= measured && measured <= hi;
    } else if (form == 2) {
        inside = lo <= measured;
    } else {
        inside = measured <= hi;
    }
    c.expected = inside ? compliance::Verdict::InRange : compliance::Verdict::OutOfRange;
    return c;
}

// ---------------------------------------------------------------------------
// VKG instances

namespace {

const std::string kEx = "http://example.org/";

rdf::PrefixMap example_prefixes() {
    auto prefixes = vkg::default_mapping_prefixes();
    prefixes.add("ex", kEx);
    return prefixes;
}

rdf::Term ex(const std::string& local) { return rdf::Term::iri(kEx + local); }

}  // namespace

VkgInstance random_vkg_instance(std::mt19937_64& rng, std::size_t max_mappings, std::size_t max_rows) {
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    VkgInstance instance;

    // P3 <= P1 <= P0, P2 <= P0
    std::vector<rdf::Triple> axioms = {
        {ex("P1"), rdf::Term::iri(rdf::rdfs_subclass_of()), ex("P0")},
        {ex("P2"), rdf::Term::iri(rdf::rdfs_subclass_of()), ex("P0")},
        {ex("P3"), rdf::Term::iri(rdf::rdfs_subclass_of()), ex("P1")},
    };
    for (int k = 0; k < 10; ++k) {
        if (pick(2) == 0) {
            axioms.push_back({ex("v" + std::to_string(k)), ex("tag"), rdf::Term::literal("t" + std::to_string(k % 3))});
        }
    }
    for (int k = 0; k < 5; ++k) {
        axioms.push_back({ex("o" + std::to_string(pick(30))), rdf::Term::iri(rdf::sosa("observedProperty")),
                          ex("P" + std::to_string(pick(4)))});
    }
    instance.store.insert(axioms);

    const std::size_t mapping_count = 1 + pick(max_mappings);
    std::ostringstream text;
    for (std::size_t i = 0; i < mapping_count; ++i) {
        const std::string table = "t" + std::to_string(i);
        text << "mappingId M" << i << "\n"
             << "target ex:o{id} a ex:C" << i % 2 << " ; sosa:observedProperty ex:P{prop} ; ex:a \"{a}\" ;\n"
             << "       ex:b ex:v{b} ; ex:link ex:o{a} .\n"
             << "source SELECT id, a, b, prop FROM " << table;
        if (pick(4) == 0) {
            text << " WHERE prop = '" << pick(4) << "'";
        }
        text << "\n\n";

        RowTable rows{table, {"id", "a", "b", "prop"}, {}};
        const std::size_t count = pick(max_rows / mapping_count + 1);
        for (std::size_t r = 0; r < count; ++r) {
            rows.rows.push_back({std::to_string(pick(30)), std::to_string(pick(30)), std::to_string(pick(10)),
                                 std::to_string(pick(4))});
        }
        instance.rows += count;
        instance.tables.push_back(std::move(rows));
    }
    instance.mappings = vkg::parse_mappings(text.str(), example_prefixes());

    const std::vector<std::string> subject_vars = {"s", "x"};
    const std::vector<std::string> object_vars = {"x", "y", "o"};
    for (int q = 0; q < 8; ++q) {
        vkg::BGPQuery query;
        const std::size_t length = 1 + pick(3);
        for (std::size_t k = 0; k < length; ++k) {
            kg::TriplePattern pattern;
            pattern.subject = pick(5) == 0 ? kg::PatternTerm(ex("o" + std::to_string(pick(30))))
                                           : kg::PatternTerm(kg::Variable{subject_vars[pick(2)]});
            const std::size_t predicate = pick(7);
            const bool bound_object = pick(2) == 0;
            kg::PatternTerm object = kg::Variable{object_vars[pick(3)]};
            switch (predicate) {
                case 0:
                    pattern.predicate = rdf::Term::iri(rdf::rdf_type());
                    if (bound_object) object = ex("C" + std::to_string(pick(2)));
                    break;
                case 1:
                    pattern.predicate = rdf::Term::iri(rdf::sosa("observedProperty"));
                    if (bound_object) object = ex("P" + std::to_string(pick(4)));
                    break;
                case 2:
                    pattern.predicate = ex("a");
                    if (bound_object) object = rdf::Term::literal(std::to_string(pick(30)));
                    break;
                case 3:
                    pattern.predicate = ex("b");
                    if (bound_object) object = ex("v" + std::to_string(pick(10)));
                    break;
                case 4:
                    pattern.predicate = ex("link");
                    if (bound_object) object = ex("o" + std::to_string(pick(30)));
                    break;
                case 5:
                    pattern.predicate = ex("tag");
                    if (bound_object) object = rdf::Term::literal("t" + std::to_string(pick(3)));
                    break;
                default: pattern.predicate = kg::Variable{"p"}; break;
            }
            pattern.object = object;
            query.patterns.push_back(std::move(pattern));
        }
        instance.queries.push_back(std::move(query));
    }
    return instance;
}

namespace {

std::string fill(const vkg::Template& tmpl, const std::map<std::string, std::string>& row, bool encode) {
    std::string out;
    for (const auto& segment : tmpl.segments) {
        out += segment.placeholder ? (encode ? vkg::percent_encode(row.at(segment.text)) : row.at(segment.text))
                                   : segment.text;
    }
    return out;
}

rdf::Term fill(const vkg::TermTemplate& tmpl, const std::map<std::string, std::string>& row) {
    if (tmpl.kind == rdf::Term::Kind::Iri) {
        return rdf::Term::iri(fill(tmpl.text, row, true));
    }
    if (!tmpl.language.empty()) {
        return rdf::Term::lang_literal(fill(tmpl.text, row, false), tmpl.language);
    }
    return rdf::Term::literal(fill(tmpl.text, row, false), tmpl.datatype);
}

bool same_table(const std::string& source, const std::string& table) {
    return source == table || (source.size() > table.size() && source.ends_with("." + table));
}

bool bind(const kg::PatternTerm& slot, const rdf::Term& term, kg::Bindings& bindings) {
    if (const auto* constant = std::get_if<rdf::Term>(&slot)) {
        return *constant == term;
    }
    const auto& name = std::get<kg::Variable>(slot).name;
    const auto [it, inserted] = bindings.emplace(name, term);
    return inserted || it->second == term;
}

// Same test as `bind` without copying the bindings.
bool compatible(const kg::PatternTerm& slot, const rdf::Term& term, const kg::Bindings& bindings) {
    if (const auto* constant = std::get_if<rdf::Term>(&slot)) {
        return *constant == term;
    }
    const auto it = bindings.find(std::get<kg::Variable>(slot).name);
    return it == bindings.end() || it->second == term;
}

}  // namespace

std::vector<kg::Bindings> naive_answer(const vkg::BGPQuery& query, const kg::TripleStore& store,
                                       const std::vector<vkg::Mapping>& mappings, const std::vector<RowTable>& tables) {
    std::vector<rdf::Triple> triples = store.triples();
    for (const auto& mapping : mappings) {
        for (const auto& table : tables) {
            if (!same_table(mapping.source.table, table.name)) {
                continue;
            }
            for (const auto& cells : table.rows) {
                std::map<std::string, std::string> row;
                for (std::size_t c = 0; c < table.columns.size(); ++c) {
                    row[table.columns[c]] = cells[c];
                }
                if (mapping.source.filter && row.at(mapping.source.filter->first) != mapping.source.filter->second) {
                    continue;
                }
                for (const auto& t : mapping.target) {
                    triples.push_back({fill(t.subject, row), fill(t.predicate, row), fill(t.object, row)});
                }
            }
        }
    }

    // Subclass closure from the store's axioms only.
    std::map<std::string, std::set<std::string>> children;
    for (const auto& t : store.triples()) {
        if (t.predicate.value == rdf::rdfs_subclass_of()) {
            children[t.object.value].insert(t.subject.value);
        }
    }
    auto closure = [&](const std::string& root) {
        std::set<std::string> seen{root};
        std::vector<std::string> stack{root};
        while (!stack.empty()) {
            const auto current = stack.back();
            stack.pop_back();
            for (const auto& child : children[current]) {
                if (seen.insert(child).second) {
                    stack.push_back(child);
                }
            }
        }
        return seen;
    };

    std::vector<kg::Bindings> results{{}};
    for (const auto& pattern : query.patterns) {
        const auto* predicate = std::get_if<rdf::Term>(&pattern.predicate);
        const auto* object = std::get_if<rdf::Term>(&pattern.object);
        const bool expand = predicate && object && object->is_iri() && predicate->value == rdf::sosa("observedProperty");
        const std::set<std::string> classes = expand ? closure(object->value) : std::set<std::string>{};

        std::vector<kg::Bindings> next;
        for (const auto& partial : results) {
            for (const auto& t : triples) {
                if (!compatible(pattern.subject, t.subject, partial) || !compatible(pattern.predicate, t.predicate, partial)) {
                    continue;
                }
                kg::Bindings b = partial;
                if (!bind(pattern.subject, t.subject, b) || !bind(pattern.predicate, t.predicate, b)) {
                    continue;
                }
                const bool object_ok = expand ? (t.object.is_iri() && classes.count(t.object.value) > 0)
                                              : bind(pattern.object, t.object, b);
                if (object_ok) {
                    next.push_back(std::move(b));
                }
            }
        }
        results = std::move(next);
    }
    if (!query.projection.empty()) {
        for (auto& b : results) {
            kg::Bindings kept;
            for (const auto& name : query.projection) {
                if (auto it = b.find(name); it != b.end()) {
                    kept.insert(*it);
                }
            }
            b = std::move(kept);
        }
    }
    std::sort(results.begin(), results.end());
    results.erase(std::unique(results.begin(), results.end()), results.end());
    return results;
}

// ---------------------------------------------------------------------------

fs::path write_test_config(const fs::path& dir, const std::string& backend) {
    const fs::path data = source_dir() / "data";
    std::string text = read_file(data / "reportkg.conf");
    text += "\npaths.ontology = " + (data / "ontology.ttl").string() + "\n";
    text += "paths.mappings = " + (data / "mappings.obda").string() + "\n";
    text += "paths.data_dir = " + (dir / "var").string() + "\n";
    text += "llm.backend = " + backend + "\n";
    text += "llm.gpt4-replay.replay_path = " + (data / "bench" / "replay-gpt4.jsonl").string() + "\n";
    const fs::path path = dir / "reportkg.conf";
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

std::vector<fs::path> batch_reports() {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(fixture("batch"))) {
        if (entry.path().extension() == ".json") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> integrity_violations(const pipeline::Workspace& workspace) {
    std::vector<std::string> out;
    std::map<std::string, review::Status> resolved;
    for (const auto& item : workspace.queue().items()) {
        resolved[item.id] = item.status;
    }
    std::set<std::string> seen;
    for (const auto& table : workspace.tables()) {
        const auto id_col = table.column_index("observation_id");
        const auto status_col = table.column_index("review_status");
        if (id_col == std::string::npos || status_col == std::string::npos) {
            out.push_back(table.name + ": missing observation_id or review_status column");
            continue;
        }
        for (const auto& row : table.rows) {
            const auto& id = row[id_col];
            const auto& status = row[status_col];
            if (!seen.insert(id).second) {
                out.push_back(id + ": integrated twice");
            }
            const auto queued = resolved.find(id);
            if (status == "validated") {
                if (queued != resolved.end()) {
                    out.push_back(id + ": validated row is also in the review queue");
                }
            } else if (status == "corrected" || status == "confirmed-anomaly") {
                const auto expected = status == "corrected" ? review::Status::Corrected : review::Status::ConfirmedAnomaly;
                if (queued == resolved.end() || queued->second != expected) {
                    out.push_back(id + ": " + status + " row without a matching resolution");
                }
            } else {
                out.push_back(id + ": unexpected review_status '" + status + "'");
            }
        }
    }
    for (const auto& [id, status] : resolved) {
        if (status == review::Status::Open && seen.count(id)) {
            out.push_back(id + ": open item was integrated");
        }
    }
    return out;
}

}  // namespace reportkg::support
