#include "reportkg/kg.hpp"

#include "reportkg/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <deque>
#include <mutex>

namespace reportkg::kg {

namespace {

const Term* bound(const PatternTerm& term) { return std::get_if<Term>(&term); }

bool bind(const PatternTerm& slot, const Term& value, Bindings& bindings) {
    if (const Term* term = bound(slot)) {
        return *term == value;
    }
    const auto& name = std::get<Variable>(slot).name;
    const auto [it, inserted] = bindings.emplace(name, value);
    return inserted || it->second == value;
}

PatternTerm substitute_term(const PatternTerm& slot, const Bindings& bindings) {
    if (const auto* variable = std::get_if<Variable>(&slot)) {
        if (const auto it = bindings.find(variable->name); it != bindings.end()) {
            return it->second;
        }
    }
    return slot;
}

std::string literal_value(const std::set<Triple>& triples, const Term& subject, const std::string& predicate) {
    const Triple low{subject, Term::iri(predicate), Term{}};
    for (auto it = triples.lower_bound(low); it != triples.end() && it->subject == subject; ++it) {
        if (it->predicate.value == predicate && it->object.is_literal()) {
            return it->object.value;
        }
    }
    return {};
}

}  // namespace

std::optional<Bindings> unify(const TriplePattern& pattern, const Triple& triple, const Bindings& base) {
    Bindings bindings = base;
    if (bind(pattern.subject, triple.subject, bindings) && bind(pattern.predicate, triple.predicate, bindings) &&
        bind(pattern.object, triple.object, bindings)) {
        return bindings;
    }
    return std::nullopt;
}

TriplePattern substitute(const TriplePattern& pattern, const Bindings& bindings) {
    return TriplePattern{substitute_term(pattern.subject, bindings), substitute_term(pattern.predicate, bindings),
                         substitute_term(pattern.object, bindings)};
}

std::vector<Bindings> evaluate_bgp(std::span<const TriplePattern> patterns, const TripleSource& source) {
    std::vector<Bindings> current{Bindings{}};
    for (const auto& pattern : patterns) {
        std::vector<Bindings> next;
        for (const auto& bindings : current) {
            const TriplePattern concrete = substitute(pattern, bindings);
            for (const auto& triple : source(concrete)) {
                if (auto extended = unify(concrete, triple, bindings)) {
                    next.push_back(std::move(*extended));
                }
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        current = std::move(next);
        if (current.empty()) {
            break;
        }
    }
    return current;
}

TripleStore::TripleStore(const TripleStore& other) {
    std::shared_lock lock(other.mutex_);
    triples_ = other.triples_;
    prefixes_ = other.prefixes_;
}

TripleStore& TripleStore::operator=(const TripleStore& other) {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        triples_ = other.triples_;
        prefixes_ = other.prefixes_;
    }
    return *this;
}

std::size_t TripleStore::insert(std::span<const Triple> triples) {
    std::unique_lock lock(mutex_);
    std::size_t added = 0;
    for (const auto& triple : triples) {
        added += triples_.insert(triple).second ? 1 : 0;
    }
    return added;
}

std::size_t TripleStore::erase(std::span<const Triple> triples) {
    std::unique_lock lock(mutex_);
    std::size_t removed = 0;
    for (const auto& triple : triples) {
        removed += triples_.erase(triple);
    }
    return removed;
}

std::size_t TripleStore::load_turtle(std::string_view text) {
    rdf::ParsedTurtle parsed = [&] {
        std::shared_lock lock(mutex_);
        return rdf::parse_turtle(text, prefixes_);
    }();
    std::unique_lock lock(mutex_);
    prefixes_ = std::move(parsed.prefixes);
    std::size_t added = 0;
    for (auto& triple : parsed.triples) {
        added += triples_.insert(std::move(triple)).second ? 1 : 0;
    }
    return added;
}

std::string TripleStore::serialize() const {
    std::shared_lock lock(mutex_);
    const std::vector<Triple> all(triples_.begin(), triples_.end());
    return rdf::serialize_turtle(all, prefixes_);
}

std::size_t TripleStore::size() const {
    std::shared_lock lock(mutex_);
    return triples_.size();
}

std::vector<Triple> TripleStore::triples() const {
    std::shared_lock lock(mutex_);
    return {triples_.begin(), triples_.end()};
}

bool TripleStore::contains(const Triple& triple) const {
    std::shared_lock lock(mutex_);
    return triples_.count(triple) != 0;
}

std::vector<Triple> TripleStore::find_unlocked(const TriplePattern& pattern) const {
    std::vector<Triple> out;
    const auto accept = [&](const Triple& triple) {
        const Term* s = bound(pattern.subject);
        const Term* p = bound(pattern.predicate);
        const Term* o = bound(pattern.object);
        return (!s || *s == triple.subject) && (!p || *p == triple.predicate) && (!o || *o == triple.object);
    };
    if (const Term* subject = bound(pattern.subject)) {
        for (auto it = triples_.lower_bound(Triple{*subject, Term{}, Term{}});
             it != triples_.end() && it->subject == *subject; ++it) {
            if (accept(*it)) {
                out.push_back(*it);
            }
        }
        return out;
    }
    for (const auto& triple : triples_) {
        if (accept(triple)) {
            out.push_back(triple);
        }
    }
    return out;
}

std::vector<Triple> TripleStore::find(const TriplePattern& pattern) const {
    std::shared_lock lock(mutex_);
    return find_unlocked(pattern);
}

std::vector<Bindings> TripleStore::match(const TriplePattern& pattern) const {
    std::vector<Bindings> out;
    for (const auto& triple : find(pattern)) {
        if (auto bindings = unify(pattern, triple)) {
            out.push_back(std::move(*bindings));
        }
    }
    return out;
}

std::set<std::string> TripleStore::subclasses_of(const std::string& class_iri) const {
    std::shared_lock lock(mutex_);
    const Term subclass_of = Term::iri(rdf::rdfs_subclass_of());
    std::set<std::string> closure{class_iri};
    std::deque<std::string> frontier{class_iri};
    while (!frontier.empty()) {
        const Term parent = Term::iri(frontier.front());
        frontier.pop_front();
        for (const auto& triple : find_unlocked(TriplePattern{Variable{"s"}, subclass_of, parent})) {
            if (triple.subject.is_iri() && closure.insert(triple.subject.value).second) {
                frontier.push_back(triple.subject.value);
            }
        }
    }
    return closure;
}

std::set<std::string> TripleStore::observable_properties() const {
    std::vector<Triple> typed = find(TriplePattern{Variable{"p"}, Term::iri(rdf::rdf_type()),
                                                   Term::iri(rdf::sosa("ObservableProperty"))});
    std::set<std::string> properties;
    for (const auto& triple : typed) {
        const auto closure = subclasses_of(triple.subject.value);
        properties.insert(closure.begin(), closure.end());
    }
    return properties;
}

std::optional<StructureDef> TripleStore::structure_def(const std::string& property) const {
    if (observable_properties().count(property) == 0) {
        return std::nullopt;
    }
    const bool leaf = subclasses_of(property).size() == 1;
    std::shared_lock lock(mutex_);
    const Term subject = Term::iri(property);
    StructureDef def;
    def.property = property;
    def.leaf = leaf;
    def.label = literal_value(triples_, subject, rdf::rdfs_label());
    def.acceptance_limits_location = literal_value(triples_, subject, rdf::tasi("obsPropertyAccLimLocation"));
    def.results_location = literal_value(triples_, subject, rdf::tasi("obsPropertyResultsLocation"));
    for (const auto& [role, predicate] : std::map<std::string, std::string>{
             {"Label", "labelHeader"},
             {"MeasuredValue", "measuredValueHeader"},
             {"AcceptanceLimits", "acceptanceLimitsHeader"},
             {"Success", "successHeader"}}) {
        for (const auto& triple : find_unlocked(TriplePattern{subject, Term::iri(rdf::tasi(predicate)), Variable{"o"}})) {
            if (triple.object.is_literal()) {
                def.header_hints[role].push_back(triple.object.value);
            }
        }
    }
    return def;
}

std::vector<std::string> TripleStore::incomplete_structure_defs() const {
    std::vector<std::string> missing;
    for (const auto& property : observable_properties()) {
        const auto def = structure_def(property);
        if (def && def->leaf && (def->results_location.empty() || def->acceptance_limits_location.empty())) {
            missing.push_back(property);
        }
    }
    return missing;
}

std::string report_iri(const std::string& reference) { return std::string(rdf::ns::report) + reference; }

std::optional<std::string> TripleStore::report_subject_unlocked(const std::string& reference) const {
    const auto matches = find_unlocked(
        TriplePattern{Variable{"r"}, Term::iri(rdf::tasi("testReportReference")), Term::literal(reference)});
    if (matches.empty()) {
        return std::nullopt;
    }
    return matches.front().subject.value;
}

std::vector<Triple> TripleStore::register_report(const ReportMeta& meta, bool update) {
    const Term subject = Term::iri(report_iri(meta.reference));
    const auto p = [](const char* local) { return Term::iri(rdf::tasi(local)); };
    std::vector<Triple> triples;
    triples.push_back({subject, Term::iri(rdf::rdf_type()), p("TestReport")});
    for (const auto& property : meta.reported_properties) {
        triples.push_back({subject, p("reports"), Term::iri(property)});
    }
    triples.push_back({subject, p("testReportDate"), Term::literal(meta.date, rdf::xsd("dateTime"))});
    triples.push_back({subject, p("testReportName"), Term::literal(meta.name)});
    triples.push_back({subject, p("testReportReference"), Term::literal(meta.reference)});
    triples.push_back({subject, p("testReportValidation"), Term::literal(std::string(to_string(meta.validation)))});
    triples.push_back({subject, p("testReportLocation"), Term::literal(meta.location)});
    if (meta.reported_properties.empty()) {
        spdlog::warn("report {} reports no observable properties", meta.reference);
    }

    std::unique_lock lock(mutex_);
    if (const auto existing = report_subject_unlocked(meta.reference)) {
        if (!update) {
            throw Error(ErrorKind::DuplicateReport, "report " + meta.reference + " is already registered");
        }
        for (const auto& triple : find_unlocked(TriplePattern{Term::iri(*existing), Variable{"p"}, Variable{"o"}})) {
            triples_.erase(triple);
        }
    }
    triples_.insert(triples.begin(), triples.end());
    return triples;
}

std::optional<ReportMeta> TripleStore::report(const std::string& reference) const {
    std::shared_lock lock(mutex_);
    const auto subject_iri = report_subject_unlocked(reference);
    if (!subject_iri) {
        return std::nullopt;
    }
    const Term subject = Term::iri(*subject_iri);
    ReportMeta meta;
    meta.reference = reference;
    meta.name = literal_value(triples_, subject, rdf::tasi("testReportName"));
    meta.date = literal_value(triples_, subject, rdf::tasi("testReportDate"));
    meta.location = literal_value(triples_, subject, rdf::tasi("testReportLocation"));
    meta.validation = report_status_from_string(literal_value(triples_, subject, rdf::tasi("testReportValidation")))
                          .value_or(ReportStatus::Pending);
    for (const auto& triple : find_unlocked(TriplePattern{subject, Term::iri(rdf::tasi("reports")), Variable{"o"}})) {
        meta.reported_properties.push_back(triple.object.value);
    }
    return meta;
}

std::vector<std::string> TripleStore::report_references() const {
    std::vector<std::string> references;
    for (const auto& triple :
         find(TriplePattern{Variable{"r"}, Term::iri(rdf::tasi("testReportReference")), Variable{"ref"}})) {
        references.push_back(triple.object.value);
    }
    std::sort(references.begin(), references.end());
    return references;
}

void TripleStore::set_report_validation(const std::string& reference, ReportStatus status) {
    std::unique_lock lock(mutex_);
    const auto subject_iri = report_subject_unlocked(reference);
    if (!subject_iri) {
        throw Error(ErrorKind::UnknownReport, "report " + reference + " is not registered");
    }
    const Term subject = Term::iri(*subject_iri);
    const Term predicate = Term::iri(rdf::tasi("testReportValidation"));
    for (const auto& triple : find_unlocked(TriplePattern{subject, predicate, Variable{"o"}})) {
        triples_.erase(triple);
    }
    triples_.insert(Triple{subject, predicate, Term::literal(std::string(to_string(status)))});
}

void TripleStore::add_prefix(std::string prefix, std::string iri) {
    std::unique_lock lock(mutex_);
    prefixes_.add(std::move(prefix), std::move(iri));
}

}  // namespace reportkg::kg
