#pragma once

#include "reportkg/model.hpp"
#include "reportkg/rdf.hpp"
#include "reportkg/turtle.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace reportkg::kg {

using rdf::Term;
using rdf::Triple;

struct Variable {
    std::string name;  // without the leading '?'

    friend bool operator==(const Variable&, const Variable&) = default;
    friend auto operator<=>(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Term, Variable>;

struct TriplePattern {
    PatternTerm subject;
    PatternTerm predicate;
    PatternTerm object;
};

/// Variable name -> bound term. Ordered so that sorting bindings is deterministic.
using Bindings = std::map<std::string, Term>;

/// Binds `triple` against `pattern` on top of `base`; nullopt on conflict.
std::optional<Bindings> unify(const TriplePattern& pattern, const Triple& triple, const Bindings& base = {});

/// Replaces variables already bound in `bindings` with their terms.
TriplePattern substitute(const TriplePattern& pattern, const Bindings& bindings);

/// Candidate triples for a (partially bound) pattern.
using TripleSource = std::function<std::vector<Triple>(const TriplePattern&)>;

/// Conjunctive evaluation by nested-loop join in pattern order; result is
/// deduplicated and sorted.
std::vector<Bindings> evaluate_bgp(std::span<const TriplePattern> patterns, const TripleSource& source);

/// Test-table structure attached to an observable property.
struct StructureDef {
    std::string property;  // IRI
    std::string label;
    std::string acceptance_limits_location;
    std::string results_location;
    /// Role name ("Label", "MeasuredValue", "AcceptanceLimits", "Success") -> header synonyms.
    std::map<std::string, std::vector<std::string>> header_hints;
    bool leaf = true;
};

/// In-memory triple store. Single writer, concurrent readers; each write call is
/// applied atomically.
class TripleStore {
public:
    TripleStore() = default;
    TripleStore(const TripleStore& other);
    TripleStore& operator=(const TripleStore& other);

    /// Inserts a batch; returns how many triples were new.
    std::size_t insert(std::span<const Triple> triples);
    std::size_t erase(std::span<const Triple> triples);

    /// Parses the Turtle subset and inserts; returns the number of new triples.
    std::size_t load_turtle(std::string_view text);
    std::string serialize() const;

    std::size_t size() const;
    std::vector<Triple> triples() const;
    bool contains(const Triple& triple) const;

    /// Triples matching the bound positions of `pattern`, in (s, p, o) order.
    std::vector<Triple> find(const TriplePattern& pattern) const;
    /// Bindings for every matching triple, in (s, p, o) order of the matched triples.
    std::vector<Bindings> match(const TriplePattern& pattern) const;

    /// Reflexive-transitive closure over rdfs:subClassOf (subclasses of `class_iri`).
    std::set<std::string> subclasses_of(const std::string& class_iri) const;

    /// Observable properties: typed sosa:ObservableProperty plus all their subclasses.
    std::set<std::string> observable_properties() const;
    std::optional<StructureDef> structure_def(const std::string& property) const;
    /// Leaf observable properties missing a results or acceptance-limits location.
    std::vector<std::string> incomplete_structure_defs() const;

    /// Emits the report metadata shape: type, one `reports` per property, date
    /// (xsd:dateTime), name, reference, validation, location. Throws DuplicateReport
    /// unless `update` is set, in which case the previous metadata is replaced.
    std::vector<Triple> register_report(const ReportMeta& meta, bool update = false);
    std::optional<ReportMeta> report(const std::string& reference) const;
    std::vector<std::string> report_references() const;
    /// Throws UnknownReport.
    void set_report_validation(const std::string& reference, ReportStatus status);

    const rdf::PrefixMap& prefixes() const { return prefixes_; }
    void add_prefix(std::string prefix, std::string iri);

private:
    std::vector<Triple> find_unlocked(const TriplePattern& pattern) const;
    std::optional<std::string> report_subject_unlocked(const std::string& reference) const;

    mutable std::shared_mutex mutex_;
    std::set<Triple> triples_;
    rdf::PrefixMap prefixes_;
};

std::string report_iri(const std::string& reference);

}  // namespace reportkg::kg
