#pragma once

#include "reportkg/csv.hpp"
#include "reportkg/kg.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::vkg {

using kg::Bindings;
using kg::TriplePattern;
using rdf::Term;
using rdf::Triple;

/// Text with `{column}` slots.
struct Template {
    struct Segment {
        std::string text;
        bool placeholder = false;
    };
    std::vector<Segment> segments;

    static Template parse(std::string_view text);
    bool is_constant() const;
    std::vector<std::string> placeholders() const;
};

struct TermTemplate {
    Term::Kind kind = Term::Kind::Iri;
    Template text;         // full IRI (prefix expanded) or literal lexical form
    std::string datatype;  // literals only
    std::string language;
};

struct TripleTemplate {
    TermTemplate subject;
    TermTemplate predicate;
    TermTemplate object;
};

/// SELECT c1, c2 FROM table [WHERE column = constant]
struct SourceQuery {
    std::vector<std::string> columns;
    std::string table;
    std::optional<std::pair<std::string, std::string>> filter;
};

struct Mapping {
    std::string id;
    std::vector<TripleTemplate> target;
    SourceQuery source;
};

/// Prefixes known to mapping files besides the RDF built-ins (tasi-pol).
rdf::PrefixMap default_mapping_prefixes();

/// Blocks of `mappingId` / `target` / `source`, optionally preceded by a
/// `[PrefixDeclaration]` section of `prefix: <iri>` lines. Throws MappingParseError
/// and UnboundPlaceholder.
std::vector<Mapping> parse_mappings(std::string_view text, rdf::PrefixMap prefixes = default_mapping_prefixes());

/// True when `table` is the source table, compared with or without a schema qualifier.
bool source_matches(const SourceQuery& source, const RowTable& table);

/// Per row (in order) every target template instantiated. Values substituted into
/// IRIs are percent-encoded. Throws UnknownTable and MissingColumn.
std::vector<Triple> unfold(const Mapping& mapping, const RowTable& table);

/// Unfolds every mapping against its source table (mappings without a table are skipped).
std::vector<Triple> materialize(const std::vector<Mapping>& mappings, const std::vector<RowTable>& tables);

struct BGPQuery {
    std::vector<TriplePattern> patterns;
    std::vector<std::string> projection;  // empty means every variable
};

/// `[PREFIX p: <iri>]* SELECT [DISTINCT] (?v+ | *) WHERE { patterns }` where patterns
/// use the Turtle shorthand `a`, `;`, `,` and `.`. Throws ParseError.
BGPQuery parse_query(std::string_view text, rdf::PrefixMap prefixes = default_mapping_prefixes());

/// Distinct, sorted bindings of `query` over the store plus the virtual triples. A
/// pattern `?o sosa:observedProperty C` also matches every subclass of C. Only the
/// templates and rows that can produce a matching triple are instantiated.
std::vector<Bindings> answer(const BGPQuery& query, const kg::TripleStore& store,
                             const std::vector<Mapping>& mappings, const std::vector<RowTable>& tables);

/// Reference evaluation: materialize everything into a copy of the store, then match.
std::vector<Bindings> answer_materialized(const BGPQuery& query, const kg::TripleStore& store,
                                          const std::vector<Mapping>& mappings, const std::vector<RowTable>& tables);

/// SPARQL 1.1 JSON results layout; keys sorted, so output is byte-stable.
std::string bindings_to_json(const BGPQuery& query, const std::vector<Bindings>& bindings);

std::string percent_encode(std::string_view value);

}  // namespace reportkg::vkg
