#pragma once

#include "reportkg/rdf.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::rdf {

/// Turtle subset used for ontology and metadata files:
///
///   document   := (directive | statement)*
///   directive  := '@prefix' PNAME_NS IRIREF '.' | 'PREFIX' PNAME_NS IRIREF
///   statement  := subject predicateObjectList '.'
///   predicateObjectList := verb objectList (';' (verb objectList)?)*
///   objectList := object (',' object)*
///   verb       := 'a' | iri
///   subject    := iri
///   object     := iri | literal
///   iri        := IRIREF | PrefixedName
///   literal    := STRING ('@' LANGTAG | '^^' iri)? | INTEGER | DECIMAL | 'true' | 'false'
///
/// STRING is "..." or '...' with \" \' \\ \n \r \t \uXXXX escapes. `#` starts a comment.
/// Blank nodes, collections and long strings are not part of the subset.
struct ParsedTurtle {
    std::vector<Triple> triples;  // in document order, duplicates kept
    PrefixMap prefixes;
};

/// Throws Error(ParseError) with "line:column" in the message.
ParsedTurtle parse_turtle(std::string_view text, const PrefixMap& prefixes = PrefixMap());

/// Deterministic serialization: prefix directives, then subjects in sorted order with
/// predicates and objects sorted. `parse_turtle(serialize_turtle(t))` yields the same set.
std::string serialize_turtle(std::span<const Triple> triples, const PrefixMap& prefixes = PrefixMap());

}  // namespace reportkg::rdf
