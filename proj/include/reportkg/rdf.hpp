#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace reportkg::rdf {

namespace ns {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view sosa = "http://www.w3.org/ns/sosa/";
inline constexpr std::string_view tasi = "http://www.semanticweb.org/ontologies/tasi#";
inline constexpr std::string_view cdt = "https://w3id.org/cdt/";
/// Namespace of test-report subjects (`<http://tasi.com#TASI-1234>`).
inline constexpr std::string_view report = "http://tasi.com#";
}  // namespace ns

std::string rdf_type();
std::string rdfs_subclass_of();
std::string rdfs_label();
std::string xsd_string();
std::string lang_string();
std::string sosa(std::string_view local);
std::string tasi(std::string_view local);
std::string xsd(std::string_view local);

/// An IRI or a literal. Literals always carry a datatype (xsd:string by default,
/// rdf:langString when a language tag is present).
struct Term {
    enum class Kind { Iri, Literal };

    Kind kind = Kind::Iri;
    std::string value;
    std::string datatype;
    std::string language;

    static Term iri(std::string value);
    static Term literal(std::string lexical, std::string datatype = xsd_string(), std::string language = {});
    static Term lang_literal(std::string lexical, std::string language);

    bool is_iri() const { return kind == Kind::Iri; }
    bool is_literal() const { return kind == Kind::Literal; }

    /// N-Triples form: `<iri>`, `"lex"`, `"lex"@en`, `"lex"^^<dt>`.
    std::string to_ntriples() const;

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Prefix label -> namespace IRI. Starts with the fixed built-ins
/// sosa, tasi, rdfs, rdf, xsd, cdt.
class PrefixMap {
public:
    PrefixMap();
    static PrefixMap empty();

    void add(std::string prefix, std::string iri);
    std::optional<std::string> expand(std::string_view prefix, std::string_view local) const;
    /// Shortest `prefix:local` form with a safe local part, or nullopt.
    std::optional<std::string> compact(std::string_view iri) const;

    const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

private:
    struct Empty {};
    explicit PrefixMap(Empty) {}

    std::map<std::string, std::string, std::less<>> entries_;
};

std::string escape_string(std::string_view text);

}  // namespace reportkg::rdf
