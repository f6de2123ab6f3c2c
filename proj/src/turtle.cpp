#include "reportkg/turtle.hpp"

#include "reportkg/error.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace reportkg::rdf {

std::string rdf_type() { return std::string(ns::rdf) + "type"; }
std::string rdfs_subclass_of() { return std::string(ns::rdfs) + "subClassOf"; }
std::string rdfs_label() { return std::string(ns::rdfs) + "label"; }
std::string xsd_string() { return std::string(ns::xsd) + "string"; }
std::string lang_string() { return std::string(ns::rdf) + "langString"; }
std::string sosa(std::string_view local) { return std::string(ns::sosa) + std::string(local); }
std::string tasi(std::string_view local) { return std::string(ns::tasi) + std::string(local); }
std::string xsd(std::string_view local) { return std::string(ns::xsd) + std::string(local); }

Term Term::iri(std::string value) { return Term{Kind::Iri, std::move(value), {}, {}}; }

Term Term::literal(std::string lexical, std::string datatype, std::string language) {
    return Term{Kind::Literal, std::move(lexical), std::move(datatype), std::move(language)};
}

Term Term::lang_literal(std::string lexical, std::string language) {
    return literal(std::move(lexical), lang_string(), std::move(language));
}

std::string escape_string(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string Term::to_ntriples() const {
    if (is_iri()) {
        return "<" + value + ">";
    }
    std::string out = "\"" + escape_string(value) + "\"";
    if (!language.empty()) {
        return out + "@" + language;
    }
    if (datatype != xsd_string()) {
        out += "^^<" + datatype + ">";
    }
    return out;
}

PrefixMap::PrefixMap() {
    add("rdf", std::string(ns::rdf));
    add("rdfs", std::string(ns::rdfs));
    add("xsd", std::string(ns::xsd));
    add("sosa", std::string(ns::sosa));
    add("tasi", std::string(ns::tasi));
    add("cdt", std::string(ns::cdt));
}

PrefixMap PrefixMap::empty() { return PrefixMap(Empty{}); }

void PrefixMap::add(std::string prefix, std::string iri) { entries_[std::move(prefix)] = std::move(iri); }

std::optional<std::string> PrefixMap::expand(std::string_view prefix, std::string_view local) const {
    const auto it = entries_.find(prefix);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second + std::string(local);
}

namespace {

bool safe_local(std::string_view local) {
    if (local.empty() || local.front() == '-' || local.front() == '.' || local.back() == '.') {
        return false;
    }
    return std::all_of(local.begin(), local.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

}  // namespace

std::optional<std::string> PrefixMap::compact(std::string_view iri) const {
    std::optional<std::string> best;
    for (const auto& [prefix, ns_iri] : entries_) {
        if (iri.size() <= ns_iri.size() || iri.substr(0, ns_iri.size()) != ns_iri) {
            continue;
        }
        const std::string_view local = iri.substr(ns_iri.size());
        if (!safe_local(local)) {
            continue;
        }
        std::string candidate = prefix + ":" + std::string(local);
        if (!best || candidate.size() < best->size()) {
            best = std::move(candidate);
        }
    }
    return best;
}

namespace {

class TurtleParser {
public:
    TurtleParser(std::string_view text, PrefixMap prefixes) : text_(text) { result_.prefixes = std::move(prefixes); }

    ParsedTurtle parse() {
        skip_ws();
        while (!at_end()) {
            if (peek() == '@') {
                parse_at_directive();
            } else if (keyword_ahead("PREFIX")) {
                parse_sparql_prefix();
            } else {
                parse_statement();
            }
            skip_ws();
        }
        return std::move(result_);
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw Error(ErrorKind::ParseError, std::to_string(line_) + ":" + std::to_string(column_) + ": " + message);
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek(std::size_t offset = 0) const { return pos_ + offset < text_.size() ? text_[pos_ + offset] : '\0'; }

    char advance() {
        const char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void skip_ws() {
        while (!at_end()) {
            const char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '#') {
                while (!at_end() && peek() != '\n') {
                    advance();
                }
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        advance();
    }

    bool keyword_ahead(std::string_view keyword) const {
        if (text_.size() - pos_ < keyword.size()) {
            return false;
        }
        for (std::size_t i = 0; i < keyword.size(); ++i) {
            if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != keyword[i]) {
                return false;
            }
        }
        const char next = peek(keyword.size());
        return std::isspace(static_cast<unsigned char>(next)) != 0;
    }

    void parse_at_directive() {
        advance();  // '@'
        const std::string word = read_name();
        if (word != "prefix") {
            fail("unsupported directive @" + word);
        }
        parse_prefix_body();
        expect('.');
    }

    void parse_sparql_prefix() {
        for (int i = 0; i < 6; ++i) {
            advance();
        }
        parse_prefix_body();
    }

    void parse_prefix_body() {
        skip_ws();
        std::string name = read_name();
        if (name.empty() || name.back() != ':') {
            fail("expected prefix label ending in ':'");
        }
        name.pop_back();
        skip_ws();
        const std::string iri = read_iriref();
        result_.prefixes.add(std::move(name), iri);
    }

    void parse_statement() {
        const Term subject = parse_iri_term();
        if (!subject.is_iri()) {
            fail("subject must be an IRI");
        }
        parse_predicate_object_list(subject);
        expect('.');
    }

    void parse_predicate_object_list(const Term& subject) {
        while (true) {
            skip_ws();
            const Term predicate = parse_verb();
            while (true) {
                const Term object = parse_object();
                result_.triples.push_back(Triple{subject, predicate, object});
                skip_ws();
                if (peek() != ',') {
                    break;
                }
                advance();
            }
            skip_ws();
            if (peek() != ';') {
                return;
            }
            while (peek() == ';') {
                advance();
                skip_ws();
            }
            if (peek() == '.') {
                return;
            }
        }
    }

    Term parse_verb() {
        if (peek() == 'a' && (std::isspace(static_cast<unsigned char>(peek(1))) || peek(1) == '<')) {
            advance();
            return Term::iri(rdf_type());
        }
        return parse_iri_term();
    }

    Term parse_object() {
        skip_ws();
        const char c = peek();
        if (c == '"' || c == '\'') {
            std::string lexical = read_string();
            if (peek() == '@') {
                advance();
                std::string language;
                while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) {
                    language.push_back(advance());
                }
                if (language.empty()) {
                    fail("empty language tag");
                }
                return Term::lang_literal(std::move(lexical), std::move(language));
            }
            if (peek() == '^' && peek(1) == '^') {
                advance();
                advance();
                const Term datatype = parse_iri_term();
                return Term::literal(std::move(lexical), datatype.value);
            }
            return Term::literal(std::move(lexical));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            return parse_number();
        }
        if (keyword_literal("true") || keyword_literal("false")) {
            std::string word = read_name();
            return Term::literal(std::move(word), xsd("boolean"));
        }
        return parse_iri_term();
    }

    bool keyword_literal(std::string_view word) const {
        if (text_.substr(pos_, word.size()) != word) {
            return false;
        }
        const char next = peek(word.size());
        return !(std::isalnum(static_cast<unsigned char>(next)) || next == ':' || next == '_' || next == '-');
    }

    Term parse_number() {
        std::string lexical;
        if (peek() == '+' || peek() == '-') {
            lexical.push_back(advance());
        }
        bool decimal = false;
        while (!at_end()) {
            const char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                lexical.push_back(advance());
            } else if (c == '.' && !decimal && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                decimal = true;
                lexical.push_back(advance());
            } else {
                break;
            }
        }
        return Term::literal(std::move(lexical), xsd(decimal ? "decimal" : "integer"));
    }

    Term parse_iri_term() {
        skip_ws();
        if (peek() == '<') {
            return Term::iri(read_iriref());
        }
        const std::size_t line = line_;
        const std::size_t column = column_;
        const std::string name = read_name();
        const auto colon = name.find(':');
        if (name.empty() || colon == std::string::npos) {
            line_ = line;
            column_ = column;
            fail(name.empty() ? "expected an IRI" : "expected a prefixed name, got '" + name + "'");
        }
        auto iri = result_.prefixes.expand(std::string_view(name).substr(0, colon), std::string_view(name).substr(colon + 1));
        if (!iri) {
            line_ = line;
            column_ = column;
            fail("undeclared prefix '" + name.substr(0, colon) + "'");
        }
        return Term::iri(std::move(*iri));
    }

    std::string read_iriref() {
        if (peek() != '<') {
            fail("expected '<'");
        }
        advance();
        std::string iri;
        while (!at_end() && peek() != '>') {
            const char c = advance();
            if (c == '\n' || c == ' ' || c == '"') {
                fail("invalid character in IRI");
            }
            iri.push_back(c);
        }
        if (at_end()) {
            fail("unterminated IRI");
        }
        advance();
        return iri;
    }

    // Prefixed names and bare words. A trailing '.' belongs to the statement.
    std::string read_name() {
        std::string name;
        while (!at_end()) {
            const auto c = static_cast<unsigned char>(peek());
            if (std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == ':' || c == '%' || c >= 0x80) {
                name.push_back(static_cast<char>(c));
                advance();
            } else {
                break;
            }
        }
        while (!name.empty() && name.back() == '.') {
            name.pop_back();
            --pos_;
            --column_;
        }
        return name;
    }

    std::string read_string() {
        const char quote = advance();
        std::string out;
        while (true) {
            if (at_end()) {
                fail("unterminated string");
            }
            const char c = advance();
            if (c == quote) {
                break;
            }
            if (c == '\n') {
                fail("newline in string");
            }
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (at_end()) {
                fail("unterminated escape");
            }
            const char e = advance();
            switch (e) {
                case 'n': out.push_back('\n'); break;
                case 'r': out.push_back('\r'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\'': out.push_back('\''); break;
                case '\\': out.push_back('\\'); break;
                case 'u': append_utf8(read_hex(4), out); break;
                case 'U': append_utf8(read_hex(8), out); break;
                default: fail(std::string("unknown escape \\") + e);
            }
        }
        return out;
    }

    unsigned long read_hex(int digits) {
        std::string hex;
        for (int i = 0; i < digits; ++i) {
            if (!std::isxdigit(static_cast<unsigned char>(peek()))) {
                fail("bad unicode escape");
            }
            hex.push_back(advance());
        }
        return std::stoul(hex, nullptr, 16);
    }

    void append_utf8(unsigned long code, std::string& out) {
        if (code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF)) {
            fail("invalid code point in escape");
        }
        if (code < 0x80) {
            out.push_back(static_cast<char>(code));
        } else if (code < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (code >> 6)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        } else if (code < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (code >> 12)));
            out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (code >> 18)));
            out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
    ParsedTurtle result_;
};

}  // namespace

ParsedTurtle parse_turtle(std::string_view text, const PrefixMap& prefixes) {
    return TurtleParser(text, prefixes).parse();
}

std::string serialize_turtle(std::span<const Triple> triples, const PrefixMap& prefixes) {
    std::vector<Triple> sorted(triples.begin(), triples.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    const auto iri_text = [&](const std::string& iri) {
        if (iri == rdf_type()) {
            return std::string("a");
        }
        if (auto compact = prefixes.compact(iri)) {
            return *compact;
        }
        return "<" + iri + ">";
    };
    const auto term_text = [&](const Term& term) {
        if (term.is_iri()) {
            const std::string text = iri_text(term.value);
            return text == "a" ? prefixes.compact(term.value).value_or("<" + term.value + ">") : text;
        }
        std::string out = "\"" + escape_string(term.value) + "\"";
        if (!term.language.empty()) {
            return out + "@" + term.language;
        }
        if (term.datatype != xsd_string()) {
            out += "^^" + iri_text(term.datatype);
        }
        return out;
    };

    std::ostringstream out;
    for (const auto& [prefix, iri] : prefixes.entries()) {
        out << "@prefix " << prefix << ": <" << iri << "> .\n";
    }
    std::size_t i = 0;
    while (i < sorted.size()) {
        const Term& subject = sorted[i].subject;
        out << "\n" << term_text(subject);
        bool first_predicate = true;
        while (i < sorted.size() && sorted[i].subject == subject) {
            const Term& predicate = sorted[i].predicate;
            out << (first_predicate ? " " : " ;\n    ") << iri_text(predicate.value) << " ";
            first_predicate = false;
            bool first_object = true;
            while (i < sorted.size() && sorted[i].subject == subject && sorted[i].predicate == predicate) {
                out << (first_object ? "" : ", ") << term_text(sorted[i].object);
                first_object = false;
                ++i;
            }
        }
        out << " .\n";
    }
    return out.str();
}

}  // namespace reportkg::rdf
