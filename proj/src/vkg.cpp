#include "reportkg/vkg.hpp"

#include "reportkg/config.hpp"
#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

namespace reportkg::vkg {

namespace {

enum class Mode { Target, Query };

struct Token {
    enum class Kind { Iri, Name, String, Placeholder, Variable, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    std::string datatype;  // raw name or <iri> following ^^, for String and Placeholder
    std::string language;
    std::size_t offset = 0;
};

class Lexer {
public:
    Lexer(std::string_view text, Mode mode, ErrorKind error) : text_(text), mode_(mode), error_(error) {}

    Token next() {
        skip_space();
        Token token;
        token.offset = pos_;
        if (pos_ >= text_.size()) {
            return token;
        }
        const char c = text_[pos_];
        if (c == ';' || c == ',' || c == '.' || (mode_ == Mode::Query && (c == '{' || c == '}' || c == '*'))) {
            token.kind = Token::Kind::Punct;
            token.text = std::string(1, c);
            ++pos_;
            return token;
        }
        if (c == '<') {
            const auto close = text_.find('>', pos_);
            if (close == std::string_view::npos) {
                fail("unterminated IRI");
            }
            token.kind = Token::Kind::Iri;
            token.text = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
            pos_ = close + 1;
            return token;
        }
        if (c == '"' || c == '\'') {
            token.kind = Token::Kind::String;
            token.text = read_string(c);
            read_annotation(token);
            return token;
        }
        if (mode_ == Mode::Target && c == '{') {
            const auto close = text_.find('}', pos_);
            if (close == std::string_view::npos) {
                fail("unterminated placeholder");
            }
            token.kind = Token::Kind::Placeholder;
            token.text = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
            pos_ = close + 1;
            read_annotation(token);
            return token;
        }
        if (mode_ == Mode::Query && (c == '?' || c == '$')) {
            ++pos_;
            token.kind = Token::Kind::Variable;
            token.text = read_name();
            if (token.text.empty()) {
                fail("empty variable name");
            }
            return token;
        }
        token.kind = Token::Kind::Name;
        token.text = read_name();
        if (token.text.empty()) {
            fail(std::string("unexpected character '") + c + "'");
        }
        return token;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(error_, "offset " + std::to_string(pos_) + ": " + what);
    }

private:
    void skip_space() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_[pos_] == '#' && mode_ == Mode::Query) {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    bool name_stop(std::size_t i) const {
        const char c = text_[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == ';' || c == ',' || c == '"' || c == '<') {
            return true;
        }
        if (mode_ == Mode::Query && (c == '{' || c == '}')) {
            return true;
        }
        if (c == '^' && i + 1 < text_.size() && text_[i + 1] == '^') {
            return true;
        }
        if (c == '.') {
            return i + 1 >= text_.size() || std::isspace(static_cast<unsigned char>(text_[i + 1])) ||
                   (mode_ == Mode::Query && text_[i + 1] == '}');
        }
        return false;
    }

    std::string read_name() {
        const std::size_t start = pos_;
        int depth = 0;
        while (pos_ < text_.size() && (depth > 0 || !name_stop(pos_))) {
            if (mode_ == Mode::Target && text_[pos_] == '{') {
                ++depth;
            } else if (mode_ == Mode::Target && text_[pos_] == '}') {
                --depth;
            }
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string read_string(char quote) {
        std::string out;
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != quote) {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                ++pos_;
                switch (text_[pos_]) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    default: out.push_back(text_[pos_]);
                }
            } else {
                out.push_back(text_[pos_]);
            }
            ++pos_;
        }
        if (pos_ >= text_.size()) {
            fail("unterminated string");
        }
        ++pos_;
        return out;
    }

    void read_annotation(Token& token) {
        if (text_.substr(pos_, 2) == "^^") {
            pos_ += 2;
            if (pos_ < text_.size() && text_[pos_] == '<') {
                const auto close = text_.find('>', pos_);
                if (close == std::string_view::npos) {
                    fail("unterminated datatype IRI");
                }
                token.datatype = std::string(text_.substr(pos_, close - pos_ + 1));
                pos_ = close + 1;
            } else {
                token.datatype = read_name();
            }
            if (token.datatype.empty()) {
                fail("missing datatype after ^^");
            }
        } else if (pos_ < text_.size() && text_[pos_] == '@') {
            ++pos_;
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-')) {
                ++pos_;
            }
            token.language = std::string(text_.substr(start, pos_ - start));
        }
    }

    std::string_view text_;
    Mode mode_;
    ErrorKind error_;
    std::size_t pos_ = 0;
};

std::string expand_name(const std::string& name, const rdf::PrefixMap& prefixes, const Lexer& lexer) {
    if (name.front() == '<') {
        return name.substr(1, name.size() - 2);
    }
    const auto colon = name.find(':');
    if (colon == std::string::npos) {
        lexer.fail("expected a prefixed name, found '" + name + "'");
    }
    const auto ns = prefixes.expand(name.substr(0, colon), "");
    if (!ns) {
        lexer.fail("unknown prefix '" + name.substr(0, colon) + "'");
    }
    return *ns + name.substr(colon + 1);
}

std::string instantiate(const Template& tmpl, const std::map<std::string, std::string>& row, bool encode) {
    std::string out;
    for (const auto& segment : tmpl.segments) {
        if (!segment.placeholder) {
            out += segment.text;
        } else {
            const std::string& value = row.at(segment.text);
            out += encode ? percent_encode(value) : value;
        }
    }
    return out;
}

Term instantiate(const TermTemplate& tmpl, const std::map<std::string, std::string>& row) {
    if (tmpl.kind == Term::Kind::Iri) {
        return Term::iri(instantiate(tmpl.text, row, true));
    }
    if (!tmpl.language.empty()) {
        return Term::lang_literal(instantiate(tmpl.text, row, false), tmpl.language);
    }
    return Term::literal(instantiate(tmpl.text, row, false), tmpl.datatype);
}

class TargetParser {
public:
    TargetParser(std::string_view text, const rdf::PrefixMap& prefixes)
        : lexer_(text, Mode::Target, ErrorKind::MappingParseError), prefixes_(prefixes) {
        advance();
    }

    std::vector<TripleTemplate> parse() {
        std::vector<TripleTemplate> out;
        while (current_.kind != Token::Kind::End) {
            const TermTemplate subject = iri_term(current_);
            advance();
            while (true) {
                const TermTemplate predicate = verb();
                while (true) {
                    out.push_back(TripleTemplate{subject, predicate, object()});
                    if (!is_punct(",")) {
                        break;
                    }
                    advance();
                }
                if (is_punct(";")) {
                    advance();
                    if (is_punct(".") || current_.kind == Token::Kind::End) {
                        break;
                    }
                    continue;
                }
                break;
            }
            if (is_punct(".")) {
                advance();
            } else if (current_.kind != Token::Kind::End) {
                lexer_.fail("expected ';', ',' or '.' after object");
            }
        }
        return out;
    }

private:
    void advance() { current_ = lexer_.next(); }
    bool is_punct(const char* p) const { return current_.kind == Token::Kind::Punct && current_.text == p; }

    TermTemplate iri_term(const Token& token) {
        TermTemplate term;
        if (token.kind == Token::Kind::Iri) {
            term.text = Template::parse(token.text);
        } else if (token.kind == Token::Kind::Name && token.text != "a") {
            term.text = Template::parse(expand_name(token.text, prefixes_, lexer_));
        } else {
            lexer_.fail("expected an IRI template");
        }
        return term;
    }

    TermTemplate verb() {
        TermTemplate term;
        if (current_.kind == Token::Kind::Name && current_.text == "a") {
            term.text = Template::parse(rdf::rdf_type());
        } else {
            term = iri_term(current_);
            if (!term.text.is_constant()) {
                lexer_.fail("predicates cannot contain placeholders");
            }
        }
        advance();
        return term;
    }

    TermTemplate object() {
        TermTemplate term;
        if (current_.kind == Token::Kind::String || current_.kind == Token::Kind::Placeholder) {
            term.kind = Term::Kind::Literal;
            term.text = current_.kind == Token::Kind::String ? Template::parse(current_.text)
                                                             : Template::parse("{" + current_.text + "}");
            term.language = current_.language;
            term.datatype = current_.datatype.empty() ? (term.language.empty() ? rdf::xsd_string() : rdf::lang_string())
                                                      : expand_name(current_.datatype, prefixes_, lexer_);
        } else {
            term = iri_term(current_);
        }
        advance();
        return term;
    }

    Lexer lexer_;
    const rdf::PrefixMap& prefixes_;
    Token current_;
};

SourceQuery parse_source(std::string text) {
    std::replace_if(text.begin(), text.end(), [](char c) { return c == '\n' || c == '\r' || c == '\t'; }, ' ');
    static const std::regex grammar(
        R"(^\s*SELECT\s+(.+?)\s+FROM\s+([A-Za-z_][A-Za-z0-9_.]*)(?:\s+WHERE\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*('[^']*'|"[^"]*"|[^\s'"]+))?\s*;?\s*$)",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_match(text, m, grammar)) {
        throw Error(ErrorKind::MappingParseError,
                    "source must be SELECT columns FROM table [WHERE column = constant]: " + trim(text));
    }
    static const std::regex identifier(R"([A-Za-z_][A-Za-z0-9_]*)");
    SourceQuery source;
    for (const auto& column : split(m[1].str(), ',')) {
        const std::string name = trim(column);
        if (!std::regex_match(name, identifier)) {
            throw Error(ErrorKind::MappingParseError, "invalid source column '" + name + "' (missing comma?)");
        }
        source.columns.push_back(name);
    }
    source.table = m[2].str();
    if (m[3].matched) {
        std::string constant = m[4].str();
        if (constant.size() >= 2 && (constant.front() == '\'' || constant.front() == '"')) {
            constant = constant.substr(1, constant.size() - 2);
        }
        source.filter = std::make_pair(m[3].str(), constant);
    }
    return source;
}

Mapping finish_mapping(const std::string& id, const std::string& target, const std::string& source,
                       const rdf::PrefixMap& prefixes) {
    if (id.empty() || target.empty() || source.empty()) {
        throw Error(ErrorKind::MappingParseError,
                    "mapping '" + id + "' needs mappingId, target and source");
    }
    Mapping mapping;
    mapping.id = id;
    try {
        mapping.target = TargetParser(target, prefixes).parse();
    } catch (const Error& e) {
        throw Error(e.kind(), "mapping " + id + " target: " + e.detail());
    }
    if (mapping.target.empty()) {
        throw Error(ErrorKind::MappingParseError, "mapping " + id + " has an empty target");
    }
    mapping.source = parse_source(source);
    const std::set<std::string> columns(mapping.source.columns.begin(), mapping.source.columns.end());
    for (const auto& tmpl : mapping.target) {
        for (const auto* term : {&tmpl.subject, &tmpl.predicate, &tmpl.object}) {
            for (const auto& placeholder : term->text.placeholders()) {
                if (columns.count(placeholder) == 0) {
                    throw Error(ErrorKind::UnboundPlaceholder,
                                "mapping " + id + ": {" + placeholder + "} is not a source column");
                }
            }
        }
    }
    return mapping;
}

std::vector<std::map<std::string, std::string>> source_rows(const Mapping& mapping, const RowTable& table) {
    if (!source_matches(mapping.source, table)) {
        throw Error(ErrorKind::UnknownTable,
                    "mapping " + mapping.id + " reads " + mapping.source.table + ", not " + table.name);
    }
    std::vector<std::size_t> indices;
    for (const auto& column : mapping.source.columns) {
        const auto index = table.column_index(column);
        if (index == std::string::npos) {
            throw Error(ErrorKind::MissingColumn, "table " + table.name + " has no column " + column +
                                                      " required by mapping " + mapping.id);
        }
        indices.push_back(index);
    }
    std::size_t filter_index = std::string::npos;
    if (mapping.source.filter) {
        filter_index = table.column_index(mapping.source.filter->first);
        if (filter_index == std::string::npos) {
            throw Error(ErrorKind::MissingColumn, "table " + table.name + " has no column " +
                                                      mapping.source.filter->first + " used in WHERE");
        }
    }
    std::vector<std::map<std::string, std::string>> rows;
    for (const auto& row : table.rows) {
        if (filter_index != std::string::npos && row.at(filter_index) != mapping.source.filter->second) {
            continue;
        }
        std::map<std::string, std::string> values;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            values[mapping.source.columns[i]] = row.at(indices[i]);
        }
        rows.push_back(std::move(values));
    }
    return rows;
}

const RowTable* table_for(const Mapping& mapping, const std::vector<RowTable>& tables) {
    for (const auto& table : tables) {
        if (source_matches(mapping.source, table)) {
            return &table;
        }
    }
    return nullptr;
}

bool term_matches(const kg::PatternTerm& slot, const Term& term) {
    const Term* bound = std::get_if<Term>(&slot);
    return !bound || *bound == term;
}

bool triple_matches(const TriplePattern& pattern, const Triple& triple) {
    return term_matches(pattern.subject, triple.subject) && term_matches(pattern.predicate, triple.predicate) &&
           term_matches(pattern.object, triple.object);
}

/// A constant template can be compared before touching any row.
bool constant_excludes(const kg::PatternTerm& slot, const TermTemplate& tmpl) {
    const Term* bound = std::get_if<Term>(&slot);
    if (!bound) {
        return false;
    }
    if (bound->kind != tmpl.kind) {
        return true;
    }
    return tmpl.text.is_constant() && instantiate(tmpl, {}) != *bound;
}

/// Pattern alternatives: observedProperty with a class object fans out over its subclasses.
std::vector<TriplePattern> alternatives(const TriplePattern& pattern, const kg::TripleStore& store) {
    const Term* predicate = std::get_if<Term>(&pattern.predicate);
    const Term* object = std::get_if<Term>(&pattern.object);
    if (!predicate || !object || !object->is_iri() || predicate->value != rdf::sosa("observedProperty")) {
        return {pattern};
    }
    std::vector<TriplePattern> out;
    for (const auto& cls : store.subclasses_of(object->value)) {
        out.push_back(TriplePattern{pattern.subject, pattern.predicate, Term::iri(cls)});
    }
    return out;
}

std::vector<Bindings> evaluate(const BGPQuery& query, const kg::TripleStore& ontology, const kg::TripleSource& source) {
    std::vector<Bindings> current{Bindings{}};
    for (const auto& pattern : query.patterns) {
        const auto options = alternatives(pattern, ontology);
        std::vector<Bindings> next;
        for (const auto& bindings : current) {
            for (const auto& option : options) {
                const TriplePattern concrete = kg::substitute(option, bindings);
                for (const auto& triple : source(concrete)) {
                    if (auto extended = kg::unify(concrete, triple, bindings)) {
                        next.push_back(std::move(*extended));
                    }
                }
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        current = std::move(next);
    }
    if (!query.projection.empty()) {
        for (auto& bindings : current) {
            Bindings projected;
            for (const auto& variable : query.projection) {
                if (const auto it = bindings.find(variable); it != bindings.end()) {
                    projected.insert(*it);
                }
            }
            bindings = std::move(projected);
        }
        std::sort(current.begin(), current.end());
        current.erase(std::unique(current.begin(), current.end()), current.end());
    }
    return current;
}

}  // namespace

Template Template::parse(std::string_view text) {
    Template out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('{', pos);
        if (open == std::string_view::npos) {
            out.segments.push_back({std::string(text.substr(pos)), false});
            break;
        }
        if (open > pos) {
            out.segments.push_back({std::string(text.substr(pos, open - pos)), false});
        }
        const auto close = text.find('}', open);
        if (close == std::string_view::npos) {
            throw Error(ErrorKind::MappingParseError, "unterminated placeholder in '" + std::string(text) + "'");
        }
        const std::string name = trim(text.substr(open + 1, close - open - 1));
        if (name.empty()) {
            throw Error(ErrorKind::MappingParseError, "empty placeholder in '" + std::string(text) + "'");
        }
        out.segments.push_back({name, true});
        pos = close + 1;
    }
    return out;
}

bool Template::is_constant() const {
    return std::none_of(segments.begin(), segments.end(), [](const Segment& s) { return s.placeholder; });
}

std::vector<std::string> Template::placeholders() const {
    std::vector<std::string> out;
    for (const auto& segment : segments) {
        if (segment.placeholder) {
            out.push_back(segment.text);
        }
    }
    return out;
}

rdf::PrefixMap default_mapping_prefixes() {
    rdf::PrefixMap prefixes;
    prefixes.add("tasi-pol", "http://tasi.com/pol#");
    return prefixes;
}

std::vector<Mapping> parse_mappings(std::string_view text, rdf::PrefixMap prefixes) {
    std::vector<Mapping> mappings;
    std::set<std::string> ids;
    std::string id;
    std::string target;
    std::string source;
    std::string* field = nullptr;
    bool in_prefixes = false;

    const auto flush = [&] {
        if (id.empty() && target.empty() && source.empty()) {
            return;
        }
        if (!ids.insert(id).second) {
            throw Error(ErrorKind::MappingParseError, "duplicate mappingId " + id);
        }
        mappings.push_back(finish_mapping(id, trim(target), trim(source), prefixes));
        id.clear();
        target.clear();
        source.clear();
        field = nullptr;
    };

    std::size_t line_number = 0;
    for (const auto& raw_line : split(text, '\n')) {
        ++line_number;
        const std::string line = trim(raw_line);
        if (line.empty() || line.front() == '#' || line == "]]") {
            continue;
        }
        if (line.front() == '[') {
            in_prefixes = line.rfind("[PrefixDeclaration]", 0) == 0;
            continue;
        }
        if (in_prefixes) {
            const auto colon = line.find(':');
            if (colon == std::string::npos) {
                throw Error(ErrorKind::MappingParseError,
                            "line " + std::to_string(line_number) + ": expected 'prefix: <iri>'");
            }
            std::string iri = trim(line.substr(colon + 1));
            if (iri.size() >= 2 && iri.front() == '<' && iri.back() == '>') {
                iri = iri.substr(1, iri.size() - 2);
            }
            prefixes.add(trim(line.substr(0, colon)), iri);
            continue;
        }
        const auto space = line.find_first_of(" \t");
        const std::string keyword = line.substr(0, space);
        const std::string rest = space == std::string::npos ? std::string() : trim(line.substr(space));
        if (keyword == "mappingId") {
            flush();
            id = rest;
            field = nullptr;
        } else if (keyword == "target") {
            field = &target;
            target = rest;
        } else if (keyword == "source") {
            field = &source;
            source = rest;
        } else if (field != nullptr) {
            *field += "\n" + line;
        } else {
            throw Error(ErrorKind::MappingParseError,
                        "line " + std::to_string(line_number) + ": expected mappingId, target or source");
        }
    }
    flush();
    return mappings;
}

bool source_matches(const SourceQuery& source, const RowTable& table) {
    if (source.table == table.name) {
        return true;
    }
    const auto dot = source.table.rfind('.');
    return dot != std::string::npos && source.table.substr(dot + 1) == table.name;
}

std::string percent_encode(std::string_view value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::vector<Triple> unfold(const Mapping& mapping, const RowTable& table) {
    std::vector<Triple> out;
    for (const auto& row : source_rows(mapping, table)) {
        for (const auto& tmpl : mapping.target) {
            out.push_back(Triple{instantiate(tmpl.subject, row), instantiate(tmpl.predicate, row),
                                 instantiate(tmpl.object, row)});
        }
    }
    return out;
}

std::vector<Triple> materialize(const std::vector<Mapping>& mappings, const std::vector<RowTable>& tables) {
    std::vector<Triple> out;
    for (const auto& mapping : mappings) {
        if (const RowTable* table = table_for(mapping, tables)) {
            auto triples = unfold(mapping, *table);
            out.insert(out.end(), triples.begin(), triples.end());
        }
    }
    return out;
}

BGPQuery parse_query(std::string_view text, rdf::PrefixMap prefixes) {
    Lexer lexer(text, Mode::Query, ErrorKind::ParseError);
    Token token = lexer.next();
    const auto keyword = [&](const char* word) {
        return token.kind == Token::Kind::Name && to_lower_ascii(token.text) == to_lower_ascii(word);
    };
    while (keyword("PREFIX")) {
        token = lexer.next();
        if (token.kind != Token::Kind::Name || token.text.back() != ':') {
            lexer.fail("expected 'prefix:' after PREFIX");
        }
        const std::string label = token.text.substr(0, token.text.size() - 1);
        token = lexer.next();
        if (token.kind != Token::Kind::Iri) {
            lexer.fail("expected <iri> in PREFIX");
        }
        prefixes.add(label, token.text);
        token = lexer.next();
    }
    if (!keyword("SELECT")) {
        lexer.fail("expected SELECT");
    }
    BGPQuery query;
    token = lexer.next();
    if (keyword("DISTINCT")) {
        token = lexer.next();
    }
    bool star = false;
    if (token.kind == Token::Kind::Punct && token.text == "*") {
        star = true;
        token = lexer.next();
    }
    while (token.kind == Token::Kind::Variable) {
        query.projection.push_back(token.text);
        token = lexer.next();
    }
    if (!star && query.projection.empty()) {
        lexer.fail("SELECT needs variables or *");
    }
    if (keyword("WHERE")) {
        token = lexer.next();
    }
    if (!(token.kind == Token::Kind::Punct && token.text == "{")) {
        lexer.fail("expected '{'");
    }
    token = lexer.next();

    const auto term = [&](bool verb) -> kg::PatternTerm {
        switch (token.kind) {
            case Token::Kind::Variable: return kg::Variable{token.text};
            case Token::Kind::Iri: return Term::iri(token.text);
            case Token::Kind::String:
                if (verb) {
                    break;
                }
                if (!token.language.empty()) {
                    return Term::lang_literal(token.text, token.language);
                }
                return Term::literal(token.text, token.datatype.empty() ? rdf::xsd_string()
                                                                        : expand_name(token.datatype, prefixes, lexer));
            case Token::Kind::Name: {
                if (token.text == "a" && verb) {
                    return Term::iri(rdf::rdf_type());
                }
                static const std::regex integer(R"([+-]?\d+)");
                static const std::regex decimal(R"([+-]?\d*\.\d+)");
                if (!verb && std::regex_match(token.text, integer)) {
                    return Term::literal(token.text, rdf::xsd("integer"));
                }
                if (!verb && std::regex_match(token.text, decimal)) {
                    return Term::literal(token.text, rdf::xsd("decimal"));
                }
                if (!verb && (token.text == "true" || token.text == "false")) {
                    return Term::literal(token.text, rdf::xsd("boolean"));
                }
                return Term::iri(expand_name(token.text, prefixes, lexer));
            }
            default: break;
        }
        lexer.fail("unexpected token '" + token.text + "'");
    };

    const auto is_punct = [&](const char* p) { return token.kind == Token::Kind::Punct && token.text == p; };
    while (!is_punct("}")) {
        if (token.kind == Token::Kind::End) {
            lexer.fail("missing '}'");
        }
        const kg::PatternTerm subject = term(false);
        token = lexer.next();
        while (true) {
            const kg::PatternTerm predicate = term(true);
            token = lexer.next();
            while (true) {
                query.patterns.push_back(TriplePattern{subject, predicate, term(false)});
                token = lexer.next();
                if (!is_punct(",")) {
                    break;
                }
                token = lexer.next();
            }
            if (is_punct(";")) {
                token = lexer.next();
                if (is_punct(".") || is_punct("}")) {
                    break;
                }
                continue;
            }
            break;
        }
        if (is_punct(".")) {
            token = lexer.next();
        } else if (!is_punct("}")) {
            lexer.fail("expected '.', ';' or '}'");
        }
    }
    if (lexer.next().kind != Token::Kind::End) {
        lexer.fail("trailing input after '}'");
    }
    if (query.patterns.empty()) {
        lexer.fail("query has no triple patterns");
    }
    std::set<std::string> variables;
    for (const auto& pattern : query.patterns) {
        for (const auto* slot : {&pattern.subject, &pattern.predicate, &pattern.object}) {
            if (const auto* variable = std::get_if<kg::Variable>(slot)) {
                variables.insert(variable->name);
            }
        }
    }
    for (const auto& variable : query.projection) {
        if (variables.count(variable) == 0) {
            lexer.fail("projected variable ?" + variable + " does not occur in the pattern");
        }
    }
    return query;
}

std::vector<Bindings> answer(const BGPQuery& query, const kg::TripleStore& store, const std::vector<Mapping>& mappings,
                             const std::vector<RowTable>& tables) {
    // One target template over the rows its mapping selects; unfolded on first use.
    struct Unfolded {
        const TripleTemplate* tmpl;
        const std::vector<std::map<std::string, std::string>>* rows;
        bool ready = false;
        std::vector<Triple> triples;
        std::multimap<Term, std::size_t> by_subject;

        void unfold() {
            if (ready) {
                return;
            }
            for (const auto& row : *rows) {
                triples.push_back(
                    {instantiate(tmpl->subject, row), instantiate(tmpl->predicate, row), instantiate(tmpl->object, row)});
                by_subject.emplace(triples.back().subject, triples.size() - 1);
            }
            ready = true;
        }
    };
    std::vector<std::vector<std::map<std::string, std::string>>> rows;
    rows.reserve(mappings.size());
    std::vector<Unfolded> templates;
    for (const auto& mapping : mappings) {
        if (const RowTable* table = table_for(mapping, tables)) {
            rows.push_back(source_rows(mapping, *table));
            for (const auto& tmpl : mapping.target) {
                templates.push_back(Unfolded{&tmpl, &rows.back()});
            }
        }
    }
    const kg::TripleSource source = [&](const TriplePattern& pattern) {
        std::vector<Triple> out = store.find(pattern);
        for (auto& unfolded : templates) {
            const auto& tmpl = *unfolded.tmpl;
            if (constant_excludes(pattern.subject, tmpl.subject) || constant_excludes(pattern.predicate, tmpl.predicate) ||
                constant_excludes(pattern.object, tmpl.object)) {
                continue;
            }
            unfolded.unfold();
            if (const Term* subject = std::get_if<Term>(&pattern.subject)) {
                const auto [first, last] = unfolded.by_subject.equal_range(*subject);
                for (auto it = first; it != last; ++it) {
                    if (triple_matches(pattern, unfolded.triples[it->second])) {
                        out.push_back(unfolded.triples[it->second]);
                    }
                }
                continue;
            }
            for (const auto& triple : unfolded.triples) {
                if (triple_matches(pattern, triple)) {
                    out.push_back(triple);
                }
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    return evaluate(query, store, source);
}

std::vector<Bindings> answer_materialized(const BGPQuery& query, const kg::TripleStore& store,
                                          const std::vector<Mapping>& mappings, const std::vector<RowTable>& tables) {
    kg::TripleStore everything = store;
    const auto virtual_triples = materialize(mappings, tables);
    everything.insert(virtual_triples);
    return evaluate(query, store, [&](const TriplePattern& pattern) { return everything.find(pattern); });
}

std::string bindings_to_json(const BGPQuery& query, const std::vector<Bindings>& bindings) {
    using nlohmann::json;
    std::vector<std::string> variables = query.projection;
    if (variables.empty()) {
        std::set<std::string> seen;
        for (const auto& pattern : query.patterns) {
            for (const auto* slot : {&pattern.subject, &pattern.predicate, &pattern.object}) {
                if (const auto* variable = std::get_if<kg::Variable>(slot); variable && seen.insert(variable->name).second) {
                    variables.push_back(variable->name);
                }
            }
        }
    }
    json out;
    out["head"]["vars"] = variables;
    json rows = json::array();
    for (const auto& binding : bindings) {
        json row = json::object();
        for (const auto& [name, term] : binding) {
            json value;
            value["value"] = term.value;
            if (term.is_iri()) {
                value["type"] = "uri";
            } else {
                value["type"] = "literal";
                if (!term.language.empty()) {
                    value["xml:lang"] = term.language;
                } else if (term.datatype != rdf::xsd_string()) {
                    value["datatype"] = term.datatype;
                }
            }
            row[name] = std::move(value);
        }
        rows.push_back(std::move(row));
    }
    out["results"]["bindings"] = std::move(rows);
    return out.dump(2);
}

}  // namespace reportkg::vkg
