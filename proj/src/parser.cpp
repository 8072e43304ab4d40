#include "dlsep/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dlsep/transforms.hpp"

namespace dlsep {

namespace {

struct Token {
    enum class Kind { Ident, LBrace, RBrace, LParen, RParen, Dot, Comma, Colon, Arrow, End };
    Kind kind;
    std::string text;
    int line, col;
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_;
                ++pos_;
            } else {
                break;
            }
        }
        int l = line_, col = col_;
        if (pos_ >= text_.size()) {
            tok_ = {Token::Kind::End, "", l, col};
            return;
        }
        char c = text_[pos_];
        auto single = [&](Token::Kind k) {
            tok_ = {k, std::string(1, c), l, col};
            ++pos_;
            ++col_;
        };
        switch (c) {
            case '{': single(Token::Kind::LBrace); return;
            case '}': single(Token::Kind::RBrace); return;
            case '(': single(Token::Kind::LParen); return;
            case ')': single(Token::Kind::RParen); return;
            case '.': single(Token::Kind::Dot); return;
            case ',': single(Token::Kind::Comma); return;
            case ':': single(Token::Kind::Colon); return;
            case '-':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
                    tok_ = {Token::Kind::Arrow, "->", l, col};
                    pos_ += 2;
                    col_ += 2;
                    return;
                }
                throw ParseError("unexpected character '-'", l, col);
            default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
                ++col_;
            }
            tok_ = {Token::Kind::Ident, text_.substr(start, pos_ - start), l, col};
            return;
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", l, col);
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class ConceptParser {
  public:
    explicit ConceptParser(Lexer& lx) : lx_(lx) {}

    Concept parse() {
        const Token& t = lx_.peek();
        if (t.kind == Token::Kind::Ident) {
            if (t.text == "top") { lx_.next(); return Concept::top(); }
            if (t.text == "bot") { lx_.next(); return Concept::bot(); }
            if (t.text == "not") { lx_.next(); return Concept::negate(parse()); }
            if (t.text == "some" || t.text == "all") {
                bool ex = t.text == "some";
                lx_.next();
                Role r = parse_role();
                expect(Token::Kind::Dot, "'.'");
                Concept body = parse();
                return ex ? Concept::exists(r, body) : Concept::forall(r, body);
            }
            Token name = lx_.next();
            check_name(name);
            return Concept::atom(name.text);
        }
        if (t.kind == Token::Kind::LBrace) {
            lx_.next();
            Token name = expect(Token::Kind::Ident, "individual name");
            check_name(name);
            expect(Token::Kind::RBrace, "'}'");
            return Concept::nominal(name.text);
        }
        if (t.kind == Token::Kind::LParen) {
            lx_.next();
            Concept lhs = parse();
            Token op = lx_.next();
            Concept rhs{};
            if (op.kind == Token::Kind::Ident && op.text == "and") {
                rhs = parse();
                expect(Token::Kind::RParen, "')'");
                return Concept::conj(lhs, rhs);
            }
            if (op.kind == Token::Kind::Ident && op.text == "or") {
                rhs = parse();
                expect(Token::Kind::RParen, "')'");
                return Concept::disj(lhs, rhs);
            }
            if (op.kind == Token::Kind::Arrow) {
                rhs = parse();
                expect(Token::Kind::RParen, "')'");
                return Concept::implies(lhs, rhs);
            }
            throw ParseError("expected 'and', 'or' or '->'", op.line, op.col);
        }
        throw ParseError("expected a concept", t.line, t.col);
    }

    Role parse_role() {
        Token t = expect(Token::Kind::Ident, "role");
        if (t.text == "inv") {
            expect(Token::Kind::LParen, "'('");
            Token name = expect(Token::Kind::Ident, "role name");
            check_name(name);
            expect(Token::Kind::RParen, "')'");
            return Role(name.text, true);
        }
        check_name(t);
        return Role(t.text);
    }

    Token expect(Token::Kind k, const std::string& what) {
        Token t = lx_.next();
        if (t.kind != k) throw ParseError("expected " + what, t.line, t.col);
        return t;
    }

    void check_name(const Token& t) {
        if (!valid_identifier(t.text))
            throw ParseError("invalid identifier '" + t.text + "'", t.line, t.col);
        if (t.text.substr(0, 2) == "__")
            throw ParseError("reserved name '" + t.text + "'", t.line, t.col);
    }

  private:
    Lexer& lx_;
};

const char* kSections[] = {"ONTOLOGY", "DATABASE", "POSITIVE", "NEGATIVE", "SIGNATURE", "DIALECT"};

bool is_section(const std::string& s) {
    for (const char* k : kSections)
        if (s == k) return true;
    return false;
}

} // namespace

Concept parse_concept(const std::string& text) {
    Lexer lx(text);
    ConceptParser cp(lx);
    Concept c = cp.parse();
    const Token& t = lx.peek();
    if (t.kind != Token::Kind::End)
        throw ParseError("trailing input after concept", t.line, t.col);
    return c;
}

ParsedKB parse_kb(const std::string& text) {
    Lexer lx(text);
    ConceptParser cp(lx);
    ParsedKB out;
    std::optional<Dialect> declared;
    std::string section;
    while (lx.peek().kind != Token::Kind::End) {
        Token t = lx.peek();
        if (t.kind == Token::Kind::Ident && is_section(t.text)) {
            section = t.text;
            lx.next();
            continue;
        }
        if (section.empty())
            throw ParseError("expected a section header", t.line, t.col);
        if (section == "ONTOLOGY") {
            Concept lhs = cp.parse();
            Token kw = lx.next();
            if (kw.kind != Token::Kind::Ident || kw.text != "sub")
                throw ParseError("expected 'sub'", kw.line, kw.col);
            Concept rhs = cp.parse();
            out.kb.ontology.inclusions.push_back({lhs, rhs});
        } else if (section == "DATABASE") {
            Token name = cp.expect(Token::Kind::Ident, "fact");
            cp.check_name(name);
            cp.expect(Token::Kind::LParen, "'('");
            Token first = cp.expect(Token::Kind::Ident, "individual");
            cp.check_name(first);
            if (lx.peek().kind == Token::Kind::Comma) {
                lx.next();
                Token second = cp.expect(Token::Kind::Ident, "individual");
                cp.check_name(second);
                cp.expect(Token::Kind::RParen, "')'");
                out.kb.database.role_facts.insert({name.text, first.text, second.text});
            } else {
                cp.expect(Token::Kind::RParen, "')'");
                out.kb.database.concept_facts.insert({name.text, first.text});
            }
        } else if (section == "POSITIVE" || section == "NEGATIVE") {
            Token name = cp.expect(Token::Kind::Ident, "individual");
            cp.check_name(name);
            (section == "POSITIVE" ? out.kb.positives : out.kb.negatives).insert(name.text);
        } else if (section == "SIGNATURE") {
            Token kind = cp.expect(Token::Kind::Ident, "'concept', 'role' or 'ind'");
            cp.expect(Token::Kind::Colon, "':'");
            Token name = cp.expect(Token::Kind::Ident, "symbol");
            cp.check_name(name);
            if (!out.sigma) out.sigma.emplace();
            if (kind.text == "concept") out.sigma->concept_names.insert(name.text);
            else if (kind.text == "role") out.sigma->role_names.insert(name.text);
            else if (kind.text == "ind") out.sigma->individual_names.insert(name.text);
            else throw ParseError("unknown signature kind '" + kind.text + "'", kind.line, kind.col);
        } else if (section == "DIALECT") {
            Token name = cp.expect(Token::Kind::Ident, "dialect");
            auto d = dialect_from_string(name.text);
            if (!d || *d == Dialect::ALCIO_U)
                throw ParseError("unknown dialect '" + name.text + "'", name.line, name.col);
            declared = *d;
        }
    }

    Dialect least = dialect_of(out.kb);
    if (declared) {
        if (!dialect_leq(least, *declared))
            throw ParseError("dialect violation: ontology needs " + to_string(least) +
                                 " but " + to_string(*declared) + " was declared",
                             1, 1);
        out.kb.dialect = *declared;
    } else {
        out.kb.dialect = least;
    }

    auto inds = out.kb.database.individuals();
    Signature osig = signature_of(out.kb.ontology);
    for (const auto& c : osig.individual_names)
        if (!inds.count(c)) throw ParseError("nominal not in database: " + c, 1, 1);
    out.kb.check();
    return out;
}

ParsedKB parse_kb_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_kb(ss.str());
}

Ontology parse_ontology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    Lexer lx(ss.str());
    ConceptParser cp(lx);
    Ontology out;
    std::string section;
    while (lx.peek().kind != Token::Kind::End) {
        Token t = lx.peek();
        if (t.kind == Token::Kind::Ident && is_section(t.text)) {
            section = t.text;
            lx.next();
            continue;
        }
        if (section.empty() && t.kind == Token::Kind::Ident) section = "ONTOLOGY";
        if (section != "ONTOLOGY")
            throw ParseError("ontology file: unexpected section " + section, t.line, t.col);
        Concept lhs = cp.parse();
        Token kw = lx.next();
        if (kw.kind != Token::Kind::Ident || kw.text != "sub")
            throw ParseError("expected 'sub'", kw.line, kw.col);
        Concept rhs = cp.parse();
        out.inclusions.push_back({lhs, rhs});
    }
    return out;
}

std::string print_concept(const Concept& c) { return c.to_string(); }

std::string print_kb(const LabeledKB& kb, const std::optional<Signature>& sigma) {
    std::ostringstream os;
    os << "DIALECT\n  " << to_string(kb.dialect) << "\n";
    os << "ONTOLOGY\n";
    for (const auto& ci : kb.ontology.inclusions)
        os << "  " << ci.lhs.to_string() << " sub " << ci.rhs.to_string() << "\n";
    os << "DATABASE\n";
    for (const auto& f : kb.database.concept_facts)
        os << "  " << f.concept_name << "(" << f.individual << ")\n";
    for (const auto& f : kb.database.role_facts)
        os << "  " << f.role_name << "(" << f.from << "," << f.to << ")\n";
    os << "POSITIVE\n";
    for (const auto& p : kb.positives) os << "  " << p << "\n";
    os << "NEGATIVE\n";
    for (const auto& n : kb.negatives) os << "  " << n << "\n";
    if (sigma) {
        os << "SIGNATURE\n";
        for (const auto& n : sigma->concept_names) os << "  concept:" << n << "\n";
        for (const auto& n : sigma->role_names) os << "  role:" << n << "\n";
        for (const auto& n : sigma->individual_names) os << "  ind:" << n << "\n";
    }
    return os.str();
}

} // namespace dlsep
