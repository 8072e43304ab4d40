#include "dlsep/concepts.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace dlsep {

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

static size_t combine(size_t h, size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

Concept Concept::make(Node n) {
    size_t h = static_cast<size_t>(n.kind) * 1315423911u;
    h = combine(h, std::hash<std::string>{}(n.name));
    h = combine(h, std::hash<std::string>{}(n.role.name()));
    h = combine(h, n.role.inverted() ? 7 : 3);
    size_t sz = 1;
    for (const auto& c : n.children) {
        h = combine(h, c.hash());
        sz += c.size();
    }
    n.hash = h;
    n.size = sz;
    return Concept(std::make_shared<const Node>(std::move(n)));
}

bool Concept::deep_equals(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.name != b.name || a.role != b.role ||
        a.children.size() != b.children.size())
        return false;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (a.children[i] != b.children[i]) return false;
    return true;
}

Concept Concept::top() {
    static Concept c = make(Node{ConceptKind::Top, "", Role(), {}});
    return c;
}
Concept Concept::bot() {
    static Concept c = make(Node{ConceptKind::Bot, "", Role(), {}});
    return c;
}
Concept Concept::atom(std::string name) {
    return make(Node{ConceptKind::Atom, std::move(name), Role(), {}});
}
Concept Concept::nominal(std::string ind) {
    return make(Node{ConceptKind::Nominal, std::move(ind), Role(), {}});
}
Concept Concept::negate(Concept c) {
    return make(Node{ConceptKind::Not, "", Role(), {std::move(c)}});
}
Concept Concept::neg(Concept c) {
    if (c.kind() == ConceptKind::Not) return c.child();
    return negate(std::move(c));
}
Concept Concept::conj(Concept l, Concept r) {
    return make(Node{ConceptKind::And, "", Role(), {std::move(l), std::move(r)}});
}
Concept Concept::disj(Concept l, Concept r) {
    return make(Node{ConceptKind::Or, "", Role(), {std::move(l), std::move(r)}});
}
Concept Concept::exists(Role r, Concept c) {
    return make(Node{ConceptKind::Exists, "", std::move(r), {std::move(c)}});
}
Concept Concept::forall(Role r, Concept c) {
    return make(Node{ConceptKind::Forall, "", std::move(r), {std::move(c)}});
}

Concept Concept::big_conj(const std::vector<Concept>& cs) {
    if (cs.empty()) return top();
    Concept acc = cs[0];
    for (size_t i = 1; i < cs.size(); ++i) acc = conj(acc, cs[i]);
    return acc;
}
Concept Concept::big_disj(const std::vector<Concept>& cs) {
    if (cs.empty()) return bot();
    Concept acc = cs[0];
    for (size_t i = 1; i < cs.size(); ++i) acc = disj(acc, cs[i]);
    return acc;
}

bool Concept::operator<(const Concept& o) const {
    if (*this == o) return false;
    if (size() != o.size()) return size() < o.size();
    return to_string() < o.to_string();
}

std::string Concept::to_string() const {
    switch (kind()) {
        case ConceptKind::Top: return "top";
        case ConceptKind::Bot: return "bot";
        case ConceptKind::Atom: return name();
        case ConceptKind::Nominal: return "{" + name() + "}";
        case ConceptKind::Not: return "not " + child().to_string();
        case ConceptKind::And:
            return "(" + child(0).to_string() + " and " + child(1).to_string() + ")";
        case ConceptKind::Or:
            return "(" + child(0).to_string() + " or " + child(1).to_string() + ")";
        case ConceptKind::Exists:
            return "some " + role().to_string() + " . " + child().to_string();
        case ConceptKind::Forall:
            return "all " + role().to_string() + " . " + child().to_string();
    }
    return "?";
}

std::string to_string(Dialect d) {
    switch (d) {
        case Dialect::ALC: return "alc";
        case Dialect::ALCI: return "alci";
        case Dialect::ALCO: return "alco";
        case Dialect::ALCIO: return "alcio";
        case Dialect::ALCIO_U: return "alcio_u";
    }
    return "?";
}

std::optional<Dialect> dialect_from_string(const std::string& s) {
    if (s == "alc" || s == "ALC") return Dialect::ALC;
    if (s == "alci" || s == "ALCI") return Dialect::ALCI;
    if (s == "alco" || s == "ALCO") return Dialect::ALCO;
    if (s == "alcio" || s == "ALCIO") return Dialect::ALCIO;
    if (s == "alcio_u" || s == "ALCIO_U") return Dialect::ALCIO_U;
    return std::nullopt;
}

Dialect dialect_join(Dialect a, Dialect b) {
    bool inv = dialect_has_inverses(a) || dialect_has_inverses(b);
    bool nom = dialect_has_nominals(a) || dialect_has_nominals(b);
    bool uni = dialect_has_universal(a) || dialect_has_universal(b);
    if (uni) return Dialect::ALCIO_U;
    if (inv && nom) return Dialect::ALCIO;
    if (inv) return Dialect::ALCI;
    if (nom) return Dialect::ALCO;
    return Dialect::ALC;
}

bool dialect_leq(Dialect sub, Dialect super) {
    return dialect_join(sub, super) == super;
}

QueryFormulaPtr QueryFormula::concept_at(Concept c) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::ConceptAt;
    f->concept_ = std::move(c);
    return f;
}
QueryFormulaPtr QueryFormula::of_cq(CQ q) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::Cq;
    f->cq = std::move(q);
    return f;
}
QueryFormulaPtr QueryFormula::ucq(std::vector<QueryFormulaPtr> cqs) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::Ucq;
    f->parts = std::move(cqs);
    return f;
}
QueryFormulaPtr QueryFormula::neg(QueryFormulaPtr g) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::Neg;
    f->parts = {std::move(g)};
    return f;
}
QueryFormulaPtr QueryFormula::conj(std::vector<QueryFormulaPtr> fs) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::Conj;
    f->parts = std::move(fs);
    return f;
}
QueryFormulaPtr QueryFormula::disj(std::vector<QueryFormulaPtr> fs) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::Disj;
    f->parts = std::move(fs);
    return f;
}
QueryFormulaPtr QueryFormula::neg_self_loop(std::string role) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::NegSelfLoop;
    f->role = std::move(role);
    return f;
}
QueryFormulaPtr QueryFormula::twin_successors(std::string role) {
    auto f = std::make_shared<QueryFormula>();
    f->kind = Kind::TwinSuccessors;
    f->role = std::move(role);
    return f;
}

static std::string term_str(const CQTerm& t) {
    return t.is_var() ? (t.var == 0 ? "x" : "y" + std::to_string(t.var)) : t.ind;
}

std::string QueryFormula::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::ConceptAt:
            os << concept_.to_string() << "(x)";
            break;
        case Kind::Cq: {
            if (cq.num_vars > 1) {
                os << "exists ";
                for (int v = 1; v < cq.num_vars; ++v) os << (v > 1 ? "," : "") << "y" << v;
                os << " . ";
            }
            if (cq.atoms.empty()) os << "true";
            for (size_t i = 0; i < cq.atoms.size(); ++i) {
                if (i) os << " & ";
                const auto& a = cq.atoms[i];
                if (a.kind == CQAtom::Kind::RoleAtom)
                    os << a.role << "(" << term_str(a.t1) << "," << term_str(a.t2) << ")";
                else
                    os << "[" << a.concept_.to_string() << "](" << term_str(a.t1) << ")";
            }
            break;
        }
        case Kind::Ucq:
        case Kind::Disj:
            for (size_t i = 0; i < parts.size(); ++i)
                os << (i ? " | " : "") << "(" << parts[i]->to_string() << ")";
            break;
        case Kind::Conj:
            for (size_t i = 0; i < parts.size(); ++i)
                os << (i ? " & " : "") << "(" << parts[i]->to_string() << ")";
            break;
        case Kind::Neg:
            os << "not (" << parts[0]->to_string() << ")";
            break;
        case Kind::NegSelfLoop:
            os << "not " << role << "(x,x)";
            break;
        case Kind::TwinSuccessors:
            os << "exists y1,y2 . " << role << "(x,y1) & " << role
               << "(x,y2) & y1 != y2";
            break;
    }
    return os.str();
}

} // namespace dlsep
