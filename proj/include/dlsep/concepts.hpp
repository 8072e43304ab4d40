#ifndef DLSEP_CONCEPTS_HPP
#define DLSEP_CONCEPTS_HPP

#include <cassert>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlsep {

// Reserved role name for the universal role; never accepted from user input.
inline constexpr const char* kUniversalRole = "__u";

enum class SymbolKind { ConceptName, RoleName, IndividualName };

struct SymbolName {
    SymbolKind kind;
    std::string text;

    bool operator==(const SymbolName&) const = default;
    auto operator<=>(const SymbolName&) const = default;
};

bool valid_identifier(const std::string& s);

// A role name or its inverse. inv(inv(r)) normalizes to r.
class Role {
  public:
    Role() = default;
    explicit Role(std::string name, bool inverted = false)
        : name_(std::move(name)), inverted_(inverted) {}

    const std::string& name() const { return name_; }
    bool inverted() const { return inverted_; }
    bool is_universal() const { return name_ == kUniversalRole; }

    Role inverse() const { return Role(name_, !inverted_); }

    bool operator==(const Role&) const = default;
    auto operator<=>(const Role&) const = default;

    std::string to_string() const {
        return inverted_ ? "inv(" + name_ + ")" : name_;
    }

  private:
    std::string name_;
    bool inverted_ = false;
};

enum class ConceptKind : uint8_t { Top, Bot, Atom, Nominal, Not, And, Or, Exists, Forall };

// Immutable ALCIO(+u) concept AST. Or/Forall are first class; NNF is applied
// lazily by consumers. Values are shared; structural equality is hash-assisted.
class Concept {
  public:
    Concept() : Concept(top()) {}

    ConceptKind kind() const { return node_->kind; }
    const std::string& name() const { return node_->name; }
    const Role& role() const { return node_->role; }
    const Concept& child(size_t i = 0) const { return node_->children[i]; }
    size_t arity() const { return node_->children.size(); }
    size_t hash() const { return node_->hash; }
    // Number of AST nodes.
    size_t size() const { return node_->size; }

    static Concept top();
    static Concept bot();
    static Concept atom(std::string name);
    static Concept nominal(std::string ind);
    static Concept negate(Concept c);       // structural Not, no simplification
    static Concept neg(Concept c);          // single negation: neg(not C) = C
    static Concept conj(Concept l, Concept r);
    static Concept disj(Concept l, Concept r);
    static Concept implies(Concept l, Concept r) { return disj(negate(std::move(l)), std::move(r)); }
    static Concept exists(Role r, Concept c);
    static Concept forall(Role r, Concept c);

    static Concept big_conj(const std::vector<Concept>& cs);
    static Concept big_disj(const std::vector<Concept>& cs);

    bool operator==(const Concept& o) const {
        if (node_ == o.node_) return true;
        if (node_->hash != o.node_->hash) return false;
        return deep_equals(*node_, *o.node_);
    }
    bool operator!=(const Concept& o) const { return !(*this == o); }
    bool operator<(const Concept& o) const;

    bool is_top() const { return kind() == ConceptKind::Top; }
    bool is_bot() const { return kind() == ConceptKind::Bot; }

    std::string to_string() const;

  private:
    struct Node {
        ConceptKind kind;
        std::string name;   // Atom / Nominal
        Role role;          // Exists / Forall
        std::vector<Concept> children;
        size_t hash = 0;
        size_t size = 1;
    };

    explicit Concept(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Concept make(Node n);
    static bool deep_equals(const Node& a, const Node& b);

    std::shared_ptr<const Node> node_;
};

struct ConceptHash {
    size_t operator()(const Concept& c) const { return c.hash(); }
};

enum class Dialect : uint8_t { ALC, ALCI, ALCO, ALCIO, ALCIO_U };

std::string to_string(Dialect d);
std::optional<Dialect> dialect_from_string(const std::string& s);

inline bool dialect_has_inverses(Dialect d) {
    return d == Dialect::ALCI || d == Dialect::ALCIO || d == Dialect::ALCIO_U;
}
inline bool dialect_has_nominals(Dialect d) {
    return d == Dialect::ALCO || d == Dialect::ALCIO || d == Dialect::ALCIO_U;
}
inline bool dialect_has_universal(Dialect d) { return d == Dialect::ALCIO_U; }

// Least upper bound in the lattice ALC < {ALCI, ALCO} < ALCIO < ALCIO_U.
Dialect dialect_join(Dialect a, Dialect b);
// True iff every feature of `sub` is admitted by `super`.
bool dialect_leq(Dialect sub, Dialect super);

// ---------------------------------------------------------------------------
// Query formulas with one free variable x.

struct CQTerm {
    // Variable index >= 0, or an individual name when var < 0.
    int var = 0;
    std::string ind;

    static CQTerm variable(int v) { return CQTerm{v, ""}; }
    static CQTerm individual(std::string name) { return CQTerm{-1, std::move(name)}; }
    bool is_var() const { return var >= 0; }
    bool operator==(const CQTerm&) const = default;
};

struct CQAtom {
    enum class Kind { ConceptAtom, RoleAtom } kind;
    Concept concept_;   // ConceptAtom
    std::string role;   // RoleAtom (role name, never inverse)
    CQTerm t1, t2;      // ConceptAtom uses t1 only

    static CQAtom concept_at(Concept c, CQTerm t) {
        return CQAtom{Kind::ConceptAtom, std::move(c), "", std::move(t), CQTerm{}};
    }
    static CQAtom role_edge(std::string r, CQTerm a, CQTerm b) {
        return CQAtom{Kind::RoleAtom, Concept::top(), std::move(r), std::move(a), std::move(b)};
    }
};

// Conjunctive query: free variable x = variable 0, existential variables 1..n.
struct CQ {
    int num_vars = 1;    // includes x
    std::vector<CQAtom> atoms;
};

class QueryFormula;
using QueryFormulaPtr = std::shared_ptr<const QueryFormula>;

// One-free-variable separating formulas: a concept applied to x, CQs, UCQs,
// boolean combinations of CQs, and the two canned FO forms.
class QueryFormula {
  public:
    enum class Kind { ConceptAt, Cq, Ucq, Neg, Conj, Disj, NegSelfLoop, TwinSuccessors };

    Kind kind;
    Concept concept_;               // ConceptAt
    CQ cq;                          // Cq
    std::vector<QueryFormulaPtr> parts;  // Ucq (all Cq) / Conj / Disj / Neg (one)
    std::string role;               // NegSelfLoop / TwinSuccessors

    static QueryFormulaPtr concept_at(Concept c);
    static QueryFormulaPtr of_cq(CQ q);
    static QueryFormulaPtr ucq(std::vector<QueryFormulaPtr> cqs);
    static QueryFormulaPtr neg(QueryFormulaPtr f);
    static QueryFormulaPtr conj(std::vector<QueryFormulaPtr> fs);
    static QueryFormulaPtr disj(std::vector<QueryFormulaPtr> fs);
    static QueryFormulaPtr neg_self_loop(std::string role);
    static QueryFormulaPtr twin_successors(std::string role);

    std::string to_string() const;
};

} // namespace dlsep

#endif
