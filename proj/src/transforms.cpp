#include "dlsep/transforms.hpp"

#include <stdexcept>

namespace dlsep {

bool Signature::subset_of(const Signature& o) const {
    for (const auto& n : concept_names)
        if (!o.contains_concept(n)) return false;
    for (const auto& n : role_names)
        if (!o.contains_role(n)) return false;
    for (const auto& n : individual_names)
        if (!o.contains_individual(n)) return false;
    return true;
}

void LabeledKB::check() const {
    auto inds = database.individuals();
    if (inds.empty()) throw std::invalid_argument("labeled KB requires a non-empty database");
    if (positives.empty() || negatives.empty())
        throw std::invalid_argument("labeled KB requires non-empty example sets");
    for (const auto& p : positives)
        if (!inds.count(p)) throw std::invalid_argument("positive example not in database: " + p);
    for (const auto& n : negatives)
        if (!inds.count(n)) throw std::invalid_argument("negative example not in database: " + n);
    Signature osig = signature_of(ontology);
    for (const auto& c : osig.individual_names)
        if (!inds.count(c))
            throw std::invalid_argument("nominal not in database: " + c);
    Dialect least = dialect_of(LabeledKB{ontology, database, positives, negatives, Dialect::ALC});
    if (!dialect_leq(least, dialect))
        throw std::invalid_argument("dialect does not admit ontology: needs " + to_string(least));
}

static Concept nnf(const Concept& c, bool negated) {
    switch (c.kind()) {
        case ConceptKind::Top: return negated ? Concept::bot() : Concept::top();
        case ConceptKind::Bot: return negated ? Concept::top() : Concept::bot();
        case ConceptKind::Atom:
        case ConceptKind::Nominal: return negated ? Concept::negate(c) : c;
        case ConceptKind::Not: return nnf(c.child(), !negated);
        case ConceptKind::And: {
            Concept l = nnf(c.child(0), negated), r = nnf(c.child(1), negated);
            return negated ? Concept::disj(l, r) : Concept::conj(l, r);
        }
        case ConceptKind::Or: {
            Concept l = nnf(c.child(0), negated), r = nnf(c.child(1), negated);
            return negated ? Concept::conj(l, r) : Concept::disj(l, r);
        }
        case ConceptKind::Exists: {
            Concept b = nnf(c.child(), negated);
            return negated ? Concept::forall(c.role(), b) : Concept::exists(c.role(), b);
        }
        case ConceptKind::Forall: {
            Concept b = nnf(c.child(), negated);
            return negated ? Concept::exists(c.role(), b) : Concept::forall(c.role(), b);
        }
    }
    return c;
}

Concept normalize_nnf(const Concept& c) { return nnf(c, false); }

Concept desugar_to_ane(const Concept& c) {
    switch (c.kind()) {
        case ConceptKind::Top:
        case ConceptKind::Bot:
        case ConceptKind::Atom:
        case ConceptKind::Nominal: return c;
        case ConceptKind::Not: return Concept::neg(desugar_to_ane(c.child()));
        case ConceptKind::And:
            return Concept::conj(desugar_to_ane(c.child(0)), desugar_to_ane(c.child(1)));
        case ConceptKind::Or:
            return Concept::neg(Concept::conj(Concept::neg(desugar_to_ane(c.child(0))),
                                              Concept::neg(desugar_to_ane(c.child(1)))));
        case ConceptKind::Exists:
            return Concept::exists(c.role(), desugar_to_ane(c.child()));
        case ConceptKind::Forall:
            return Concept::neg(
                Concept::exists(c.role(), Concept::neg(desugar_to_ane(c.child()))));
    }
    return c;
}

static void collect_subconcepts(const Concept& c, std::set<Concept>& out) {
    if (!out.insert(c).second) return;
    for (size_t i = 0; i < c.arity(); ++i) collect_subconcepts(c.child(i), out);
}

std::set<Concept> subconcept_closure(const Ontology& o, const Database& d,
                                     const std::vector<Concept>& extra, bool with_nominals) {
    std::set<Concept> subs;
    collect_subconcepts(Concept::top(), subs);
    for (const auto& ci : o.inclusions) {
        collect_subconcepts(ci.lhs, subs);
        collect_subconcepts(ci.rhs, subs);
    }
    for (const auto& f : d.concept_facts) collect_subconcepts(Concept::atom(f.concept_name), subs);
    for (const auto& c : extra) collect_subconcepts(c, subs);
    if (with_nominals)
        for (const auto& ind : d.individuals()) collect_subconcepts(Concept::nominal(ind), subs);
    std::set<Concept> out;
    for (const auto& c : subs) {
        out.insert(c);
        out.insert(Concept::neg(c));
    }
    return out;
}

std::set<Concept> subconcept_closure(const LabeledKB& kb, const std::vector<Concept>& extra) {
    return subconcept_closure(kb.ontology, kb.database, extra);
}

static void sig_of(const Concept& c, Signature& s) {
    switch (c.kind()) {
        case ConceptKind::Atom: s.concept_names.insert(c.name()); return;
        case ConceptKind::Nominal: s.individual_names.insert(c.name()); return;
        case ConceptKind::Exists:
        case ConceptKind::Forall:
            if (!c.role().is_universal()) s.role_names.insert(c.role().name());
            sig_of(c.child(), s);
            return;
        default:
            for (size_t i = 0; i < c.arity(); ++i) sig_of(c.child(i), s);
    }
}

Signature signature_of(const Concept& c) {
    Signature s;
    sig_of(c, s);
    return s;
}

Signature signature_of(const Ontology& o) {
    Signature s;
    for (const auto& ci : o.inclusions) {
        sig_of(ci.lhs, s);
        sig_of(ci.rhs, s);
    }
    return s;
}

Signature signature_of(const Database& d) {
    Signature s;
    for (const auto& f : d.concept_facts) {
        s.concept_names.insert(f.concept_name);
        s.individual_names.insert(f.individual);
    }
    for (const auto& f : d.role_facts) {
        s.role_names.insert(f.role_name);
        s.individual_names.insert(f.from);
        s.individual_names.insert(f.to);
    }
    return s;
}

Signature signature_of(const LabeledKB& kb) {
    Signature s = signature_of(kb.ontology);
    s.merge(signature_of(kb.database));
    return s;
}

Signature signature_of(const QueryFormula& q) {
    Signature s;
    switch (q.kind) {
        case QueryFormula::Kind::ConceptAt: return signature_of(q.concept_);
        case QueryFormula::Kind::Cq:
            for (const auto& a : q.cq.atoms) {
                if (a.kind == CQAtom::Kind::RoleAtom) {
                    s.role_names.insert(a.role);
                    if (!a.t1.is_var()) s.individual_names.insert(a.t1.ind);
                    if (!a.t2.is_var()) s.individual_names.insert(a.t2.ind);
                } else {
                    s.merge(signature_of(a.concept_));
                    if (!a.t1.is_var()) s.individual_names.insert(a.t1.ind);
                }
            }
            return s;
        case QueryFormula::Kind::NegSelfLoop:
        case QueryFormula::Kind::TwinSuccessors:
            s.role_names.insert(q.role);
            return s;
        default:
            for (const auto& p : q.parts) s.merge(signature_of(*p));
            return s;
    }
}

Dialect dialect_of(const Concept& c) {
    Dialect d = Dialect::ALC;
    switch (c.kind()) {
        case ConceptKind::Nominal: return Dialect::ALCO;
        case ConceptKind::Exists:
        case ConceptKind::Forall:
            if (c.role().is_universal()) d = Dialect::ALCIO_U;
            else if (c.role().inverted()) d = Dialect::ALCI;
            return dialect_join(d, dialect_of(c.child()));
        default:
            for (size_t i = 0; i < c.arity(); ++i) d = dialect_join(d, dialect_of(c.child(i)));
            return d;
    }
}

Dialect dialect_of(const LabeledKB& kb) {
    Dialect d = Dialect::ALC;
    for (const auto& ci : kb.ontology.inclusions)
        d = dialect_join(d, dialect_join(dialect_of(ci.lhs), dialect_of(ci.rhs)));
    return d;
}

Concept relativize(const Concept& c, const std::string& guard) {
    Concept a = Concept::atom(guard);
    switch (c.kind()) {
        case ConceptKind::Top: return a;
        case ConceptKind::Bot: return Concept::bot();
        case ConceptKind::Atom: return Concept::conj(c, a);
        case ConceptKind::Nominal: return Concept::conj(c, a);
        case ConceptKind::Not:
            return Concept::conj(a, Concept::neg(relativize(c.child(), guard)));
        case ConceptKind::And:
            return Concept::conj(relativize(c.child(0), guard), relativize(c.child(1), guard));
        case ConceptKind::Exists:
            return Concept::conj(
                a, Concept::exists(c.role(),
                                   Concept::conj(a, relativize(c.child(), guard))));
        default:
            throw std::invalid_argument(
                "relativize: concept outside the and/not/some fragment: " + c.to_string());
    }
}

Concept erase_helpers(const Concept& c, const Signature& sigma) {
    switch (c.kind()) {
        case ConceptKind::Atom:
            return sigma.contains_concept(c.name()) ? c : Concept::top();
        case ConceptKind::Top:
        case ConceptKind::Bot:
        case ConceptKind::Nominal: return c;
        case ConceptKind::Not: return Concept::negate(erase_helpers(c.child(), sigma));
        case ConceptKind::And:
            return Concept::conj(erase_helpers(c.child(0), sigma),
                                 erase_helpers(c.child(1), sigma));
        case ConceptKind::Or:
            return Concept::disj(erase_helpers(c.child(0), sigma),
                                 erase_helpers(c.child(1), sigma));
        case ConceptKind::Exists:
            return Concept::exists(c.role(), erase_helpers(c.child(), sigma));
        case ConceptKind::Forall:
            return Concept::forall(c.role(), erase_helpers(c.child(), sigma));
    }
    return c;
}

QueryFormulaPtr erase_helpers(const QueryFormulaPtr& f, const Signature& sigma) {
    switch (f->kind) {
        case QueryFormula::Kind::ConceptAt:
            return QueryFormula::concept_at(erase_helpers(f->concept_, sigma));
        case QueryFormula::Kind::Cq: {
            CQ q;
            q.num_vars = f->cq.num_vars;
            for (const auto& a : f->cq.atoms) {
                if (a.kind == CQAtom::Kind::ConceptAtom)
                    q.atoms.push_back(CQAtom::concept_at(erase_helpers(a.concept_, sigma), a.t1));
                else
                    q.atoms.push_back(a);
            }
            return QueryFormula::of_cq(std::move(q));
        }
        case QueryFormula::Kind::NegSelfLoop:
        case QueryFormula::Kind::TwinSuccessors: return f;
        default: {
            std::vector<QueryFormulaPtr> parts;
            for (const auto& p : f->parts) parts.push_back(erase_helpers(p, sigma));
            auto g = std::make_shared<QueryFormula>(*f);
            g->parts = std::move(parts);
            return g;
        }
    }
}

} // namespace dlsep
