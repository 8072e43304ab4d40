#include "dlsep/reasoner.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "dlsep/bisim.hpp"

namespace dlsep {

int role_depth(const Concept& c) {
    switch (c.kind()) {
        case ConceptKind::Exists:
        case ConceptKind::Forall: return 1 + role_depth(c.child());
        case ConceptKind::Not: return role_depth(c.child());
        case ConceptKind::And:
        case ConceptKind::Or:
            return std::max(role_depth(c.child(0)), role_depth(c.child(1)));
        default: return 0;
    }
}

namespace {

bool is_decision_atom(const Concept& c) {
    switch (c.kind()) {
        case ConceptKind::Atom:
        case ConceptKind::Nominal:
        case ConceptKind::Exists:
        case ConceptKind::Forall: return true;
        default: return false;
    }
}

void scan_occurring_nominals(const Concept& c, std::set<std::string>& out) {
    if (c.kind() == ConceptKind::Nominal) out.insert(c.name());
    for (size_t i = 0; i < c.arity(); ++i) scan_occurring_nominals(c.child(i), out);
}

} // namespace

TypeContext::TypeContext(Ontology o, Database db, std::vector<Concept> extra, bool with_nominals)
    : ontology_(std::move(o)), database_(std::move(db)) {
    closure_ = subconcept_closure(ontology_, database_, extra, with_nominals);
    std::set<Role> roles;
    for (const auto& c : closure_) {
        if (!is_decision_atom(c)) continue;
        int idx = static_cast<int>(atoms_.size());
        atoms_.push_back(c);
        atom_idx_[c] = idx;
        if (c.kind() == ConceptKind::Nominal) {
            nominal_atoms_.push_back(idx);
            nominal_by_name_[c.name()] = idx;
            individuals_.push_back(c.name());
        }
        if (c.kind() == ConceptKind::Exists || c.kind() == ConceptKind::Forall) {
            if (c.role().is_universal())
                u_atoms_.push_back(idx);
            else
                roles.insert(c.role());
        }
    }
    if (atoms_.size() > 62)
        throw std::runtime_error("type closure too large: " + std::to_string(atoms_.size()) +
                                 " decision atoms");
    roles_.assign(roles.begin(), roles.end());

    std::set<std::string> occ;
    for (const auto& ci : ontology_.inclusions) {
        scan_occurring_nominals(ci.lhs, occ);
        scan_occurring_nominals(ci.rhs, occ);
    }
    for (const auto& c : extra) scan_occurring_nominals(c, occ);
    nominals_occur_ = !occ.empty();
}

int TypeContext::atom_index(const Concept& c) const {
    auto it = atom_idx_.find(c);
    return it == atom_idx_.end() ? -1 : it->second;
}

int TypeContext::nominal_index(const std::string& ind) const {
    auto it = nominal_by_name_.find(ind);
    return it == nominal_by_name_.end() ? -1 : it->second;
}

bool TypeContext::holds(TypeBits t, const Concept& c) const {
    switch (c.kind()) {
        case ConceptKind::Top: return true;
        case ConceptKind::Bot: return false;
        case ConceptKind::Not: return !holds(t, c.child());
        case ConceptKind::And: return holds(t, c.child(0)) && holds(t, c.child(1));
        case ConceptKind::Or: return holds(t, c.child(0)) || holds(t, c.child(1));
        default: {
            int idx = atom_index(c);
            if (idx < 0) throw std::logic_error("concept outside closure: " + c.to_string());
            return (t >> idx) & 1;
        }
    }
}

int TypeContext::holds3(TypeBits value, TypeBits known, const Concept& c) const {
    switch (c.kind()) {
        case ConceptKind::Top: return 1;
        case ConceptKind::Bot: return -1;
        case ConceptKind::Not: return -holds3(value, known, c.child());
        case ConceptKind::And: {
            int l = holds3(value, known, c.child(0));
            if (l == -1) return -1;
            int r = holds3(value, known, c.child(1));
            if (r == -1) return -1;
            return (l == 1 && r == 1) ? 1 : 0;
        }
        case ConceptKind::Or: {
            int l = holds3(value, known, c.child(0));
            if (l == 1) return 1;
            int r = holds3(value, known, c.child(1));
            if (r == 1) return 1;
            return (l == -1 && r == -1) ? -1 : 0;
        }
        default: {
            int idx = atom_index(c);
            if (idx < 0) throw std::logic_error("concept outside closure: " + c.to_string());
            if (!((known >> idx) & 1)) return 0;
            return ((value >> idx) & 1) ? 1 : -1;
        }
    }
}

bool TypeContext::ci_coherent(TypeBits t) const {
    for (const auto& ci : ontology_.inclusions)
        if (holds(t, ci.lhs) && !holds(t, ci.rhs)) return false;
    return true;
}

std::vector<TypeContext::Obligation> TypeContext::obligations(TypeBits t) const {
    std::vector<Obligation> out;
    for (size_t i = 0; i < atoms_.size(); ++i) {
        const Concept& c = atoms_[i];
        if (c.kind() == ConceptKind::Exists && !c.role().is_universal() && ((t >> i) & 1))
            out.push_back({c.role(), c.child()});
        if (c.kind() == ConceptKind::Forall && !c.role().is_universal() && !((t >> i) & 1))
            out.push_back({c.role(), Concept::neg(c.child())});
    }
    return out;
}

std::vector<TypeContext::Obligation> TypeContext::value_restrictions(TypeBits t) const {
    std::vector<Obligation> out;
    for (size_t i = 0; i < atoms_.size(); ++i) {
        const Concept& c = atoms_[i];
        if (c.kind() == ConceptKind::Forall && !c.role().is_universal() && ((t >> i) & 1))
            out.push_back({c.role(), c.child()});
        if (c.kind() == ConceptKind::Exists && !c.role().is_universal() && !((t >> i) & 1))
            out.push_back({c.role(), Concept::neg(c.child())});
    }
    return out;
}

bool TypeContext::edge_coherent(TypeBits t, const Role& r, TypeBits t2) const {
    for (const auto& v : value_restrictions(t))
        if (v.role == r && !holds(t2, v.filler)) return false;
    Role back = r.inverse();
    for (const auto& v : value_restrictions(t2))
        if (v.role == back && !holds(t, v.filler)) return false;
    return true;
}

std::vector<TypeBits> TypeContext::enumerate_types(TypeBits fixed_mask, TypeBits fixed_value) const {
    std::vector<TypeBits> out;
    const size_t n = atoms_.size();
    constexpr size_t kCap = 1u << 21;

    std::function<void(size_t, TypeBits, TypeBits)> rec = [&](size_t i, TypeBits value,
                                                              TypeBits known) {
        // Prune on definite CI violations under the partial assignment.
        for (const auto& ci : ontology_.inclusions) {
            if (holds3(value, known, ci.lhs) == 1 && holds3(value, known, ci.rhs) == -1) return;
        }
        if (i == n) {
            if (out.size() >= kCap) throw std::runtime_error("type enumeration budget exceeded");
            out.push_back(value);
            return;
        }
        TypeBits bit = TypeBits{1} << i;
        if (fixed_mask & bit) {
            rec(i + 1, value | (fixed_value & bit), known | bit);
        } else {
            rec(i + 1, value, known | bit);
            rec(i + 1, value | bit, known | bit);
        }
    };
    rec(0, 0, 0);
    return out;
}

std::set<Concept> TypeContext::members(TypeBits t) const {
    std::set<Concept> out;
    for (const auto& c : closure_)
        if (holds(t, c)) out.insert(c);
    return out;
}

namespace {

// Removes anonymous types whose existential obligations lack surviving
// witnesses; pinned types are never removed.
std::vector<TypeBits> eliminate_types(const TypeContext& ctx, std::vector<TypeBits> anon,
                                      const std::vector<TypeBits>& pinned) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<TypeBits> keep;
        keep.reserve(anon.size());
        for (TypeBits t : anon) {
            bool ok = true;
            for (const auto& ob : ctx.obligations(t)) {
                bool witnessed = false;
                for (TypeBits w : anon)
                    if (ctx.edge_coherent(t, ob.role, w) && ctx.holds(w, ob.filler)) {
                        witnessed = true;
                        break;
                    }
                if (!witnessed)
                    for (TypeBits w : pinned)
                        if (ctx.edge_coherent(t, ob.role, w) && ctx.holds(w, ob.filler)) {
                            witnessed = true;
                            break;
                        }
                if (!witnessed) {
                    ok = false;
                    break;
                }
            }
            if (ok) keep.push_back(t);
        }
        if (keep.size() != anon.size()) {
            changed = true;
            anon = std::move(keep);
        }
    }
    return anon;
}

bool obligations_witnessed(const TypeContext& ctx, TypeBits t, const std::vector<TypeBits>& anon,
                           const std::vector<TypeBits>& pinned) {
    for (const auto& ob : ctx.obligations(t)) {
        bool witnessed = false;
        for (TypeBits w : anon)
            if (ctx.edge_coherent(t, ob.role, w) && ctx.holds(w, ob.filler)) {
                witnessed = true;
                break;
            }
        if (!witnessed)
            for (TypeBits w : pinned)
                if (ctx.edge_coherent(t, ob.role, w) && ctx.holds(w, ob.filler)) {
                    witnessed = true;
                    break;
                }
        if (!witnessed) return false;
    }
    return true;
}

TypeBits nominal_mask(const TypeContext& ctx) {
    TypeBits m = 0;
    for (int i : ctx.nominal_atom_indices()) m |= TypeBits{1} << i;
    return m;
}

struct UGuess {
    TypeBits mask = 0;
    TypeBits value = 0;
};

// Per-type constraint induced by a universal-role guess: globally true
// Forall(u,C) forces C everywhere; globally false Exists(u,C) forces not C.
bool u_type_ok(const TypeContext& ctx, TypeBits t, const UGuess& g) {
    for (int i : ctx.universal_atom_indices()) {
        const Concept& c = ctx.atoms()[i];
        bool truth = (g.value >> i) & 1;
        if (c.kind() == ConceptKind::Forall && truth && !ctx.holds(t, c.child())) return false;
        if (c.kind() == ConceptKind::Exists && !truth && ctx.holds(t, c.child())) return false;
    }
    return true;
}

bool u_final_ok(const TypeContext& ctx, const UGuess& g, const std::vector<TypeBits>& anon,
                const std::vector<TypeBits>& pinned) {
    auto some_holds = [&](const Concept& c) {
        for (TypeBits t : anon)
            if (ctx.holds(t, c)) return true;
        for (TypeBits t : pinned)
            if (ctx.holds(t, c)) return true;
        return false;
    };
    for (int i : ctx.universal_atom_indices()) {
        const Concept& c = ctx.atoms()[i];
        bool truth = (g.value >> i) & 1;
        if (c.kind() == ConceptKind::Exists && truth && !some_holds(c.child())) return false;
        if (c.kind() == ConceptKind::Forall && !truth && !some_holds(Concept::neg(c.child())))
            return false;
    }
    return true;
}

} // namespace

std::optional<SatWitness> Reasoner::satisfiable_core(const Ontology& o, const ExtendedDatabase& ed,
                                                     std::vector<Concept> extra,
                                                     std::optional<Concept> u_target) {
    for (const auto& [c, ind] : ed.compound_atoms) extra.push_back(c);
    if (u_target) extra.push_back(*u_target);
    auto ctx = std::make_shared<TypeContext>(o, ed.db, extra);

    const auto& u_idx = ctx->universal_atom_indices();
    if (u_idx.size() > 20) throw std::runtime_error("too many universal-role concepts");
    TypeBits nom_mask = nominal_mask(*ctx);

    // Individuals: everything mentioned in the database or a compound atom,
    // plus every nominal in the closure (encodings may mention individuals in
    // concepts only).
    std::set<std::string> ind_set = ed.db.individuals();
    for (const auto& [c, ind] : ed.compound_atoms) ind_set.insert(ind);
    for (const auto& n : ctx->individuals()) ind_set.insert(n);
    std::vector<std::string> inds(ind_set.begin(), ind_set.end());

    // Fact constraints per individual.
    std::map<std::string, TypeBits> fact_mask, fact_value;
    std::map<std::string, std::vector<Concept>> compound;
    for (const auto& ind : inds) {
        fact_mask[ind] = 0;
        fact_value[ind] = 0;
    }
    for (const auto& f : ed.db.concept_facts) {
        int idx = ctx->atom_index(Concept::atom(f.concept_name));
        if (idx < 0) throw std::logic_error("fact concept outside closure");
        fact_mask[f.individual] |= TypeBits{1} << idx;
        fact_value[f.individual] |= TypeBits{1} << idx;
    }
    for (const auto& [c, ind] : ed.compound_atoms) compound[ind].push_back(c);

    for (uint32_t ug = 0; ug < (1u << u_idx.size()); ++ug) {
        UGuess guess;
        for (size_t j = 0; j < u_idx.size(); ++j) {
            guess.mask |= TypeBits{1} << u_idx[j];
            if ((ug >> j) & 1) guess.value |= TypeBits{1} << u_idx[j];
        }

        auto anon_all = ctx->enumerate_types(nom_mask | guess.mask, guess.value);
        std::vector<TypeBits> anon;
        for (TypeBits t : anon_all)
            if (u_type_ok(*ctx, t, guess)) anon.push_back(t);

        auto finish = [&](std::vector<TypeBits> survivors,
                          TypeAssignment assignment) -> std::optional<SatWitness> {
            std::vector<TypeBits> pinned;
            for (const auto& [ind, t] : assignment.by_individual) pinned.push_back(t);
            if (!u_final_ok(*ctx, guess, survivors, pinned)) return std::nullopt;
            if (u_target) {
                bool found = false;
                for (TypeBits t : survivors)
                    if (ctx->holds(t, *u_target)) found = true;
                for (TypeBits t : pinned)
                    if (ctx->holds(t, *u_target)) found = true;
                if (!found) return std::nullopt;
            }
            if (survivors.empty() && pinned.empty()) return std::nullopt;
            SatWitness w;
            w.ctx = ctx;
            w.survivors = std::move(survivors);
            w.assignment = std::move(assignment);
            for (size_t j = 0; j < u_idx.size(); ++j)
                w.u_truth[ctx->atoms()[u_idx[j]]] = (ug >> j) & 1;
            return w;
        };

        if (inds.empty()) {
            auto survivors = eliminate_types(*ctx, anon, {});
            if (auto w = finish(std::move(survivors), {})) return w;
            continue;
        }

        if (!ctx->nominals_occur()) {
            // Fast path: nominal bits are inert, so no merging can be forced
            // and anonymous elimination is assignment-independent.
            auto survivors = eliminate_types(*ctx, anon, {});
            if (survivors.empty() && !inds.empty()) continue;
            std::map<std::string, std::vector<TypeBits>> cands;
            bool feasible = true;
            for (const auto& ind : inds) {
                int self = ctx->nominal_index(ind);
                TypeBits fm = nom_mask | guess.mask | fact_mask[ind];
                TypeBits fv = (self >= 0 ? TypeBits{1} << self : 0) | guess.value | fact_value[ind];
                for (TypeBits t : ctx->enumerate_types(fm, fv)) {
                    if (!u_type_ok(*ctx, t, guess)) continue;
                    bool ok = true;
                    for (const auto& c : compound[ind])
                        if (!ctx->holds(t, c)) {
                            ok = false;
                            break;
                        }
                    if (ok && obligations_witnessed(*ctx, t, survivors, {}))
                        cands[ind].push_back(t);
                }
                if (cands[ind].empty()) {
                    feasible = false;
                    break;
                }
            }
            if (!feasible) continue;

            // Assign individual types consistent with the role facts.
            TypeAssignment assign;
            std::function<bool(size_t)> pick = [&](size_t i) -> bool {
                if (i == inds.size()) return true;
                const auto& ind = inds[i];
                for (TypeBits t : cands[ind]) {
                    bool ok = true;
                    for (const auto& f : ed.db.role_facts) {
                        auto a = assign.by_individual.find(f.from);
                        auto b = assign.by_individual.find(f.to);
                        TypeBits ta = f.from == ind ? t : (a != assign.by_individual.end() ? a->second : 0);
                        TypeBits tb = f.to == ind ? t : (b != assign.by_individual.end() ? b->second : 0);
                        bool know_a = f.from == ind || a != assign.by_individual.end();
                        bool know_b = f.to == ind || b != assign.by_individual.end();
                        if (know_a && know_b && !ctx->edge_coherent(ta, Role(f.role_name), tb)) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) continue;
                    assign.by_individual[ind] = t;
                    if (pick(i + 1)) return true;
                    assign.by_individual.erase(ind);
                }
                return false;
            };
            if (!pick(0)) continue;
            if (auto w = finish(std::move(survivors), std::move(assign))) return w;
            continue;
        }

        // General path: guess a partition of the individuals into classes and
        // one type per class; types of distinct classes are nominal-disjoint
        // by construction.
        const size_t n = inds.size();
        std::vector<int> cls(n, -1);
        TypeAssignment assign;
        std::vector<TypeBits> anon_base = anon;
        long budget = 20000;

        std::function<bool(size_t, int)> partition = [&](size_t i, int num_classes) -> bool {
            if (budget-- < 0) throw std::runtime_error("nominal guess budget exceeded");
            if (i == n) {
                // Enumerate class types.
                std::vector<std::vector<std::string>> classes(num_classes);
                for (size_t k = 0; k < n; ++k) classes[cls[k]].push_back(inds[k]);
                std::vector<std::vector<TypeBits>> options(num_classes);
                for (int k = 0; k < num_classes; ++k) {
                    TypeBits fm = nom_mask | guess.mask, fv = guess.value;
                    for (const auto& ind : classes[k]) {
                        int self = ctx->nominal_index(ind);
                        if (self >= 0) fv |= TypeBits{1} << self;
                        fm |= fact_mask[ind];
                        fv |= fact_value[ind];
                    }
                    for (TypeBits t : ctx->enumerate_types(fm, fv)) {
                        if (!u_type_ok(*ctx, t, guess)) continue;
                        bool ok = true;
                        for (const auto& ind : classes[k])
                            for (const auto& c : compound[ind])
                                if (!ctx->holds(t, c)) ok = false;
                        if (ok) options[k].push_back(t);
                    }
                    if (options[k].empty()) return false;
                }
                std::vector<TypeBits> chosen(num_classes);
                std::function<bool(int)> choose = [&](int k) -> bool {
                    if (budget-- < 0) throw std::runtime_error("nominal guess budget exceeded");
                    if (k == num_classes) {
                        std::map<std::string, TypeBits> by_ind;
                        for (int j = 0; j < num_classes; ++j)
                            for (const auto& ind : classes[j]) by_ind[ind] = chosen[j];
                        for (const auto& f : ed.db.role_facts)
                            if (!ctx->edge_coherent(by_ind[f.from], Role(f.role_name),
                                                    by_ind[f.to]))
                                return false;
                        std::vector<TypeBits> pinned(chosen.begin(), chosen.end());
                        auto survivors = eliminate_types(*ctx, anon_base, pinned);
                        for (TypeBits t : pinned)
                            if (!obligations_witnessed(*ctx, t, survivors, pinned)) return false;
                        assign.by_individual.clear();
                        for (const auto& [ind, t] : by_ind) assign.by_individual[ind] = t;
                        return true;
                    }
                    for (TypeBits t : options[k]) {
                        chosen[k] = t;
                        if (choose(k + 1)) return true;
                    }
                    return false;
                };
                return choose(0);
            }
            for (int k = 0; k <= num_classes && k < static_cast<int>(n); ++k) {
                cls[i] = k;
                if (partition(i + 1, std::max(num_classes, k + 1))) return true;
            }
            cls[i] = -1;
            return false;
        };

        if (partition(0, 0)) {
            std::vector<TypeBits> pinned;
            for (const auto& [ind, t] : assign.by_individual) pinned.push_back(t);
            auto survivors = eliminate_types(*ctx, anon_base, pinned);
            if (auto w = finish(std::move(survivors), std::move(assign))) return w;
        }
    }
    return std::nullopt;
}

bool Reasoner::kb_satisfiable(const LabeledKB& kb) {
    return satisfiable_core(kb.ontology, ExtendedDatabase{kb.database, {}}).has_value();
}

bool Reasoner::extended_db_satisfiable(const Ontology& o, const ExtendedDatabase& ed) {
    return satisfiable_core(o, ed).has_value();
}

bool Reasoner::concept_satisfiable_u(const Ontology& o, const Concept& c) {
    return satisfiable_core(o, ExtendedDatabase{}, {}, c).has_value();
}

bool Reasoner::entails_instance(const LabeledKB& kb, const Concept& c, const std::string& a) {
    if (!kb.database.mentions(a))
        throw std::invalid_argument("individual not in database: " + a);
    ExtendedDatabase ed{kb.database, {{Concept::neg(c), a}}};
    return !satisfiable_core(kb.ontology, ed).has_value();
}

std::vector<TypeBits> Reasoner::ontology_survivors(const TypeContextPtr& ctx) {
    TypeBits nm = nominal_mask(*ctx);
    auto anon = ctx->enumerate_types(nm, 0);
    return eliminate_types(*ctx, anon, {});
}

std::vector<KType> Reasoner::ktypes(const LabeledKB& kb) {
    auto ctx = std::make_shared<TypeContext>(kb.ontology, kb.database, std::vector<Concept>{});
    auto anon = ontology_survivors(ctx);
    std::vector<KType> out;
    std::set<TypeBits> seen;
    for (TypeBits t : anon)
        if (seen.insert(t).second) out.push_back({ctx, t});
    // Types realizable at interpreted individuals: self-nominal variants whose
    // obligations the anonymous survivors witness. When nominals occur in the
    // ontology this is restricted by the guess machinery inside
    // satisfiable_core; here individuals carry no database constraints.
    TypeBits nm = nominal_mask(*ctx);
    for (const auto& ind : ctx->individuals()) {
        int self = ctx->nominal_index(ind);
        for (TypeBits t : ctx->enumerate_types(nm, TypeBits{1} << self)) {
            if (!obligations_witnessed(*ctx, t, anon, {})) continue;
            if (ctx->nominals_occur()) {
                // Verify a model of O with this nominal placement exists.
                ExtendedDatabase ed;
                Concept all = Concept::big_conj(
                    std::vector<Concept>(ctx->members(t).begin(), ctx->members(t).end()));
                if (!satisfiable_core(kb.ontology, ed, {Concept::conj(Concept::nominal(ind), all)},
                                      Concept::conj(Concept::nominal(ind), all))
                         .has_value())
                    continue;
            }
            if (seen.insert(t).second) out.push_back({ctx, t});
        }
    }
    return out;
}

Reasoner::BoundedModel Reasoner::unravel_witness(const SatWitness& w, int depth) {
    const TypeContext& ctx = *w.ctx;
    BoundedModel out;
    Structure& s = out.structure;
    std::map<TypeBits, ElementId> ind_elem;
    std::vector<TypeBits> etype;
    std::vector<int> edepth;

    auto new_element = [&](TypeBits t, int d) {
        ElementId e = static_cast<ElementId>(etype.size());
        s.add_element(e);
        etype.push_back(t);
        edepth.push_back(d);
        for (size_t i = 0; i < ctx.atoms().size(); ++i)
            if (ctx.atoms()[i].kind() == ConceptKind::Atom && ((t >> i) & 1))
                s.add_concept(ctx.atoms()[i].name(), e);
        return e;
    };

    for (const auto& [ind, t] : w.assignment.by_individual) {
        auto it = ind_elem.find(t);
        ElementId e = it != ind_elem.end() ? it->second : (ind_elem[t] = new_element(t, 0));
        s.set_anchor(ind, e);
    }
    for (const auto& f : ctx.database().role_facts)
        s.add_edge(f.role_name, s.anchors.at(f.from), s.anchors.at(f.to));

    std::vector<TypeBits> pinned;
    for (const auto& [ind, t] : w.assignment.by_individual) pinned.push_back(t);

    for (size_t e = 0; e < etype.size(); ++e) {
        TypeBits t = etype[e];
        for (const auto& ob : ctx.obligations(t)) {
            bool satisfied = false;
            for (ElementId f : s.successors(ob.role, static_cast<ElementId>(e)))
                if (ctx.holds(etype[f], ob.filler) &&
                    ctx.edge_coherent(t, ob.role, etype[f])) {
                    satisfied = true;
                    break;
                }
            if (satisfied) continue;
            if (edepth[e] >= depth) {
                out.frontier_debt.push_back(
                    {static_cast<ElementId>(e), Concept::exists(ob.role, ob.filler)});
                continue;
            }
            std::optional<TypeBits> wit;
            for (TypeBits cand : w.survivors)
                if (ctx.edge_coherent(t, ob.role, cand) && ctx.holds(cand, ob.filler)) {
                    wit = cand;
                    break;
                }
            ElementId target = -1;
            if (!wit) {
                for (TypeBits cand : pinned)
                    if (ctx.edge_coherent(t, ob.role, cand) && ctx.holds(cand, ob.filler)) {
                        wit = cand;
                        target = ind_elem.at(cand);
                        break;
                    }
            }
            if (!wit) continue;  // unreachable for valid witnesses
            if (target < 0) target = new_element(*wit, edepth[e] + 1);
            if (ob.role.inverted())
                s.add_edge(ob.role.name(), target, static_cast<ElementId>(e));
            else
                s.add_edge(ob.role.name(), static_cast<ElementId>(e), target);
        }
    }
    return out;
}

std::optional<Reasoner::BoundedModel> Reasoner::extract_bounded_model(const LabeledKB& kb,
                                                                      int depth) {
    if (depth <= 0) throw std::invalid_argument("depth must be positive");
    auto w = satisfiable_core(kb.ontology, ExtendedDatabase{kb.database, {}});
    if (!w) return std::nullopt;
    return unravel_witness(*w, depth);
}

Reasoner::RealizabilityTable Reasoner::realizability_table(const TypeContextPtr& ctx,
                                                           const std::vector<TypeBits>& survivors,
                                                           const Structure& target, Dialect dialect,
                                                           const Signature& sigma) {
    RealizabilityTable table;
    table.ctx = ctx;
    table.survivors = survivors;

    auto local_agree = [&](TypeBits t, ElementId e) {
        for (const auto& a : sigma.concept_names) {
            int idx = ctx->atom_index(Concept::atom(a));
            bool in_type = idx >= 0 && ((t >> idx) & 1);
            if (in_type != target.in_concept(a, e)) return false;
        }
        if (dialect_has_nominals(dialect)) {
            for (const auto& c : sigma.individual_names) {
                int idx = ctx->nominal_index(c);
                bool in_type = idx >= 0 && ((t >> idx) & 1);
                auto it = target.anchors.find(c);
                bool at_e = it != target.anchors.end() && it->second == e;
                if (in_type != at_e) return false;
            }
        }
        return true;
    };

    for (TypeBits t : survivors)
        for (ElementId e : target.domain)
            if (local_agree(t, e)) table.pairs.insert({t, e});

    auto sigma_step = [&](const Role& r) {
        if (!sigma.contains_role(r.name())) return false;
        return !r.inverted() || dialect_has_inverses(dialect);
    };
    auto back_roles = dialect_roles(sigma.role_names, dialect);

    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = table.pairs.begin(); it != table.pairs.end();) {
            auto [t, e] = *it;
            bool alive = true;
            for (const auto& ob : ctx->obligations(t)) {
                if (!sigma_step(ob.role)) continue;  // witnessed off-target; survival suffices
                bool ok = false;
                for (ElementId e2 : target.successors(ob.role, e)) {
                    for (TypeBits t2 : survivors)
                        if (table.contains(t2, e2) && ctx->edge_coherent(t, ob.role, t2) &&
                            ctx->holds(t2, ob.filler)) {
                            ok = true;
                            break;
                        }
                    if (ok) break;
                }
                if (!ok) {
                    alive = false;
                    break;
                }
            }
            if (alive) {
                for (const auto& r : back_roles) {
                    for (ElementId e2 : target.successors(r, e)) {
                        bool ok = false;
                        for (TypeBits t2 : survivors)
                            if (table.contains(t2, e2) && ctx->edge_coherent(t, r, t2)) {
                                ok = true;
                                break;
                            }
                        if (!ok) {
                            alive = false;
                            break;
                        }
                    }
                    if (!alive) break;
                }
            }
            if (alive) {
                ++it;
            } else {
                it = table.pairs.erase(it);
                changed = true;
            }
        }
    }
    return table;
}

bool Reasoner::realizable_bisimilar_to(const Ontology& o, const KType& t,
                                       const PointedStructure& target, Dialect dialect,
                                       const Signature& sigma) {
    auto ctx = t.ctx;
    auto survivors = ontology_survivors(ctx);
    bool valid = ctx->ci_coherent(t.bits) && obligations_witnessed(*ctx, t.bits, survivors, {});
    if (!valid) throw std::invalid_argument("type is not realizable w.r.t. the ontology");
    std::vector<TypeBits> pool = survivors;
    if (std::find(pool.begin(), pool.end(), t.bits) == pool.end()) pool.push_back(t.bits);
    auto table = realizability_table(ctx, pool, target.structure, dialect, sigma);
    return table.contains(t.bits, target.point);
}

int Reasoner::max_role_depth(const TypeContextPtr& ctx) {
    int d = 0;
    for (const auto& c : ctx->closure()) d = std::max(d, role_depth(c));
    return d;
}

AssignmentCSP AssignmentCSP::build(const TypeContextPtr& ctx, std::vector<TypeBits> survivors,
                                   const Database& db) {
    AssignmentCSP csp;
    csp.ctx = ctx;
    csp.survivors = std::move(survivors);
    csp.db = db;
    auto indset = db.individuals();
    csp.inds.assign(indset.begin(), indset.end());
    std::map<std::string, TypeBits> fmask, fval;
    for (const auto& ind : csp.inds) fmask[ind] = fval[ind] = 0;
    for (const auto& f : db.concept_facts) {
        int idx = ctx->atom_index(Concept::atom(f.concept_name));
        fmask[f.individual] |= TypeBits{1} << idx;
        fval[f.individual] |= TypeBits{1} << idx;
    }
    for (const auto& ind : csp.inds) {
        for (TypeBits t : ctx->enumerate_types(fmask[ind], fval[ind]))
            if (obligations_witnessed(*ctx, t, csp.survivors, {})) csp.vt[ind].push_back(t);
        if (csp.vt[ind].empty()) csp.feasible = false;
    }
    return csp;
}

bool AssignmentCSP::extendable(const std::map<std::string, TypeBits>& pinned) const {
    if (!feasible) return false;
    for (const auto& [ind, t] : pinned) {
        auto it = vt.find(ind);
        if (it == vt.end()) return false;
        if (std::find(it->second.begin(), it->second.end(), t) == it->second.end()) return false;
    }
    std::map<std::string, TypeBits> cur = pinned;
    std::function<bool(size_t)> rec = [&](size_t i) -> bool {
        if (i == inds.size()) return true;
        const auto& ind = inds[i];
        auto coherent_so_far = [&](TypeBits t) {
            for (const auto& f : db.role_facts) {
                auto a = f.from == ind ? std::optional<TypeBits>(t)
                                       : (cur.count(f.from) ? std::optional<TypeBits>(cur[f.from])
                                                            : std::nullopt);
                auto b = f.to == ind ? std::optional<TypeBits>(t)
                                     : (cur.count(f.to) ? std::optional<TypeBits>(cur[f.to])
                                                        : std::nullopt);
                if (a && b && !ctx->edge_coherent(*a, Role(f.role_name), *b)) return false;
            }
            return true;
        };
        if (cur.count(ind)) {
            if (!coherent_so_far(cur[ind])) return false;
            return rec(i + 1);
        }
        for (TypeBits t : vt.at(ind)) {
            if (!coherent_so_far(t)) continue;
            cur[ind] = t;
            if (rec(i + 1)) return true;
            cur.erase(ind);
        }
        return false;
    };
    return rec(0);
}

} // namespace dlsep
