#include "dlsep/queryeval.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace dlsep {

namespace {

ElementId resolve(const Structure& s, const CQTerm& t, const std::vector<ElementId>& env) {
    if (t.is_var()) return env[t.var];
    auto it = s.anchors.find(t.ind);
    if (it == s.anchors.end())
        throw std::invalid_argument("unanchored individual in query: " + t.ind);
    return it->second;
}

bool cq_assign(const Structure& s, const CQ& q, std::vector<ElementId>& env, int var) {
    if (var == q.num_vars) {
        for (const auto& a : q.atoms) {
            if (a.kind == CQAtom::Kind::RoleAtom) {
                if (!s.has_edge(a.role, resolve(s, a.t1, env), resolve(s, a.t2, env)))
                    return false;
            } else {
                if (!eval_concept_at(s, a.concept_, resolve(s, a.t1, env))) return false;
            }
        }
        return true;
    }
    for (ElementId e : s.domain) {
        env[var] = e;
        if (cq_assign(s, q, env, var + 1)) return true;
    }
    return false;
}

} // namespace

bool eval_query(const Structure& s, const QueryFormula& q, ElementId e) {
    switch (q.kind) {
        case QueryFormula::Kind::ConceptAt: return eval_concept_at(s, q.concept_, e);
        case QueryFormula::Kind::Cq: {
            std::vector<ElementId> env(q.cq.num_vars, e);
            return cq_assign(s, q.cq, env, 1);
        }
        case QueryFormula::Kind::Ucq:
        case QueryFormula::Kind::Disj:
            for (const auto& p : q.parts)
                if (eval_query(s, *p, e)) return true;
            return false;
        case QueryFormula::Kind::Conj:
            for (const auto& p : q.parts)
                if (!eval_query(s, *p, e)) return false;
            return true;
        case QueryFormula::Kind::Neg: return !eval_query(s, *q.parts[0], e);
        case QueryFormula::Kind::NegSelfLoop: return !s.has_edge(q.role, e, e);
        case QueryFormula::Kind::TwinSuccessors: {
            auto succ = s.successors(Role(q.role), e);
            std::set<ElementId> distinct(succ.begin(), succ.end());
            return distinct.size() >= 2;
        }
    }
    return false;
}

namespace {

bool cq_rooted(const CQ& q, Dialect dialect) {
    // Terms are nodes; role atoms are edges. Individuals get ids after vars.
    std::map<std::string, int> ind_ids;
    int next = q.num_vars;
    auto term_id = [&](const CQTerm& t) {
        if (t.is_var()) return t.var;
        auto [it, fresh] = ind_ids.try_emplace(t.ind, next);
        if (fresh) ++next;
        return it->second;
    };
    std::set<int> nodes;
    for (int v = 0; v < q.num_vars; ++v) nodes.insert(v);
    std::vector<std::pair<int, int>> edges;
    for (const auto& a : q.atoms) {
        if (a.kind == CQAtom::Kind::RoleAtom) {
            int u = term_id(a.t1), v = term_id(a.t2);
            nodes.insert(u);
            nodes.insert(v);
            edges.push_back({u, v});
        } else {
            nodes.insert(term_id(a.t1));
        }
    }
    bool undirected = dialect_has_inverses(dialect);
    std::set<int> seen{0};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [u, v] : edges) {
            if (seen.count(u) && !seen.count(v)) { seen.insert(v); grew = true; }
            if (undirected && seen.count(v) && !seen.count(u)) { seen.insert(u); grew = true; }
        }
    }
    return seen.size() == nodes.size();
}

} // namespace

bool is_rooted(const QueryFormula& q, Dialect dialect) {
    switch (q.kind) {
        case QueryFormula::Kind::ConceptAt: return true;
        case QueryFormula::Kind::Cq: return cq_rooted(q.cq, dialect);
        case QueryFormula::Kind::Ucq:
            for (const auto& p : q.parts)
                if (!is_rooted(*p, dialect)) return false;
            return true;
        default:
            throw std::invalid_argument("rootedness is defined for CQs and UCQs only");
    }
}

bool is_rooted(const PointedStructure& p, Dialect dialect) {
    bool undirected = dialect_has_inverses(dialect);
    std::set<ElementId> seen{p.point};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [name, ext] : p.structure.role_ext) {
            for (const auto& [u, v] : ext) {
                if (seen.count(u) && !seen.count(v)) { seen.insert(v); grew = true; }
                if (undirected && seen.count(v) && !seen.count(u)) { seen.insert(u); grew = true; }
            }
        }
    }
    return seen.size() == p.structure.domain.size();
}

} // namespace dlsep
