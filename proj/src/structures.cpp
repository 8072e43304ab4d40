#include "dlsep/structures.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dlsep {

bool Structure::has_element(ElementId e) const {
    return std::find(domain.begin(), domain.end(), e) != domain.end();
}

bool Structure::in_concept(const std::string& name, ElementId e) const {
    auto it = concept_ext.find(name);
    return it != concept_ext.end() && it->second.count(e) > 0;
}

bool Structure::has_edge(const std::string& role, ElementId a, ElementId b) const {
    auto it = role_ext.find(role);
    return it != role_ext.end() && it->second.count({a, b}) > 0;
}

bool Structure::has_edge_along(const Role& r, ElementId a, ElementId b) const {
    return r.inverted() ? has_edge(r.name(), b, a) : has_edge(r.name(), a, b);
}

std::vector<ElementId> Structure::successors(const Role& r, ElementId e) const {
    std::vector<ElementId> out;
    auto it = role_ext.find(r.name());
    if (it == role_ext.end()) return out;
    for (const auto& [x, y] : it->second) {
        if (!r.inverted() && x == e) out.push_back(y);
        if (r.inverted() && y == e) out.push_back(x);
    }
    return out;
}

std::set<std::string> Structure::role_names() const {
    std::set<std::string> out;
    for (const auto& [r, ext] : role_ext)
        if (!ext.empty()) out.insert(r);
    return out;
}

void Structure::add_element(ElementId e) {
    if (!has_element(e)) domain.push_back(e);
}
void Structure::add_concept(const std::string& name, ElementId e) { concept_ext[name].insert(e); }
void Structure::add_edge(const std::string& role, ElementId a, ElementId b) {
    role_ext[role].insert({a, b});
}
void Structure::set_anchor(const std::string& ind, ElementId e) { anchors[ind] = e; }

bool Structure::satisfies(const Ontology& o) const {
    for (const auto& ci : o.inclusions) {
        auto lhs = eval_concept(*this, ci.lhs);
        auto rhs = eval_concept(*this, ci.rhs);
        for (ElementId e : lhs)
            if (!rhs.count(e)) return false;
    }
    return true;
}

bool Structure::satisfies(const Database& d) const {
    for (const auto& f : d.concept_facts) {
        auto it = anchors.find(f.individual);
        if (it == anchors.end() || !in_concept(f.concept_name, it->second)) return false;
    }
    for (const auto& f : d.role_facts) {
        auto a = anchors.find(f.from);
        auto b = anchors.find(f.to);
        if (a == anchors.end() || b == anchors.end() ||
            !has_edge(f.role_name, a->second, b->second))
            return false;
    }
    return true;
}

bool Structure::is_model_of(const Ontology& o, const Database& d) const {
    return satisfies(d) && satisfies(o);
}

std::set<ElementId> eval_concept(const Structure& s, const Concept& c) {
    std::set<ElementId> all(s.domain.begin(), s.domain.end());
    switch (c.kind()) {
        case ConceptKind::Top: return all;
        case ConceptKind::Bot: return {};
        case ConceptKind::Atom: {
            auto it = s.concept_ext.find(c.name());
            return it == s.concept_ext.end() ? std::set<ElementId>{} : it->second;
        }
        case ConceptKind::Nominal: {
            auto it = s.anchors.find(c.name());
            if (it == s.anchors.end())
                throw std::invalid_argument("unanchored nominal {" + c.name() + "}");
            return {it->second};
        }
        case ConceptKind::Not: {
            auto inner = eval_concept(s, c.child());
            std::set<ElementId> out;
            for (ElementId e : all)
                if (!inner.count(e)) out.insert(e);
            return out;
        }
        case ConceptKind::And: {
            auto l = eval_concept(s, c.child(0));
            auto r = eval_concept(s, c.child(1));
            std::set<ElementId> out;
            for (ElementId e : l)
                if (r.count(e)) out.insert(e);
            return out;
        }
        case ConceptKind::Or: {
            auto l = eval_concept(s, c.child(0));
            auto r = eval_concept(s, c.child(1));
            l.insert(r.begin(), r.end());
            return l;
        }
        case ConceptKind::Exists: {
            auto inner = eval_concept(s, c.child());
            std::set<ElementId> out;
            if (c.role().is_universal()) {
                if (!inner.empty()) return all;
                return {};
            }
            for (ElementId e : all)
                for (ElementId f : s.successors(c.role(), e))
                    if (inner.count(f)) {
                        out.insert(e);
                        break;
                    }
            return out;
        }
        case ConceptKind::Forall: {
            auto inner = eval_concept(s, c.child());
            std::set<ElementId> out;
            if (c.role().is_universal()) {
                if (inner.size() == all.size()) return all;
                return {};
            }
            for (ElementId e : all) {
                bool ok = true;
                for (ElementId f : s.successors(c.role(), e))
                    if (!inner.count(f)) {
                        ok = false;
                        break;
                    }
                if (ok) out.insert(e);
            }
            return out;
        }
    }
    return {};
}

bool eval_concept_at(const Structure& s, const Concept& c, ElementId e) {
    return eval_concept(s, c).count(e) > 0;
}

Structure database_structure(const Database& d) {
    Structure s;
    int next = 0;
    std::map<std::string, ElementId> ids;
    for (const auto& ind : d.individuals()) {
        ids[ind] = next;
        s.add_element(next);
        s.set_anchor(ind, next);
        ++next;
    }
    for (const auto& f : d.concept_facts) s.add_concept(f.concept_name, ids.at(f.individual));
    for (const auto& f : d.role_facts) s.add_edge(f.role_name, ids.at(f.from), ids.at(f.to));
    return s;
}

std::string structure_to_json(const Structure& s) {
    nlohmann::ordered_json j;
    j["domain"] = s.domain;
    nlohmann::ordered_json cs = nlohmann::ordered_json::object();
    for (const auto& [name, ext] : s.concept_ext)
        cs[name] = std::vector<ElementId>(ext.begin(), ext.end());
    j["concepts"] = cs;
    nlohmann::ordered_json rs = nlohmann::ordered_json::object();
    for (const auto& [name, ext] : s.role_ext) {
        std::vector<std::vector<ElementId>> pairs;
        for (const auto& [a, b] : ext) pairs.push_back({a, b});
        rs[name] = pairs;
    }
    j["roles"] = rs;
    nlohmann::ordered_json as = nlohmann::ordered_json::object();
    for (const auto& [ind, e] : s.anchors) as[ind] = e;
    j["anchors"] = as;
    return j.dump(2);
}

Structure structure_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Structure s;
    for (const auto& e : j.at("domain")) s.add_element(e.get<ElementId>());
    for (const auto& [name, arr] : j.at("concepts").items())
        for (const auto& e : arr) s.add_concept(name, e.get<ElementId>());
    for (const auto& [name, arr] : j.at("roles").items())
        for (const auto& p : arr) s.add_edge(name, p.at(0).get<ElementId>(), p.at(1).get<ElementId>());
    for (const auto& [ind, e] : j.at("anchors").items()) s.set_anchor(ind, e.get<ElementId>());
    return s;
}

ElementId disjoint_union(Structure& left, const Structure& right) {
    ElementId offset = 0;
    for (ElementId e : left.domain) offset = std::max(offset, e + 1);
    for (ElementId e : right.domain) left.add_element(e + offset);
    for (const auto& [name, ext] : right.concept_ext)
        for (ElementId e : ext) left.add_concept(name, e + offset);
    for (const auto& [name, ext] : right.role_ext)
        for (const auto& [a, b] : ext) left.add_edge(name, a + offset, b + offset);
    return offset;
}

} // namespace dlsep
