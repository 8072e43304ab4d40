#ifndef DLSEP_STRUCTURES_HPP
#define DLSEP_STRUCTURES_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dlsep/kb.hpp"

namespace dlsep {

using ElementId = int;

// Finite relational structure. Immutable by convention once built: all
// operations in this library take structures by const reference.
struct Structure {
    std::vector<ElementId> domain;
    std::map<std::string, std::set<ElementId>> concept_ext;
    std::map<std::string, std::set<std::pair<ElementId, ElementId>>> role_ext;
    std::map<std::string, ElementId> anchors;  // individual name -> element

    bool has_element(ElementId e) const;
    bool in_concept(const std::string& name, ElementId e) const;
    bool has_edge(const std::string& role, ElementId a, ElementId b) const;
    // Edge along a role; inverse roles follow edges backwards.
    bool has_edge_along(const Role& r, ElementId a, ElementId b) const;
    // Neighbors of e along a role (inverse roles follow edges backwards).
    std::vector<ElementId> successors(const Role& r, ElementId e) const;
    // All role names with at least one edge.
    std::set<std::string> role_names() const;

    void add_element(ElementId e);
    void add_concept(const std::string& name, ElementId e);
    void add_edge(const std::string& role, ElementId a, ElementId b);
    void set_anchor(const std::string& ind, ElementId e);

    // Satisfaction checks used by oracles and certificates.
    bool satisfies(const Ontology& o) const;
    bool satisfies(const Database& d) const;
    bool is_model_of(const Ontology& o, const Database& d) const;
};

struct PointedStructure {
    Structure structure;
    ElementId point = 0;
};

Structure database_structure(const Database& d);

std::set<ElementId> eval_concept(const Structure& s, const Concept& c);
bool eval_concept_at(const Structure& s, const Concept& c, ElementId e);

std::string structure_to_json(const Structure& s);
Structure structure_from_json(const std::string& text);

// Disjoint union; keeps the left structure's anchors. Returns the id offset
// applied to the right structure's elements.
ElementId disjoint_union(Structure& left, const Structure& right);

} // namespace dlsep

#endif
