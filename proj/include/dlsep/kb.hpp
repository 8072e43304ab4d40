#ifndef DLSEP_KB_HPP
#define DLSEP_KB_HPP

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dlsep/concepts.hpp"

namespace dlsep {

struct Signature {
    std::set<std::string> concept_names;
    std::set<std::string> role_names;
    std::set<std::string> individual_names;

    bool contains_concept(const std::string& n) const { return concept_names.count(n) > 0; }
    bool contains_role(const std::string& n) const { return role_names.count(n) > 0; }
    bool contains_individual(const std::string& n) const { return individual_names.count(n) > 0; }
    bool empty() const {
        return concept_names.empty() && role_names.empty() && individual_names.empty();
    }

    Signature& merge(const Signature& o) {
        concept_names.insert(o.concept_names.begin(), o.concept_names.end());
        role_names.insert(o.role_names.begin(), o.role_names.end());
        individual_names.insert(o.individual_names.begin(), o.individual_names.end());
        return *this;
    }
    bool subset_of(const Signature& o) const;
    bool operator==(const Signature&) const = default;
};

struct ConceptInclusion {
    Concept lhs, rhs;
};

struct Ontology {
    std::vector<ConceptInclusion> inclusions;
};

struct ConceptFact {
    std::string concept_name;
    std::string individual;
    auto operator<=>(const ConceptFact&) const = default;
};

struct RoleFact {
    std::string role_name;
    std::string from, to;
    auto operator<=>(const RoleFact&) const = default;
};

struct Database {
    std::set<ConceptFact> concept_facts;
    std::set<RoleFact> role_facts;

    std::set<std::string> individuals() const {
        std::set<std::string> out;
        for (const auto& f : concept_facts) out.insert(f.individual);
        for (const auto& f : role_facts) {
            out.insert(f.from);
            out.insert(f.to);
        }
        return out;
    }
    bool mentions(const std::string& ind) const { return individuals().count(ind) > 0; }
};

// Database plus compound atoms C(a); used by the reasoner for entailment and
// for condition (ii) of the homomorphism criterion.
struct ExtendedDatabase {
    Database db;
    std::vector<std::pair<Concept, std::string>> compound_atoms;
};

struct LabeledKB {
    Ontology ontology;
    Database database;
    std::set<std::string> positives;
    std::set<std::string> negatives;
    Dialect dialect = Dialect::ALC;

    // Throws std::invalid_argument when structural invariants fail.
    void check() const;
};

} // namespace dlsep

#endif
