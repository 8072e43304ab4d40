#ifndef DLSEP_BISIM_HPP
#define DLSEP_BISIM_HPP

#include <optional>

#include "dlsep/structures.hpp"

namespace dlsep {

struct BisimRelation {
    std::set<std::pair<ElementId, ElementId>> pairs;
    bool functional = false;

    bool relates(ElementId a, ElementId b) const { return pairs.count({a, b}) > 0; }
};

// Checks that rel is an L(Sigma)-bisimulation between A and B. The nominal
// clause applies only for dialects with nominals, inverse clauses only for
// dialects with inverses.
bool check_bisimulation(const Structure& A, const Structure& B, const BisimRelation& rel,
                        Dialect dialect, const Signature& sigma);

// Largest L(Sigma)-bisimulation between A and B (greatest fixpoint).
BisimRelation max_bisimulation(const Structure& A, const Structure& B, Dialect dialect,
                               const Signature& sigma);

// A functional L(Sigma)-bisimulation containing (A.point, B.point), if any.
std::optional<std::map<ElementId, ElementId>> functional_bisim_exists(
    const PointedStructure& A, const PointedStructure& B, Dialect dialect,
    const Signature& sigma);

// Total Sigma-homomorphism A -> B respecting the optional anchor pair.
std::optional<std::map<ElementId, ElementId>> sigma_homomorphism(
    const Structure& A, const Structure& B, const Signature& sigma,
    std::optional<std::pair<ElementId, ElementId>> anchor = {});

// CQ^L(Sigma)-homomorphism with domain `subset`: a Sigma-homomorphism of
// A|subset into B mapping point to point whose every image pair is
// L(Sigma)-bisimilar (raw structures; no ontology).
bool cq_hom_check(const PointedStructure& A, const PointedStructure& B,
                  const std::set<ElementId>& subset, Dialect dialect, const Signature& sigma);

// Roles to consider for bisimulations/structural steps under a dialect:
// role names from `roles`, plus their inverses when the dialect has them.
std::vector<Role> dialect_roles(const std::set<std::string>& roles, Dialect dialect);

} // namespace dlsep

#endif
