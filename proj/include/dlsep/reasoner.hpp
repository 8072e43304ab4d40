#ifndef DLSEP_REASONER_HPP
#define DLSEP_REASONER_HPP

#include <cstdint>
#include <memory>
#include <optional>

#include "dlsep/structures.hpp"
#include "dlsep/transforms.hpp"

namespace dlsep {

using TypeBits = uint64_t;

// Indexed subconcept closure of a KB (plus extra concepts). Decision atoms are
// the concept-name / nominal / exists / forall members; truth of compound
// members is derived. A type is a bit assignment over the atoms.
class TypeContext {
  public:
    // with_nominals injects {c} atoms for the database individuals into the
    // closure (the default). ALC/ALCI pipelines drop them: nominal bits would
    // only clutter types there.
    TypeContext(Ontology o, Database db, std::vector<Concept> extra = {},
                bool with_nominals = true);

    const Ontology& ontology() const { return ontology_; }
    const Database& database() const { return database_; }
    const std::set<Concept>& closure() const { return closure_; }
    const std::vector<Concept>& atoms() const { return atoms_; }
    size_t num_atoms() const { return atoms_.size(); }

    int atom_index(const Concept& c) const;
    bool holds(TypeBits t, const Concept& c) const;
    // -1 false, 0 unknown, 1 true under a partial assignment.
    int holds3(TypeBits value, TypeBits known, const Concept& c) const;

    bool ci_coherent(TypeBits t) const;
    // May an R-edge connect an element of type t to one of type t2?
    bool edge_coherent(TypeBits t, const Role& r, TypeBits t2) const;

    struct Obligation {
        Role role;
        Concept filler;
    };
    // Existential successor requirements of t (universal role excluded).
    std::vector<Obligation> obligations(TypeBits t) const;
    // Value restrictions (R, C): every R-successor must satisfy C.
    std::vector<Obligation> value_restrictions(TypeBits t) const;

    // All coherent types with the given bits pinned. Nominal bits not pinned
    // are enumerated freely; most callers pin them all.
    std::vector<TypeBits> enumerate_types(TypeBits fixed_mask, TypeBits fixed_value) const;

    std::set<Concept> members(TypeBits t) const;

    const std::vector<int>& nominal_atom_indices() const { return nominal_atoms_; }
    int nominal_index(const std::string& ind) const;  // -1 when absent
    const std::vector<std::string>& individuals() const { return individuals_; }
    // True when some nominal occurs inside the ontology, a compound atom, or
    // an extra concept (as opposed to closure injection only).
    bool nominals_occur() const { return nominals_occur_; }

    const std::vector<int>& universal_atom_indices() const { return u_atoms_; }
    std::vector<Role> occurring_roles() const { return roles_; }

  private:
    Ontology ontology_;
    Database database_;
    std::set<Concept> closure_;
    std::vector<Concept> atoms_;
    std::map<Concept, int> atom_idx_;
    std::vector<int> nominal_atoms_;
    std::map<std::string, int> nominal_by_name_;
    std::vector<std::string> individuals_;
    std::vector<int> u_atoms_;
    std::vector<Role> roles_;
    bool nominals_occur_ = false;
};

using TypeContextPtr = std::shared_ptr<const TypeContext>;

struct KType {
    TypeContextPtr ctx;
    TypeBits bits = 0;

    std::set<Concept> members() const { return ctx->members(bits); }
    bool holds(const Concept& c) const { return ctx->holds(bits, c); }
};

struct TypeAssignment {
    std::map<std::string, TypeBits> by_individual;
};

// Outcome of satisfiability: the surviving types and a satisfying assignment.
struct SatWitness {
    TypeContextPtr ctx;
    std::vector<TypeBits> survivors;       // anonymous survivors
    TypeAssignment assignment;             // empty when there are no individuals
    std::map<Concept, bool> u_truth;       // universal-role guesses (u-mode only)
};

class Reasoner {
  public:
    // Core satisfiability of (o, ed) with `extra` folded into the closure.
    // When u_target is set, decides concept satisfiability of *u_target
    // w.r.t. o in ALCIO^u (ed is then typically empty).
    static std::optional<SatWitness> satisfiable_core(const Ontology& o,
                                                      const ExtendedDatabase& ed,
                                                      std::vector<Concept> extra = {},
                                                      std::optional<Concept> u_target = {});

    static std::vector<KType> ktypes(const LabeledKB& kb);
    static bool kb_satisfiable(const LabeledKB& kb);
    static bool extended_db_satisfiable(const Ontology& o, const ExtendedDatabase& ed);
    static bool concept_satisfiable_u(const Ontology& o, const Concept& c);
    // K |= C(a), decided as unsatisfiability of K extended with (not C)(a).
    static bool entails_instance(const LabeledKB& kb, const Concept& c, const std::string& a);

    struct BoundedModel {
        Structure structure;
        // Elements whose existential constraints were cut off at the depth
        // bound, with the unwitnessed obligations.
        std::vector<std::pair<ElementId, Concept>> frontier_debt;
    };
    static std::optional<BoundedModel> extract_bounded_model(const LabeledKB& kb, int depth);
    // Unravels the given satisfiability witness instead of recomputing one.
    static BoundedModel unravel_witness(const SatWitness& w, int depth);

    // Does a model of o realize t at a point ALCI/ALC(Sigma)-bisimilar to the
    // target? Greatest fixpoint over (surviving type, target element) pairs.
    static bool realizable_bisimilar_to(const Ontology& o, const KType& t,
                                        const PointedStructure& target, Dialect dialect,
                                        const Signature& sigma);

    // Fixpoint table for realizable_bisimilar_to, reusable across queries
    // against one target: survivors paired with target elements.
    struct RealizabilityTable {
        TypeContextPtr ctx;
        std::vector<TypeBits> survivors;
        std::set<std::pair<TypeBits, ElementId>> pairs;
        bool contains(TypeBits t, ElementId e) const { return pairs.count({t, e}) > 0; }
    };
    static RealizabilityTable realizability_table(const TypeContextPtr& ctx,
                                                  const std::vector<TypeBits>& survivors,
                                                  const Structure& target, Dialect dialect,
                                                  const Signature& sigma);

    // Anonymous survivors of type elimination w.r.t. the ontology alone.
    static std::vector<TypeBits> ontology_survivors(const TypeContextPtr& ctx);

    static int max_role_depth(const TypeContextPtr& ctx);
};

// Type-assignment constraint problem over a nominal-free closure: per
// individual the fact-consistent, survivor-witnessed types, extendable under
// role-fact coherence. For such closures an extension exists iff the KB with
// the pinned types as compound atoms is satisfiable.
struct AssignmentCSP {
    TypeContextPtr ctx;
    std::vector<TypeBits> survivors;
    Database db;
    std::vector<std::string> inds;
    std::map<std::string, std::vector<TypeBits>> vt;
    bool feasible = true;

    static AssignmentCSP build(const TypeContextPtr& ctx, std::vector<TypeBits> survivors,
                               const Database& db);
    bool extendable(const std::map<std::string, TypeBits>& pinned) const;
};

int role_depth(const Concept& c);

} // namespace dlsep

#endif
