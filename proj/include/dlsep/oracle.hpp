#ifndef DLSEP_ORACLE_HPP
#define DLSEP_ORACLE_HPP

#include <functional>
#include <optional>

#include "dlsep/bisim.hpp"
#include "dlsep/kb.hpp"

namespace dlsep {

struct OracleConfig {
    int max_elements = 4;
    long node_budget = 40'000'000;  // DFS steps before giving up with an exception
    // Individuals beyond those mentioned in the database (nominals of a
    // concept under test).
    std::vector<std::string> extra_individuals;
};

// Brute-force concept satisfiability over structures of bounded size;
// exercises the universal role through direct evaluation.
bool brute_concept_satisfiable(const Concept& c, const OracleConfig& cfg);

struct OracleBudgetExceeded : std::runtime_error {
    OracleBudgetExceeded() : std::runtime_error("oracle search budget exceeded") {}
};

// Exhaustive model search over small structures. Every enumerated structure is
// garbage-free: each element is (undirectedly) connected to an anchored
// element. Free elements are enumerated up to their label-vector ordering, so
// the stream covers all models up to renaming of unanchored elements.
class Oracle {
  public:
    // Calls cb for every model of (o, d) with at most cfg.max_elements
    // elements; stops early when cb returns false.
    static void for_each_model(const Ontology& o, const Database& d, const OracleConfig& cfg,
                               const std::function<bool(const Structure&)>& cb);

    static bool has_model(const Ontology& o, const Database& d, const OracleConfig& cfg);

    struct JointBisimResult {
        bool found = false;
        Structure model_a, model_b;
    };
    // Do models A and B of kb exist with A,a ~_{L,Sigma} B,b (each of size at
    // most cfg.max_elements)? Decided by intersecting canonical bisimulation
    // collapses over the enumerated model pool.
    static JointBisimResult joint_bisimilar_models(const LabeledKB& kb, const std::string& a,
                                                   const std::string& b, Dialect dialect,
                                                   const Signature& sigma,
                                                   const OracleConfig& cfg);

    // Canonical form of the bisimulation collapse of the pointed Sigma-reduct;
    // two pointed structures are L(Sigma)-bisimilar iff their forms coincide.
    static std::string collapse_canon(const Structure& s, ElementId point, Dialect dialect,
                                      const Signature& sigma);
};

} // namespace dlsep

#endif
