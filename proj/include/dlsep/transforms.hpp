#ifndef DLSEP_TRANSFORMS_HPP
#define DLSEP_TRANSFORMS_HPP

#include <set>
#include <vector>

#include "dlsep/kb.hpp"

namespace dlsep {

// Negation normal form: negation only on atoms and nominals, double negation
// eliminated. Or/Forall stay first class.
Concept normalize_nnf(const Concept& c);

// Rewrites Or into not/and and Forall into not/some; used before relativize.
Concept desugar_to_ane(const Concept& c);

// sub(K): all concepts occurring in the KB, closed under subconcepts and
// single negation, plus {c} and not {c} for every c in ind(D). Extra concepts
// (e.g. compound atoms, candidate separators) can be folded in via `extra`.
std::set<Concept> subconcept_closure(const LabeledKB& kb,
                                     const std::vector<Concept>& extra = {});
std::set<Concept> subconcept_closure(const Ontology& o, const Database& d,
                                     const std::vector<Concept>& extra = {},
                                     bool with_nominals = true);

Signature signature_of(const Concept& c);
Signature signature_of(const Ontology& o);
Signature signature_of(const Database& d);
Signature signature_of(const LabeledKB& kb);
Signature signature_of(const QueryFormula& q);

Dialect dialect_of(const Concept& c);
Dialect dialect_of(const LabeledKB& kb);

// Relativization C|A from the conservative-extension reduction. The input must
// be in the and/not/some fragment (use desugar_to_ane first).
Concept relativize(const Concept& c, const std::string& guard);

// Replaces concept names outside sigma by top (helper erasure for strong
// separability).
Concept erase_helpers(const Concept& c, const Signature& sigma);
QueryFormulaPtr erase_helpers(const QueryFormulaPtr& f, const Signature& sigma);

} // namespace dlsep

#endif
