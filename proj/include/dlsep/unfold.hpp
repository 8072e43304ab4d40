#ifndef DLSEP_UNFOLD_HPP
#define DLSEP_UNFOLD_HPP

#include "dlsep/structures.hpp"

namespace dlsep {

enum class UnfoldVariant { Plain, OmitSigmaIndividuals };

// Word-based k-unfolding of s at d, truncated at `depth` steps. The plain
// variant follows roles per dialect (role names only for ALC/ALCO, names and
// inverses otherwise) with k copies per edge. The omit variant follows role
// names, stops Sigma-paths at Sigma-anchored individuals, and re-adds edges to
// the Sigma-individual anchors.
PointedStructure k_unfold(const Structure& s, ElementId d, int k, int depth, Dialect dialect,
                          UnfoldVariant variant = UnfoldVariant::Plain,
                          const Signature& sigma = {});

// Bisimulation product of two pointed structures. Domain: ALCIO(Sigma)-
// bisimilar pairs; Sigma symbols joint, sig_a private symbols from A, sig_b
// private symbols from B, Sigma individuals paired. Throws when the points are
// not bisimilar or the private signatures overlap outside Sigma.
PointedStructure bisim_product(const PointedStructure& A, const PointedStructure& B,
                               const Signature& sigma, const Signature& sig_a,
                               const Signature& sig_b);

} // namespace dlsep

#endif
