#ifndef DLSEP_QUERYEVAL_HPP
#define DLSEP_QUERYEVAL_HPP

#include "dlsep/structures.hpp"

namespace dlsep {

bool eval_query(const Structure& s, const QueryFormula& q, ElementId e);

// Rootedness of a CQ in its free variable, per the dialect's edge graph
// (directed for ALC/ALCO, undirected for ALCI/ALCIO). For UCQs, every
// disjunct must be rooted.
bool is_rooted(const QueryFormula& q, Dialect dialect);
bool is_rooted(const PointedStructure& p, Dialect dialect);

} // namespace dlsep

#endif
