#ifndef DLSEP_AUTOMATA_BUILD_HPP
#define DLSEP_AUTOMATA_BUILD_HPP

#include "dlsep/automata.hpp"
#include "dlsep/reasoner.hpp"

namespace dlsep {

// Label alphabet of a KB: roles of the KB (with inverses when the dialect has
// them), members over ind(D) plus the KB's concept names, and flags over
// (role name, individual) pairs.
LabelUniverse kb_alphabet(const LabeledKB& kb);

// A0: accepts exactly the well-formed Theta-labeled trees (unique anchor node
// per individual; non-blank nodes are top anchors or sit below an anchor).
TwoATA build_wellformed_automaton(const LabeledKB& kb);

// AK: accepts a well-formed tree iff the decoded structure is a finite
// outdegree forest model of the KB.
TwoATA build_forest_model_automaton(const LabeledKB& kb);

// Aa: accepts a well-formed tree iff D_con(a),a maps homomorphically into the
// decoded structure at b with per-individual bisimilar-model types (the
// criterion behind the weak-separability pipeline). Two-way.
TwoATA build_bisim_automaton(const LabeledKB& kb, const std::string& a, const std::string& b,
                             const Signature& sigma, Dialect dialect);

// Encoding of finite forest models as Theta-labeled binary trees (padding
// with blank nodes) and its inverse on finite trees.
RegularTree encode_forest_model(const Structure& s, const LabeledKB& kb);
Structure decode_forest_model(const RegularTree& t, const LabeledKB& kb);

// Forest-shape test used by encode_forest_model.
bool is_forest_shaped(const Structure& s, const LabeledKB& kb);

} // namespace dlsep

#endif
