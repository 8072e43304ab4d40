#include "dlsep/unfold.hpp"

#include <stdexcept>

#include "dlsep/bisim.hpp"

namespace dlsep {

PointedStructure k_unfold(const Structure& s, ElementId d, int k, int depth, Dialect dialect,
                          UnfoldVariant variant, const Signature& sigma) {
    if (k <= 0 || depth <= 0) throw std::invalid_argument("k_unfold: k and depth must be positive");

    std::set<ElementId> sigma_anchored;
    if (variant == UnfoldVariant::OmitSigmaIndividuals)
        for (const auto& c : sigma.individual_names) {
            auto it = s.anchors.find(c);
            if (it != s.anchors.end()) sigma_anchored.insert(it->second);
        }

    struct Word {
        ElementId tail;
        int node;        // id in the output structure
        int len;
        bool all_sigma;  // every role on the path is in sigma
    };

    PointedStructure out;
    int next = 0;
    auto fresh = [&](ElementId tail) {
        int id = next++;
        out.structure.add_element(id);
        for (const auto& [name, ext] : s.concept_ext)
            if (ext.count(tail)) out.structure.add_concept(name, id);
        return id;
    };

    std::vector<Word> frontier;
    frontier.push_back({d, fresh(d), 0, true});
    out.point = 0;

    std::vector<Role> roles;
    if (variant == UnfoldVariant::Plain) {
        roles = dialect_roles(s.role_names(), dialect);
    } else {
        for (const auto& r : s.role_names()) roles.emplace_back(r);
    }

    // Anchors for the omit variant: one copy of each Sigma-anchored individual.
    std::map<ElementId, int> anchor_node;
    if (variant == UnfoldVariant::OmitSigmaIndividuals) {
        for (const auto& c : sigma.individual_names) {
            auto it = s.anchors.find(c);
            if (it == s.anchors.end()) continue;
            auto [an, known] = anchor_node.try_emplace(it->second, -1);
            if (an->second < 0) an->second = fresh(it->second);
            out.structure.set_anchor(c, an->second);
        }
    }

    while (!frontier.empty()) {
        Word w = frontier.back();
        frontier.pop_back();
        if (w.len >= depth) continue;
        for (const auto& r : roles) {
            bool r_in_sigma = sigma.contains_role(r.name());
            for (ElementId succ : s.successors(r, w.tail)) {
                bool succ_all_sigma = w.all_sigma && r_in_sigma;
                if (variant == UnfoldVariant::OmitSigmaIndividuals && succ_all_sigma &&
                    sigma_anchored.count(succ)) {
                    // Path of Sigma-roles ending at a Sigma individual: stop and
                    // connect to the individual's anchor copy instead.
                    out.structure.add_edge(r.name(), w.node, anchor_node.at(succ));
                    continue;
                }
                for (int copy = 0; copy < k; ++copy) {
                    int id = fresh(succ);
                    if (r.inverted())
                        out.structure.add_edge(r.name(), id, w.node);
                    else
                        out.structure.add_edge(r.name(), w.node, id);
                    frontier.push_back({succ, id, w.len + 1, succ_all_sigma});
                }
            }
        }
    }
    return out;
}

PointedStructure bisim_product(const PointedStructure& A, const PointedStructure& B,
                               const Signature& sigma, const Signature& sig_a,
                               const Signature& sig_b) {
    for (const auto& n : sig_a.concept_names)
        if (sig_b.contains_concept(n) && !sigma.contains_concept(n))
            throw std::invalid_argument("bisim_product: shared private concept " + n);
    for (const auto& n : sig_a.role_names)
        if (sig_b.contains_role(n) && !sigma.contains_role(n))
            throw std::invalid_argument("bisim_product: shared private role " + n);

    BisimRelation rel = max_bisimulation(A.structure, B.structure, Dialect::ALCIO, sigma);
    if (!rel.relates(A.point, B.point))
        throw std::invalid_argument("bisim_product: points are not bisimilar");

    std::map<std::pair<ElementId, ElementId>, int> id;
    PointedStructure out;
    int next = 0;
    for (const auto& p : rel.pairs) {
        id[p] = next;
        out.structure.add_element(next);
        ++next;
    }
    out.point = id.at({A.point, B.point});

    auto add_concepts = [&](const Structure& src, bool left, const std::set<std::string>& names) {
        for (const auto& name : names) {
            for (const auto& [p, pid] : id) {
                ElementId e = left ? p.first : p.second;
                if (src.in_concept(name, e)) out.structure.add_concept(name, pid);
            }
        }
    };
    add_concepts(A.structure, true, sigma.concept_names);
    {
        std::set<std::string> priv_a, priv_b;
        for (const auto& n : sig_a.concept_names)
            if (!sigma.contains_concept(n)) priv_a.insert(n);
        for (const auto& n : sig_b.concept_names)
            if (!sigma.contains_concept(n)) priv_b.insert(n);
        add_concepts(A.structure, true, priv_a);
        add_concepts(B.structure, false, priv_b);
    }

    for (const auto& [p1, i1] : id)
        for (const auto& [p2, i2] : id) {
            for (const auto& r : sigma.role_names)
                if (A.structure.has_edge(r, p1.first, p2.first) &&
                    B.structure.has_edge(r, p1.second, p2.second))
                    out.structure.add_edge(r, i1, i2);
            for (const auto& r : sig_a.role_names)
                if (!sigma.contains_role(r) && A.structure.has_edge(r, p1.first, p2.first))
                    out.structure.add_edge(r, i1, i2);
            for (const auto& r : sig_b.role_names)
                if (!sigma.contains_role(r) && B.structure.has_edge(r, p1.second, p2.second))
                    out.structure.add_edge(r, i1, i2);
        }

    for (const auto& c : sigma.individual_names) {
        auto ia = A.structure.anchors.find(c);
        auto ib = B.structure.anchors.find(c);
        if (ia == A.structure.anchors.end() || ib == B.structure.anchors.end()) continue;
        auto it = id.find({ia->second, ib->second});
        if (it == id.end())
            throw std::invalid_argument("bisim_product: sigma individual " + c +
                                        " not bisimilar across factors");
        out.structure.set_anchor(c, it->second);
    }
    return out;
}

} // namespace dlsep
