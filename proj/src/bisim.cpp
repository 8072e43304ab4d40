#include "dlsep/bisim.hpp"

#include <algorithm>
#include <functional>

namespace dlsep {

std::vector<Role> dialect_roles(const std::set<std::string>& roles, Dialect dialect) {
    std::vector<Role> out;
    for (const auto& r : roles) {
        out.emplace_back(r);
        if (dialect_has_inverses(dialect)) out.emplace_back(r, true);
    }
    return out;
}

namespace {

bool atoms_agree(const Structure& A, const Structure& B, ElementId d, ElementId e,
                 const Signature& sigma) {
    for (const auto& a : sigma.concept_names)
        if (A.in_concept(a, d) != B.in_concept(a, e)) return false;
    return true;
}

bool nominals_agree(const Structure& A, const Structure& B, ElementId d, ElementId e,
                    const Signature& sigma) {
    for (const auto& c : sigma.individual_names) {
        auto ia = A.anchors.find(c);
        auto ib = B.anchors.find(c);
        bool da = ia != A.anchors.end() && ia->second == d;
        bool eb = ib != B.anchors.end() && ib->second == e;
        if (da != eb) return false;
    }
    return true;
}

bool local_agree(const Structure& A, const Structure& B, ElementId d, ElementId e,
                 Dialect dialect, const Signature& sigma) {
    if (!atoms_agree(A, B, d, e, sigma)) return false;
    if (dialect_has_nominals(dialect) && !nominals_agree(A, B, d, e, sigma)) return false;
    return true;
}

std::vector<Role> sigma_roles(Dialect dialect, const Signature& sigma) {
    return dialect_roles(sigma.role_names, dialect);
}

} // namespace

bool check_bisimulation(const Structure& A, const Structure& B, const BisimRelation& rel,
                        Dialect dialect, const Signature& sigma) {
    auto roles = sigma_roles(dialect, sigma);
    if (rel.functional) {
        std::map<ElementId, ElementId> f;
        for (const auto& [d, e] : rel.pairs) {
            auto it = f.find(d);
            if (it != f.end() && it->second != e) return false;
            f[d] = e;
        }
    }
    for (const auto& [d, e] : rel.pairs) {
        if (!local_agree(A, B, d, e, dialect, sigma)) return false;
        for (const auto& r : roles) {
            for (ElementId d2 : A.successors(r, d)) {
                bool ok = false;
                for (ElementId e2 : B.successors(r, e))
                    if (rel.relates(d2, e2)) {
                        ok = true;
                        break;
                    }
                if (!ok) return false;
            }
            for (ElementId e2 : B.successors(r, e)) {
                bool ok = false;
                for (ElementId d2 : A.successors(r, d))
                    if (rel.relates(d2, e2)) {
                        ok = true;
                        break;
                    }
                if (!ok) return false;
            }
        }
    }
    return true;
}

BisimRelation max_bisimulation(const Structure& A, const Structure& B, Dialect dialect,
                               const Signature& sigma) {
    auto roles = sigma_roles(dialect, sigma);
    BisimRelation rel;
    for (ElementId d : A.domain)
        for (ElementId e : B.domain)
            if (local_agree(A, B, d, e, dialect, sigma)) rel.pairs.insert({d, e});

    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = rel.pairs.begin(); it != rel.pairs.end();) {
            auto [d, e] = *it;
            bool alive = true;
            for (const auto& r : roles) {
                for (ElementId d2 : A.successors(r, d)) {
                    bool ok = false;
                    for (ElementId e2 : B.successors(r, e))
                        if (rel.relates(d2, e2)) {
                            ok = true;
                            break;
                        }
                    if (!ok) {
                        alive = false;
                        break;
                    }
                }
                if (!alive) break;
                for (ElementId e2 : B.successors(r, e)) {
                    bool ok = false;
                    for (ElementId d2 : A.successors(r, d))
                        if (rel.relates(d2, e2)) {
                            ok = true;
                            break;
                        }
                    if (!ok) {
                        alive = false;
                        break;
                    }
                }
                if (!alive) break;
            }
            if (alive) {
                ++it;
            } else {
                it = rel.pairs.erase(it);
                changed = true;
            }
        }
    }
    return rel;
}

namespace {

struct FunSearch {
    const Structure& A;
    const Structure& B;
    const std::vector<Role>& roles;
    const BisimRelation& max;
    std::map<ElementId, ElementId> f;

    bool extend(ElementId d, ElementId e) {
        auto it = f.find(d);
        if (it != f.end()) return it->second == e;
        if (!max.relates(d, e)) return false;
        f[d] = e;
        // Forth: every Sigma-successor of d needs an image that is a matching
        // successor of e. Back: every Sigma-successor of e needs a preimage
        // successor of d. Choices are explored by backtracking.
        for (const auto& r : roles) {
            for (ElementId d2 : A.successors(r, d)) {
                auto assigned = f.find(d2);
                if (assigned != f.end()) {
                    if (!B.has_edge_along(r, e, assigned->second)) {
                        f.erase(d);
                        return false;
                    }
                    continue;
                }
                bool ok = false;
                for (ElementId e2 : B.successors(r, e)) {
                    auto snapshot = f;
                    if (extend(d2, e2)) {
                        ok = true;
                        break;
                    }
                    f = std::move(snapshot);
                }
                if (!ok) {
                    f.erase(d);
                    return false;
                }
            }
            for (ElementId e2 : B.successors(r, e)) {
                bool covered = false;
                for (ElementId d2 : A.successors(r, d)) {
                    auto assigned = f.find(d2);
                    if (assigned != f.end() && assigned->second == e2) {
                        covered = true;
                        break;
                    }
                }
                if (covered) continue;
                bool ok = false;
                for (ElementId d2 : A.successors(r, d)) {
                    if (f.count(d2)) continue;
                    auto snapshot = f;
                    if (extend(d2, e2)) {
                        ok = true;
                        break;
                    }
                    f = std::move(snapshot);
                }
                if (!ok) {
                    f.erase(d);
                    return false;
                }
            }
        }
        return true;
    }
};

} // namespace

std::optional<std::map<ElementId, ElementId>> functional_bisim_exists(
    const PointedStructure& A, const PointedStructure& B, Dialect dialect,
    const Signature& sigma) {
    auto roles = sigma_roles(dialect, sigma);
    BisimRelation max = max_bisimulation(A.structure, B.structure, dialect, sigma);
    if (!max.relates(A.point, B.point)) return std::nullopt;
    FunSearch search{A.structure, B.structure, roles, max, {}};
    if (search.extend(A.point, B.point)) return search.f;
    return std::nullopt;
}

namespace {

// Backtracking homomorphism search shared by sigma_homomorphism and
// cq_hom_check. `targets(d)` filters candidate images of d.
struct HomSearch {
    const Structure& A;
    const Structure& B;
    const Signature& sigma;
    std::vector<ElementId> order;
    std::function<bool(ElementId, ElementId)> admissible;
    std::map<ElementId, ElementId> h;

    bool unary_ok(ElementId d, ElementId e) const {
        for (const auto& a : sigma.concept_names)
            if (A.in_concept(a, d) && !B.in_concept(a, e)) return false;
        return true;
    }

    bool edges_ok(ElementId d, ElementId e) const {
        for (const auto& r : sigma.role_names) {
            auto it = A.role_ext.find(r);
            if (it == A.role_ext.end()) continue;
            for (const auto& [x, y] : it->second) {
                if (x == d && h.count(y) && !B.has_edge(r, e, h.at(y))) return false;
                if (y == d && h.count(x) && !B.has_edge(r, h.at(x), e)) return false;
                if (x == d && y == d && !B.has_edge(r, e, e)) return false;
            }
        }
        return true;
    }

    bool assign(size_t i) {
        if (i == order.size()) return true;
        ElementId d = order[i];
        if (h.count(d)) return assign(i + 1);
        for (ElementId e : B.domain) {
            if (!admissible(d, e) || !unary_ok(d, e)) continue;
            h[d] = e;
            if (edges_ok(d, e) && assign(i + 1)) return true;
            h.erase(d);
        }
        return false;
    }
};

} // namespace

std::optional<std::map<ElementId, ElementId>> sigma_homomorphism(
    const Structure& A, const Structure& B, const Signature& sigma,
    std::optional<std::pair<ElementId, ElementId>> anchor) {
    HomSearch search{A, B, sigma, A.domain, [](ElementId, ElementId) { return true; }, {}};
    // Sigma-anchored individuals are forced.
    for (const auto& c : sigma.individual_names) {
        auto ia = A.anchors.find(c);
        auto ib = B.anchors.find(c);
        if (ia == A.anchors.end()) continue;
        if (ib == B.anchors.end()) return std::nullopt;
        auto it = search.h.find(ia->second);
        if (it != search.h.end() && it->second != ib->second) return std::nullopt;
        search.h[ia->second] = ib->second;
    }
    if (anchor) {
        auto it = search.h.find(anchor->first);
        if (it != search.h.end() && it->second != anchor->second) return std::nullopt;
        search.h[anchor->first] = anchor->second;
    }
    // Validate pre-assigned images before searching.
    for (const auto& [d, e] : search.h)
        if (!search.unary_ok(d, e) || !search.edges_ok(d, e)) return std::nullopt;
    if (search.assign(0)) return search.h;
    return std::nullopt;
}

bool cq_hom_check(const PointedStructure& A, const PointedStructure& B,
                  const std::set<ElementId>& subset, Dialect dialect, const Signature& sigma) {
    if (!subset.count(A.point))
        throw std::invalid_argument("cq_hom_check: point not in subset");
    BisimRelation max = max_bisimulation(A.structure, B.structure, dialect, sigma);

    // Restrict A to the subset.
    Structure Ar;
    for (ElementId e : subset) Ar.add_element(e);
    for (const auto& [name, ext] : A.structure.concept_ext)
        for (ElementId e : ext)
            if (subset.count(e)) Ar.add_concept(name, e);
    for (const auto& [name, ext] : A.structure.role_ext)
        for (const auto& [x, y] : ext)
            if (subset.count(x) && subset.count(y)) Ar.add_edge(name, x, y);
    for (const auto& [ind, e] : A.structure.anchors)
        if (subset.count(e)) Ar.set_anchor(ind, e);

    HomSearch search{Ar, B.structure, sigma, Ar.domain,
                     [&](ElementId d, ElementId e) { return max.relates(d, e); },
                     {}};
    for (const auto& c : sigma.individual_names) {
        auto ia = Ar.anchors.find(c);
        auto ib = B.structure.anchors.find(c);
        if (ia == Ar.anchors.end()) continue;
        if (ib == B.structure.anchors.end()) return false;
        search.h[ia->second] = ib->second;
    }
    auto it = search.h.find(A.point);
    if (it != search.h.end() && it->second != B.point) return false;
    search.h[A.point] = B.point;
    for (const auto& [d, e] : search.h)
        if (!search.admissible(d, e) || !search.unary_ok(d, e) || !search.edges_ok(d, e))
            return false;
    return search.assign(0);
}

} // namespace dlsep
