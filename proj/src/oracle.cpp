#include "dlsep/oracle.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "dlsep/transforms.hpp"

namespace dlsep {

namespace {

struct Universe {
    std::vector<std::string> concepts, roles, individuals;
};

Universe universe_of(const Ontology& o, const Database& d,
                     const std::vector<std::string>& extra_inds) {
    Signature s = signature_of(o);
    s.merge(signature_of(d));
    for (const auto& i : extra_inds) s.individual_names.insert(i);
    Universe u;
    u.concepts.assign(s.concept_names.begin(), s.concept_names.end());
    u.roles.assign(s.role_names.begin(), s.role_names.end());
    u.individuals.assign(s.individual_names.begin(), s.individual_names.end());
    return u;
}

// Three-valued concept evaluation on a structure whose edge rows are decided
// only for sources < rows_done. Concept bits are fully decided.
struct PartialEval {
    const Structure& s;
    int rows_done;
    int n;

    int eval(const Concept& c, ElementId x) const {
        switch (c.kind()) {
            case ConceptKind::Top: return 1;
            case ConceptKind::Bot: return -1;
            case ConceptKind::Atom: return s.in_concept(c.name(), x) ? 1 : -1;
            case ConceptKind::Nominal: {
                auto it = s.anchors.find(c.name());
                return (it != s.anchors.end() && it->second == x) ? 1 : -1;
            }
            case ConceptKind::Not: return -eval(c.child(), x);
            case ConceptKind::And: {
                int l = eval(c.child(0), x);
                if (l == -1) return -1;
                int r = eval(c.child(1), x);
                if (r == -1) return -1;
                return (l == 1 && r == 1) ? 1 : 0;
            }
            case ConceptKind::Or: {
                int l = eval(c.child(0), x);
                if (l == 1) return 1;
                int r = eval(c.child(1), x);
                if (r == 1) return 1;
                return (l == -1 && r == -1) ? -1 : 0;
            }
            case ConceptKind::Exists:
            case ConceptKind::Forall: {
                if (c.role().is_universal()) return 0;  // settled by the final check
                bool is_exists = c.kind() == ConceptKind::Exists;
                bool complete;
                std::vector<ElementId> succ;
                if (!c.role().inverted()) {
                    complete = x < rows_done;
                    if (x < rows_done) succ = s.successors(Role(c.role().name()), x);
                } else {
                    complete = rows_done >= n;
                    for (ElementId y = 0; y < rows_done; ++y)
                        if (s.has_edge(c.role().name(), y, x)) succ.push_back(y);
                }
                bool some_true = false, some_false = false, some_unknown = !complete;
                for (ElementId y : succ) {
                    int v = eval(c.child(), y);
                    if (v == 1) some_true = true;
                    else if (v == -1) some_false = true;
                    else some_unknown = true;
                }
                if (is_exists) {
                    if (some_true) return 1;
                    return some_unknown ? 0 : -1;
                }
                if (some_false) return -1;
                return some_unknown ? 0 : 1;
            }
        }
        return 0;
    }
};

struct ModelEnum {
    const Ontology& o;
    const Database& d;
    const OracleConfig& cfg;
    const std::function<bool(const Structure&)>& cb;
    Universe u;
    long steps = 0;
    bool stopped = false;

    void tick() {
        if (++steps > cfg.node_budget) throw OracleBudgetExceeded();
    }

    bool violates_ci(const Structure& s, int rows_done, int n) const {
        PartialEval pe{s, rows_done, n};
        for (const auto& ci : o.inclusions)
            for (ElementId x = 0; x < n; ++x)
                if (pe.eval(ci.lhs, x) == 1 && pe.eval(ci.rhs, x) == -1) return true;
        return false;
    }

    void run() {
        // Anchor maps onto a prefix of the element ids, first-use ordered.
        std::map<std::string, ElementId> anchor;
        std::function<void(size_t, int)> anchors = [&](size_t i, int used) {
            if (stopped) return;
            tick();
            if (i == u.individuals.size()) {
                int lo = std::max(used, 1);
                for (int n = lo; n <= cfg.max_elements && !stopped; ++n)
                    with_elements(anchor, used, n);
                return;
            }
            for (int e = 0; e <= used && e < cfg.max_elements; ++e) {
                anchor[u.individuals[i]] = e;
                anchors(i + 1, std::max(used, e + 1));
            }
            anchor.erase(u.individuals[i]);
        };
        anchors(0, 0);
    }

    void with_elements(const std::map<std::string, ElementId>& anchor, int anchored, int n) {
        Structure base;
        for (int e = 0; e < n; ++e) base.add_element(e);
        for (const auto& [ind, e] : anchor) base.set_anchor(ind, e);
        // Pinned concept bits from facts.
        for (const auto& f : d.concept_facts) base.add_concept(f.concept_name, anchor.at(f.individual));
        concept_bits(base, anchored, n, 0);
    }

    void concept_bits(Structure& s, int anchored, int n, size_t slot) {
        if (stopped) return;
        tick();
        size_t total = u.concepts.size() * n;
        if (slot == total) {
            // Canonical order on free elements by label vector.
            for (ElementId e = anchored; e + 1 < n; ++e) {
                std::string a, b;
                for (const auto& c : u.concepts) {
                    a += s.in_concept(c, e) ? '1' : '0';
                    b += s.in_concept(c, e + 1) ? '1' : '0';
                }
                if (a > b) return;
            }
            Structure t = s;
            for (const auto& f : d.role_facts)
                t.add_edge(f.role_name, t.anchors.at(f.from), t.anchors.at(f.to));
            if (violates_ci(t, 0, n)) return;
            edge_rows(t, n, 0);
            return;
        }
        size_t ci = slot / n;
        ElementId e = static_cast<ElementId>(slot % n);
        if (s.in_concept(u.concepts[ci], e)) {  // pinned by a fact
            concept_bits(s, anchored, n, slot + 1);
            return;
        }
        concept_bits(s, anchored, n, slot + 1);
        s.add_concept(u.concepts[ci], e);
        concept_bits(s, anchored, n, slot + 1);
        s.concept_ext[u.concepts[ci]].erase(e);
    }

    void edge_rows(Structure& s, int n, int row) {
        if (stopped) return;
        tick();
        if (violates_ci(s, row, n)) return;
        if (row == n) {
            finish(s, n);
            return;
        }
        row_bits(s, n, row, 0);
    }

    void row_bits(Structure& s, int n, int row, size_t slot) {
        if (stopped) return;
        size_t total = u.roles.size() * n;
        if (slot == total) {
            edge_rows(s, n, row + 1);
            return;
        }
        size_t ri = slot / n;
        ElementId to = static_cast<ElementId>(slot % n);
        if (s.has_edge(u.roles[ri], row, to)) {  // pinned by a fact
            row_bits(s, n, row, slot + 1);
            return;
        }
        row_bits(s, n, row, slot + 1);
        if (stopped) return;
        s.add_edge(u.roles[ri], row, to);
        row_bits(s, n, row, slot + 1);
        s.role_ext[u.roles[ri]].erase({row, to});
    }

    void finish(Structure& s, int n) {
        // Garbage-free: every element connected (undirected) to an anchored
        // element, or to element 0 when there are no individuals.
        std::set<ElementId> seen;
        if (s.anchors.empty()) seen.insert(0);
        for (const auto& [ind, e] : s.anchors) seen.insert(e);
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& [r, ext] : s.role_ext)
                for (const auto& [x, y] : ext) {
                    if (seen.count(x) && !seen.count(y)) { seen.insert(y); grew = true; }
                    if (seen.count(y) && !seen.count(x)) { seen.insert(x); grew = true; }
                }
        }
        if (static_cast<int>(seen.size()) != n) return;
        if (!s.is_model_of(o, d)) return;
        if (!cb(s)) stopped = true;
    }
};

} // namespace

void Oracle::for_each_model(const Ontology& o, const Database& d, const OracleConfig& cfg,
                            const std::function<bool(const Structure&)>& cb) {
    ModelEnum me{o, d, cfg, cb, universe_of(o, d, cfg.extra_individuals)};
    me.run();
}

bool brute_concept_satisfiable(const Concept& c, const OracleConfig& cfg) {
    Signature s = signature_of(c);
    Ontology o;
    // Carry the concept's symbols through a tautological inclusion so the
    // enumeration universe covers them.
    o.inclusions.push_back({c, c});
    OracleConfig cfg2 = cfg;
    for (const auto& i : s.individual_names) cfg2.extra_individuals.push_back(i);
    bool found = false;
    Oracle::for_each_model(o, Database{}, cfg2, [&](const Structure& m) {
        if (!eval_concept(m, c).empty()) {
            found = true;
            return false;
        }
        return true;
    });
    return found;
}

bool Oracle::has_model(const Ontology& o, const Database& d, const OracleConfig& cfg) {
    bool found = false;
    for_each_model(o, d, cfg, [&](const Structure&) {
        found = true;
        return false;
    });
    return found;
}

namespace {

// Reachable part of (s, point) following Sigma-roles per the dialect.
std::set<ElementId> reachable_part(const Structure& s, ElementId point, Dialect dialect,
                                   const Signature& sigma) {
    std::set<ElementId> seen{point};
    bool undirected = dialect_has_inverses(dialect);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& r : sigma.role_names) {
            auto it = s.role_ext.find(r);
            if (it == s.role_ext.end()) continue;
            for (const auto& [x, y] : it->second) {
                if (seen.count(x) && !seen.count(y)) { seen.insert(y); grew = true; }
                if (undirected && seen.count(y) && !seen.count(x)) { seen.insert(x); grew = true; }
            }
        }
    }
    return seen;
}

} // namespace

std::string Oracle::collapse_canon(const Structure& s, ElementId point, Dialect dialect,
                                   const Signature& sigma) {
    auto part = reachable_part(s, point, dialect, sigma);
    // Sigma-reduct of the reachable part; Sigma anchors become unary labels.
    Structure red;
    for (ElementId e : part) red.add_element(e);
    for (const auto& a : sigma.concept_names)
        for (ElementId e : part)
            if (s.in_concept(a, e)) red.add_concept(a, e);
    if (dialect_has_nominals(dialect))
        for (const auto& c : sigma.individual_names) {
            auto it = s.anchors.find(c);
            if (it != s.anchors.end() && part.count(it->second)) {
                red.add_concept("@" + c, it->second);
                red.set_anchor(c, it->second);
            }
        }
    for (const auto& r : sigma.role_names) {
        auto it = s.role_ext.find(r);
        if (it == s.role_ext.end()) continue;
        for (const auto& [x, y] : it->second)
            if (part.count(x) && part.count(y)) red.add_edge(r, x, y);
    }

    BisimRelation self = max_bisimulation(red, red, dialect, sigma);
    // Include label-only agreement for the @-anchors (they are not in sigma).
    std::map<ElementId, int> cls;
    int next = 0;
    auto same_class = [&](ElementId a, ElementId b) {
        if (!self.relates(a, b)) return false;
        for (const auto& [name, ext] : red.concept_ext)
            if (name[0] == '@' && (ext.count(a) > 0) != (ext.count(b) > 0)) return false;
        return true;
    };
    for (ElementId e : red.domain) {
        bool placed = false;
        for (const auto& [f, c] : cls)
            if (same_class(e, f)) {
                cls[e] = c;
                placed = true;
                break;
            }
        if (!placed) cls[e] = next++;
    }

    // Quotient.
    int m = next;
    std::vector<std::set<std::string>> label_sets(m);
    for (const auto& [name, ext] : red.concept_ext)
        for (ElementId e : ext) label_sets[cls[e]].insert(name);
    std::map<std::string, std::set<std::pair<int, int>>> qedges;
    for (const auto& [r, ext] : red.role_ext)
        for (const auto& [x, y] : ext) qedges[r].insert({cls[x], cls[y]});

    // Canonical string: try all orderings with the point class first.
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    std::string best;
    std::vector<int> ids(m);
    do {
        if (perm[0] != cls[point]) continue;
        for (int i = 0; i < m; ++i) ids[perm[i]] = i;
        std::ostringstream os;
        for (int i = 0; i < m; ++i) {
            for (const auto& l : label_sets[perm[i]]) os << l << ",";
            os << ";";
        }
        for (const auto& [r, es] : qedges) {
            os << r << ":";
            std::set<std::pair<int, int>> renamed;
            for (const auto& [x, y] : es) renamed.insert({ids[x], ids[y]});
            for (const auto& [x, y] : renamed) os << x << "-" << y << ",";
            os << ";";
        }
        std::string cand = os.str();
        if (best.empty() || cand < best) best = cand;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Oracle::JointBisimResult Oracle::joint_bisimilar_models(const LabeledKB& kb, const std::string& a,
                                                        const std::string& b, Dialect dialect,
                                                        const Signature& sigma,
                                                        const OracleConfig& cfg) {
    std::map<std::string, Structure> side_a, side_b;
    JointBisimResult res;
    for_each_model(kb.ontology, kb.database, cfg, [&](const Structure& s) {
        std::string ca = collapse_canon(s, s.anchors.at(a), dialect, sigma);
        std::string cb2 = collapse_canon(s, s.anchors.at(b), dialect, sigma);
        if (ca == cb2) {
            res.found = true;
            res.model_a = s;
            res.model_b = s;
            return false;
        }
        auto hit = side_b.find(ca);
        if (hit != side_b.end()) {
            res.found = true;
            res.model_a = s;
            res.model_b = hit->second;
            return false;
        }
        hit = side_a.find(cb2);
        if (hit != side_a.end()) {
            res.found = true;
            res.model_a = hit->second;
            res.model_b = s;
            return false;
        }
        side_a.emplace(ca, s);
        side_b.emplace(cb2, s);
        return true;
    });
    if (res.found) {
        // Confirm with the bisimulation engine; the canon route and the
        // direct check must agree.
        BisimRelation rel = max_bisimulation(res.model_a, res.model_b, dialect, sigma);
        if (!rel.relates(res.model_a.anchors.at(a), res.model_b.anchors.at(b)))
            throw std::logic_error("oracle collapse/bisimulation disagreement");
    }
    return res;
}

} // namespace dlsep
