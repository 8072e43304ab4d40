#include "dlsep/automata.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace dlsep {

std::string TreeLabel::to_string() const {
    if (blank) return "o";
    std::ostringstream os;
    os << "(" << role.to_string() << ",{";
    for (const auto& m : members) os << m << " ";
    os << "},{";
    for (const auto& [r, a] : flags) os << r << ">" << a << " ";
    os << "})";
    return os.str();
}

bool LabelUniverse::admits(const TreeLabel& l) const {
    if (l.blank) return true;
    if (std::find(roles.begin(), roles.end(), l.role) == roles.end()) return false;
    for (const auto& m : l.members)
        if (std::find(member_universe.begin(), member_universe.end(), m) ==
            member_universe.end())
            return false;
    for (const auto& f : l.flags)
        if (std::find(flag_universe.begin(), flag_universe.end(), f) == flag_universe.end())
            return false;
    return true;
}

std::vector<TreeLabel> LabelUniverse::enumerate(size_t cap) const {
    size_t count = 1;
    count += roles.size() << (member_universe.size() + flag_universe.size());
    if (member_universe.size() + flag_universe.size() > 30 || count > cap)
        throw std::runtime_error("label universe too large to enumerate");
    std::vector<TreeLabel> out;
    out.push_back(TreeLabel::blank_label());
    for (const auto& r : roles) {
        for (size_t mb = 0; mb < (size_t{1} << member_universe.size()); ++mb) {
            std::set<std::string> members;
            for (size_t i = 0; i < member_universe.size(); ++i)
                if ((mb >> i) & 1) members.insert(member_universe[i]);
            for (size_t fb = 0; fb < (size_t{1} << flag_universe.size()); ++fb) {
                std::set<std::pair<std::string, std::string>> flags;
                for (size_t i = 0; i < flag_universe.size(); ++i)
                    if ((fb >> i) & 1) flags.insert(flag_universe[i]);
                out.push_back(TreeLabel::node(r, members, flags));
            }
        }
    }
    return out;
}

TransitionFormula TransitionFormula::make(Node n) {
    return TransitionFormula(std::make_shared<const Node>(std::move(n)));
}
TransitionFormula TransitionFormula::tt() { return make({Kind::True, -1, -1, {}}); }
TransitionFormula TransitionFormula::ff() { return make({Kind::False, -1, -1, {}}); }
TransitionFormula TransitionFormula::stay(int q) { return make({Kind::Stay, q, -1, {}}); }
TransitionFormula TransitionFormula::up_strict(int q) { return make({Kind::UpStrict, q, -1, {}}); }
TransitionFormula TransitionFormula::up_weak(int q) { return make({Kind::UpWeak, q, -1, {}}); }
TransitionFormula TransitionFormula::some_child(int q) { return make({Kind::SomeChild, q, -1, {}}); }
TransitionFormula TransitionFormula::all_children(int q) {
    return make({Kind::AllChildren, q, -1, {}});
}
TransitionFormula TransitionFormula::child_strict(int dir, int q) {
    return make({Kind::ChildStrict, q, dir, {}});
}
TransitionFormula TransitionFormula::child_weak(int dir, int q) {
    return make({Kind::ChildWeak, q, dir, {}});
}
TransitionFormula TransitionFormula::conj(std::vector<TransitionFormula> parts) {
    for (const auto& p : parts)
        if (p.kind() == Kind::False) return ff();
    std::vector<TransitionFormula> keep;
    for (auto& p : parts)
        if (p.kind() != Kind::True) keep.push_back(std::move(p));
    if (keep.empty()) return tt();
    if (keep.size() == 1) return keep[0];
    return make({Kind::And, -1, -1, std::move(keep)});
}
TransitionFormula TransitionFormula::disj(std::vector<TransitionFormula> parts) {
    for (const auto& p : parts)
        if (p.kind() == Kind::True) return tt();
    std::vector<TransitionFormula> keep;
    for (auto& p : parts)
        if (p.kind() != Kind::False) keep.push_back(std::move(p));
    if (keep.empty()) return ff();
    if (keep.size() == 1) return keep[0];
    return make({Kind::Or, -1, -1, std::move(keep)});
}

TransitionFormula TransitionFormula::dual() const {
    switch (kind()) {
        case Kind::True: return ff();
        case Kind::False: return tt();
        case Kind::Stay: return stay(state());
        case Kind::UpStrict: return up_weak(state());
        case Kind::UpWeak: return up_strict(state());
        case Kind::SomeChild: return all_children(state());
        case Kind::AllChildren: return some_child(state());
        case Kind::ChildStrict: return child_weak(dir(), state());
        case Kind::ChildWeak: return child_strict(dir(), state());
        case Kind::And:
        case Kind::Or: {
            std::vector<TransitionFormula> parts;
            for (size_t i = 0; i < arity(); ++i) parts.push_back(part(i).dual());
            return kind() == Kind::And ? disj(std::move(parts)) : conj(std::move(parts));
        }
    }
    return tt();
}

void TransitionFormula::collect_states(std::set<int>& out) const {
    if (state() >= 0) out.insert(state());
    for (size_t i = 0; i < arity(); ++i) part(i).collect_states(out);
}

bool TransitionFormula::uses_up_moves() const {
    if (kind() == Kind::UpStrict || kind() == Kind::UpWeak) return true;
    for (size_t i = 0; i < arity(); ++i)
        if (part(i).uses_up_moves()) return true;
    return false;
}

std::string TransitionFormula::to_string() const {
    std::ostringstream os;
    switch (kind()) {
        case Kind::True: return "true";
        case Kind::False: return "false";
        case Kind::Stay: os << "q" << state(); break;
        case Kind::UpStrict: os << "<->q" << state(); break;
        case Kind::UpWeak: os << "[-]q" << state(); break;
        case Kind::SomeChild: os << "<>q" << state(); break;
        case Kind::AllChildren: os << "[]q" << state(); break;
        case Kind::ChildStrict: os << "<" << dir() << ">q" << state(); break;
        case Kind::ChildWeak: os << "[" << dir() << "]q" << state(); break;
        case Kind::And:
        case Kind::Or:
            os << "(";
            for (size_t i = 0; i < arity(); ++i)
                os << (i ? (kind() == Kind::And ? " & " : " | ") : "") << part(i).to_string();
            os << ")";
            break;
    }
    return os.str();
}

int TwoATA::max_priority() const {
    int m = 0;
    for (int p : priority) m = std::max(m, p);
    return m;
}

bool TwoATA::uses_up_moves() const {
    if (declared_up_moves) return *declared_up_moves;
    if (up_moves_cache) return *up_moves_cache;
    bool found = false;
    auto labels = alphabet.enumerate();
    for (int q = 0; q < num_states && !found; ++q)
        for (const auto& l : labels)
            if (delta(q, l).uses_up_moves()) {
                found = true;
                break;
            }
    up_moves_cache = found;
    return found;
}

bool RegularTree::is_finite_tree() const {
    std::vector<int> indeg(vertices.size(), 0);
    for (const auto& v : vertices) {
        if (v.left >= 0) indeg[v.left]++;
        if (v.right >= 0) indeg[v.right]++;
    }
    if (indeg[root] != 0) return false;
    for (size_t i = 0; i < vertices.size(); ++i)
        if (static_cast<int>(i) != root && indeg[i] > 1) return false;
    // Acyclic by unique-parent + root-reachability.
    std::vector<int> mark(vertices.size(), 0);
    std::function<bool(int)> dfs = [&](int v) -> bool {
        if (v < 0) return true;
        if (mark[v] == 1) return false;
        if (mark[v] == 2) return true;
        mark[v] = 1;
        if (!dfs(vertices[v].left) || !dfs(vertices[v].right)) return false;
        mark[v] = 2;
        return true;
    };
    return dfs(root);
}

std::string RegularTree::to_json() const {
    nlohmann::ordered_json j;
    j["root"] = root;
    nlohmann::ordered_json vs = nlohmann::ordered_json::array();
    for (const auto& v : vertices) {
        nlohmann::ordered_json jv;
        if (v.label.blank) {
            jv["label"] = "blank";
        } else {
            jv["label"] = nlohmann::ordered_json::object();
            jv["label"]["role"] = v.label.role.to_string();
            jv["label"]["members"] = v.label.members;
            nlohmann::ordered_json fl = nlohmann::ordered_json::array();
            for (const auto& [r, a] : v.label.flags) fl.push_back({r, a});
            jv["label"]["flags"] = fl;
        }
        jv["left"] = v.left;
        jv["right"] = v.right;
        vs.push_back(jv);
    }
    j["vertices"] = vs;
    return j.dump(2);
}

RegularTree RegularTree::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    RegularTree t;
    t.root = j.at("root").get<int>();
    for (const auto& jv : j.at("vertices")) {
        Vertex v;
        if (jv.at("label").is_string()) {
            v.label = TreeLabel::blank_label();
        } else {
            std::string role = jv.at("label").at("role").get<std::string>();
            bool inv = role.rfind("inv(", 0) == 0;
            if (inv) role = role.substr(4, role.size() - 5);
            std::set<std::string> members;
            for (const auto& m : jv.at("label").at("members")) members.insert(m.get<std::string>());
            std::set<std::pair<std::string, std::string>> flags;
            for (const auto& f : jv.at("label").at("flags"))
                flags.insert({f.at(0).get<std::string>(), f.at(1).get<std::string>()});
            v.label = TreeLabel::node(Role(role, inv), members, flags);
        }
        v.left = jv.at("left").get<int>();
        v.right = jv.at("right").get<int>();
        t.vertices.push_back(v);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Zielonka.

namespace {

// Attractor of `target` for player `automaton` within `alive`; fills strategy
// for attracted nodes of the attracting player.
std::vector<bool> attractor(const ParityGame& g, const std::vector<bool>& alive,
                            const std::vector<bool>& target, bool for_automaton,
                            std::vector<int>& strategy) {
    size_t n = g.nodes.size();
    std::vector<bool> in(n, false);
    std::vector<int> pending(n, 0);
    std::vector<int> queue;
    for (size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        if (target[v]) {
            in[v] = true;
            queue.push_back(static_cast<int>(v));
        }
        int cnt = 0;
        for (int s : g.nodes[v].succ)
            if (alive[s]) cnt++;
        pending[v] = cnt;
    }
    // Reverse edges.
    std::vector<std::vector<int>> pred(n);
    for (size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        for (int s : g.nodes[v].succ)
            if (alive[s]) pred[s].push_back(static_cast<int>(v));
    }
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        for (int p : pred[v]) {
            if (in[p]) continue;
            bool p_owner_is_attractor = g.nodes[p].automaton_owns == for_automaton;
            if (p_owner_is_attractor) {
                in[p] = true;
                if (strategy[p] < 0) strategy[p] = v;
                queue.push_back(p);
            } else {
                if (--pending[p] == 0) {
                    in[p] = true;
                    queue.push_back(p);
                }
            }
        }
    }
    return in;
}

void zielonka(const ParityGame& g, std::vector<bool> alive, std::vector<bool>& wins_automaton,
              std::vector<int>& strategy) {
    int max_p = -1;
    for (size_t v = 0; v < alive.size(); ++v)
        if (alive[v]) max_p = std::max(max_p, g.nodes[v].priority);
    if (max_p < 0) return;

    bool automaton_plays = (max_p % 2 == 0);
    std::vector<bool> top(alive.size(), false);
    for (size_t v = 0; v < alive.size(); ++v)
        if (alive[v] && g.nodes[v].priority == max_p) top[v] = true;

    std::vector<int> attr_strategy(alive.size(), -1);
    auto a = attractor(g, alive, top, automaton_plays, attr_strategy);

    std::vector<bool> rest = alive;
    for (size_t v = 0; v < alive.size(); ++v)
        if (a[v]) rest[v] = false;

    std::vector<bool> sub_wins(alive.size(), false);
    std::vector<int> sub_strategy(alive.size(), -1);
    zielonka(g, rest, sub_wins, sub_strategy);

    // Does the opponent win anything in the subgame?
    bool opponent_wins_some = false;
    for (size_t v = 0; v < alive.size(); ++v)
        if (rest[v] && (sub_wins[v] != automaton_plays)) opponent_wins_some = true;

    if (!opponent_wins_some) {
        for (size_t v = 0; v < alive.size(); ++v) {
            if (!alive[v]) continue;
            wins_automaton[v] = automaton_plays;
            if (g.nodes[v].automaton_owns == automaton_plays) {
                if (rest[v] && sub_strategy[v] >= 0) {
                    strategy[v] = sub_strategy[v];
                } else if (attr_strategy[v] >= 0) {
                    strategy[v] = attr_strategy[v];
                } else {
                    // Top-priority node of the winner: any successor that stays alive.
                    for (int s : g.nodes[v].succ)
                        if (alive[s]) {
                            strategy[v] = s;
                            break;
                        }
                }
            }
        }
        return;
    }

    // Opponent wins part of the subgame; attract to it and recurse.
    std::vector<bool> opp_region(alive.size(), false);
    for (size_t v = 0; v < alive.size(); ++v)
        if (rest[v] && (sub_wins[v] != automaton_plays)) opp_region[v] = true;
    std::vector<int> opp_attr_strategy(alive.size(), -1);
    auto b = attractor(g, alive, opp_region, !automaton_plays, opp_attr_strategy);

    std::vector<bool> remaining = alive;
    for (size_t v = 0; v < alive.size(); ++v)
        if (b[v]) remaining[v] = false;

    std::vector<bool> rec_wins(alive.size(), false);
    std::vector<int> rec_strategy(alive.size(), -1);
    zielonka(g, remaining, rec_wins, rec_strategy);

    for (size_t v = 0; v < alive.size(); ++v) {
        if (!alive[v]) continue;
        if (b[v]) {
            wins_automaton[v] = !automaton_plays;  // opponent of `automaton_plays`... see below
            // b is won by the opponent of automaton_plays.
            wins_automaton[v] = automaton_plays ? false : true;
            if (g.nodes[v].automaton_owns == wins_automaton[v]) {
                if (opp_region[v] && sub_strategy[v] >= 0)
                    strategy[v] = sub_strategy[v];
                else if (opp_attr_strategy[v] >= 0)
                    strategy[v] = opp_attr_strategy[v];
                else
                    for (int s : g.nodes[v].succ)
                        if (alive[s] && b[s]) {
                            strategy[v] = s;
                            break;
                        }
            }
        } else if (remaining[v]) {
            wins_automaton[v] = rec_wins[v];
            if (rec_strategy[v] >= 0 && strategy[v] < 0) strategy[v] = rec_strategy[v];
        }
    }
}

} // namespace

ParityGame::Solution ParityGame::solve() const {
    // Dead ends lose for their owner: rewire through sinks.
    ParityGame g = *this;
    size_t base = g.nodes.size();
    // sink winning for automaton (even self-loop) and for pathfinder (odd).
    g.nodes.push_back({false, 0, {static_cast<int>(base)}});      // automaton wins
    g.nodes.push_back({true, 1, {static_cast<int>(base + 1)}});   // pathfinder wins
    for (size_t v = 0; v < base; ++v) {
        if (!g.nodes[v].succ.empty()) continue;
        g.nodes[v].succ.push_back(
            static_cast<int>(g.nodes[v].automaton_owns ? base + 1 : base));
    }
    std::vector<bool> alive(g.nodes.size(), true);
    std::vector<bool> wins(g.nodes.size(), false);
    std::vector<int> strategy(g.nodes.size(), -1);
    zielonka(g, alive, wins, strategy);
    Solution s;
    s.automaton_wins.assign(wins.begin(), wins.begin() + base);
    s.strategy.assign(strategy.begin(), strategy.begin() + base);
    for (size_t v = 0; v < base; ++v)
        if (s.strategy[v] >= static_cast<int>(base)) s.strategy[v] = -1;
    return s;
}

// ---------------------------------------------------------------------------
// Membership.

namespace {

struct AcceptGame {
    const TwoATA& a;
    const RegularTree& t;
    std::vector<int> parent;  // -2 unknown/多parent, -1 root
    bool parents_ok;

    ParityGame game;
    std::map<std::pair<int, int>, int> state_nodes;  // (q, v) -> node
    // Formula bookkeeping: each expanded formula gets its own node.
    std::vector<std::pair<TransitionFormula, int>> pending;  // formula + vertex

    int state_node(int q, int v) {
        auto it = state_nodes.find({q, v});
        if (it != state_nodes.end()) return it->second;
        int id = static_cast<int>(game.nodes.size());
        game.nodes.push_back({true, a.priority[q], {}});
        state_nodes[{q, v}] = id;
        TransitionFormula f = a.delta(q, t.vertices[v].label);
        int fn = formula_node(f, v);
        game.nodes[id].succ.push_back(fn);
        return id;
    }

    int formula_node(const TransitionFormula& f, int v) {
        using K = TransitionFormula::Kind;
        switch (f.kind()) {
            case K::True: {
                int id = static_cast<int>(game.nodes.size());
                game.nodes.push_back({false, 0, {}});  // pathfinder stuck: win
                return id;
            }
            case K::False: {
                int id = static_cast<int>(game.nodes.size());
                game.nodes.push_back({true, 0, {}});  // automaton stuck: loss
                return id;
            }
            case K::Stay: return state_node(f.state(), v);
            case K::UpStrict:
            case K::UpWeak: {
                if (!parents_ok)
                    throw std::runtime_error(
                        "membership with up-moves requires a finite tree-shaped input");
                int p = parent[v];
                if (p < 0) return formula_node(f.kind() == K::UpWeak ? TransitionFormula::tt()
                                                                     : TransitionFormula::ff(),
                                               v);
                return state_node(f.state(), p);
            }
            case K::SomeChild:
            case K::AllChildren: {
                int id = static_cast<int>(game.nodes.size());
                game.nodes.push_back({f.kind() == K::SomeChild, 0, {}});
                for (int c : {t.vertices[v].left, t.vertices[v].right})
                    if (c >= 0) game.nodes[id].succ.push_back(state_node(f.state(), c));
                return id;
            }
            case K::ChildStrict:
            case K::ChildWeak: {
                int c = f.dir() == 0 ? t.vertices[v].left : t.vertices[v].right;
                if (c < 0)
                    return formula_node(f.kind() == K::ChildWeak ? TransitionFormula::tt()
                                                                 : TransitionFormula::ff(),
                                        v);
                return state_node(f.state(), c);
            }
            case K::And:
            case K::Or: {
                int id = static_cast<int>(game.nodes.size());
                game.nodes.push_back({f.kind() == K::Or, 0, {}});
                for (size_t i = 0; i < f.arity(); ++i) {
                    int c = formula_node(f.part(i), v);
                    game.nodes[id].succ.push_back(c);
                }
                return id;
            }
        }
        return -1;
    }
};

} // namespace

bool accepts(const TwoATA& a, const RegularTree& t) {
    for (const auto& v : t.vertices)
        if (!a.alphabet.admits(v.label))
            throw std::invalid_argument("tree label outside the automaton alphabet: " +
                                        v.label.to_string());
    AcceptGame ag{a, t, {}, t.is_finite_tree(), {}, {}, {}};
    if (ag.parents_ok) {
        ag.parent.assign(t.vertices.size(), -1);
        for (size_t v = 0; v < t.vertices.size(); ++v) {
            if (t.vertices[v].left >= 0) ag.parent[t.vertices[v].left] = static_cast<int>(v);
            if (t.vertices[v].right >= 0) ag.parent[t.vertices[v].right] = static_cast<int>(v);
        }
        ag.parent[t.root] = -1;
    }
    int init = ag.state_node(a.initial, t.root);
    auto sol = ag.game.solve();
    return sol.automaton_wins[init];
}

// ---------------------------------------------------------------------------
// Boolean operations.

TwoATA complement(const TwoATA& a) {
    TwoATA out;
    out.num_states = a.num_states;
    out.initial = a.initial;
    out.alphabet = a.alphabet;
    out.priority.resize(a.num_states);
    int min_p = 1 << 30;
    for (int q = 0; q < a.num_states; ++q) {
        out.priority[q] = a.priority[q] + 1;
        min_p = std::min(min_p, out.priority[q]);
    }
    int shift = (min_p / 2) * 2;
    for (auto& p : out.priority) p -= shift;
    auto delta = a.delta;
    out.delta = [delta](int q, const TreeLabel& l) { return delta(q, l).dual(); };
    out.note = "comp(" + a.note + ")";
    out.declared_up_moves = a.declared_up_moves;
    return out;
}

TwoATA intersect_all(const std::vector<TwoATA>& as) {
    if (as.empty()) throw std::invalid_argument("intersect_all: empty list");
    for (size_t i = 1; i < as.size(); ++i)
        if (!(as[i].alphabet == as[0].alphabet))
            throw std::invalid_argument("intersect: alphabet mismatch");
    TwoATA out;
    out.alphabet = as[0].alphabet;
    out.initial = 0;
    out.num_states = 1;
    out.priority.push_back(0);
    std::vector<int> offset;
    for (const auto& a : as) {
        offset.push_back(out.num_states);
        out.num_states += a.num_states;
        for (int q = 0; q < a.num_states; ++q) out.priority.push_back(a.priority[q]);
    }
    auto comps = std::make_shared<std::vector<TwoATA>>(as);
    auto offs = std::make_shared<std::vector<int>>(offset);
    out.delta = [comps, offs](int q, const TreeLabel& l) -> TransitionFormula {
        std::function<TransitionFormula(const TransitionFormula&, int)> shift =
            [&](const TransitionFormula& f, int off) -> TransitionFormula {
            using K = TransitionFormula::Kind;
            switch (f.kind()) {
                case K::True: return TransitionFormula::tt();
                case K::False: return TransitionFormula::ff();
                case K::Stay: return TransitionFormula::stay(f.state() + off);
                case K::UpStrict: return TransitionFormula::up_strict(f.state() + off);
                case K::UpWeak: return TransitionFormula::up_weak(f.state() + off);
                case K::SomeChild: return TransitionFormula::some_child(f.state() + off);
                case K::AllChildren: return TransitionFormula::all_children(f.state() + off);
                case K::ChildStrict:
                    return TransitionFormula::child_strict(f.dir(), f.state() + off);
                case K::ChildWeak: return TransitionFormula::child_weak(f.dir(), f.state() + off);
                case K::And:
                case K::Or: {
                    std::vector<TransitionFormula> parts;
                    for (size_t i = 0; i < f.arity(); ++i) parts.push_back(shift(f.part(i), off));
                    return f.kind() == K::And ? TransitionFormula::conj(std::move(parts))
                                              : TransitionFormula::disj(std::move(parts));
                }
            }
            return TransitionFormula::tt();
        };
        if (q == 0) {
            std::vector<TransitionFormula> parts;
            for (size_t i = 0; i < comps->size(); ++i)
                parts.push_back(shift((*comps)[i].delta((*comps)[i].initial, l), (*offs)[i]));
            return TransitionFormula::conj(std::move(parts));
        }
        for (size_t i = comps->size(); i-- > 0;) {
            if (q >= (*offs)[i]) return shift((*comps)[i].delta(q - (*offs)[i], l), (*offs)[i]);
        }
        return TransitionFormula::ff();
    };
    out.note = "intersection";
    bool any_up = false, all_known = true;
    for (const auto& a : as) {
        if (!a.declared_up_moves) all_known = false;
        else any_up = any_up || *a.declared_up_moves;
    }
    if (all_known) out.declared_up_moves = any_up;
    return out;
}

TwoATA intersect(const TwoATA& a, const TwoATA& b) { return intersect_all({a, b}); }

// ---------------------------------------------------------------------------
// Emptiness: Buechi set-game with a Miyano-Hayashi style breakpoint.

namespace {

struct Atom {
    TransitionFormula::Kind kind;
    int dir;
    int state;
    auto operator<=>(const Atom&) const = default;
};

// Minimal satisfying atom sets of a positive transition formula.
void minimal_models(const TransitionFormula& f, std::vector<std::set<Atom>>& out) {
    using K = TransitionFormula::Kind;
    switch (f.kind()) {
        case K::True: out.push_back({}); return;
        case K::False: return;
        case K::And: {
            std::vector<std::set<Atom>> acc{{}};
            for (size_t i = 0; i < f.arity(); ++i) {
                std::vector<std::set<Atom>> part;
                minimal_models(f.part(i), part);
                std::vector<std::set<Atom>> next;
                for (const auto& x : acc)
                    for (const auto& y : part) {
                        auto z = x;
                        z.insert(y.begin(), y.end());
                        next.push_back(std::move(z));
                        if (next.size() > 4096)
                            throw EmptinessUnsupported("transition formula too branching");
                    }
                acc = std::move(next);
            }
            for (auto& m : acc) out.push_back(std::move(m));
            return;
        }
        case K::Or: {
            for (size_t i = 0; i < f.arity(); ++i) minimal_models(f.part(i), out);
            return;
        }
        default: out.push_back({Atom{f.kind(), f.dir(), f.state()}}); return;
    }
}

struct Thread {
    int state;
    bool owing;
    auto operator<=>(const Thread&) const = default;
};

using Position = std::vector<Thread>;  // sorted, deduped

Position normalize(std::map<int, bool>& threads) {
    Position p;
    for (auto& [q, owe] : threads) p.push_back({q, owe});
    return p;
}

struct EmptinessGame {
    const TwoATA& a;
    std::vector<TreeLabel> labels;

    ParityGame game;
    std::map<Position, int> pos_ids;
    // Move metadata for witness extraction.
    struct Move {
        TreeLabel label;
        int arity;           // 0, 1 (left only), 2
        int succ_left = -1;  // game node ids of the successor positions
        int succ_right = -1;
    };
    std::map<int, Move> move_info;
    long budget = 6'000'000;

    void tick(long cost = 1) {
        budget -= cost;
        if (budget < 0) throw EmptinessUnsupported("emptiness search budget exceeded");
    }

    static bool accepting(const Position& p) {
        for (const auto& th : p)
            if (th.owing) return false;
        return true;
    }

    int pos_node(const Position& p) {
        auto it = pos_ids.find(p);
        if (it != pos_ids.end()) return it->second;
        int id = static_cast<int>(game.nodes.size());
        // An exhausted position (all obligations discharged) is a win: the
        // pathfinder is stuck there.
        game.nodes.push_back({!p.empty(), accepting(p) ? 2 : 1, {}});
        pos_ids[p] = id;
        if (!p.empty()) expand(p, id);
        return id;
    }

    void expand(const Position& p, int id) {
        bool at_breakpoint = accepting(p);
        std::set<std::tuple<Position, Position, int>> emitted;
        for (const auto& label : labels) {
            for (int arity = 0; arity <= 2; ++arity) {
                // Threads to resolve at this node; owing is reset at breakpoints.
                std::vector<std::pair<int, bool>> work;
                for (const auto& th : p) {
                    bool owe = (at_breakpoint ? true : th.owing) && a.priority[th.state] == 1;
                    work.push_back({th.state, owe});
                }
                resolve(id, label, arity, {}, {}, std::move(work), emitted);
            }
        }
    }

    // Recursively resolves threads at the current node: picks a minimal
    // satisfying assignment per state (shared by all threads at that state),
    // closes Stay atoms, and finally distributes child atoms. `closure` maps
    // resolved states to their owing-tracking flag.
    void resolve(int id, const TreeLabel& label, int arity, std::map<int, bool> closure,
                 std::map<int, std::set<Atom>> chosen, std::vector<std::pair<int, bool>> work,
                 std::set<std::tuple<Position, Position, int>>& emitted) {
        tick();
        while (!work.empty()) {
            auto [q, owe] = work.back();
            work.pop_back();
            auto it = closure.find(q);
            if (it != closure.end()) {
                if (owe && !it->second) {
                    it->second = true;
                    for (const Atom& at : chosen.at(q))
                        if (at.kind == TransitionFormula::Kind::Stay)
                            work.push_back({at.state, a.priority[at.state] == 1});
                }
                continue;
            }
            auto ch = chosen.find(q);
            if (ch == chosen.end()) {
                std::vector<std::set<Atom>> opts;
                minimal_models(a.delta(q, label), opts);
                work.push_back({q, owe});
                for (const auto& opt : opts) {
                    auto chosen2 = chosen;
                    chosen2[q] = opt;
                    resolve(id, label, arity, closure, std::move(chosen2), work, emitted);
                }
                return;
            }
            closure[q] = owe;
            for (const Atom& at : ch->second)
                if (at.kind == TransitionFormula::Kind::Stay)
                    work.push_back({at.state, owe && a.priority[at.state] == 1});
        }

        // Reject assignments whose stay-cycles have odd maximal priority: such
        // a run would contain a rejecting trace parked at this node forever.
        std::map<int, std::vector<int>> stay_succ;
        for (const auto& [q, owe] : closure)
            for (const Atom& at : chosen.at(q))
                if (at.kind == TransitionFormula::Kind::Stay) stay_succ[q].push_back(at.state);
        std::vector<int> path;
        std::map<int, int> color;
        std::function<bool(int)> dfs = [&](int q) -> bool {
            color[q] = 1;
            path.push_back(q);
            for (int r : stay_succ[q]) {
                auto pos = std::find(path.begin(), path.end(), r);
                if (pos != path.end()) {
                    int mx = 0;
                    for (auto jt = pos; jt != path.end(); ++jt)
                        mx = std::max(mx, a.priority[*jt]);
                    if (mx % 2 == 1) return false;
                } else if (color[r] != 2) {
                    if (!dfs(r)) return false;
                }
            }
            path.pop_back();
            color[q] = 2;
            return true;
        };
        for (const auto& [q, owe] : closure)
            if (color[q] == 0 && !dfs(q)) return;

        std::vector<Atom> atoms;
        std::vector<bool> owing;
        for (const auto& [q, owe] : closure)
            for (const Atom& at : chosen.at(q)) {
                if (at.kind == TransitionFormula::Kind::Stay) continue;
                atoms.push_back(at);
                owing.push_back(owe);
            }
        distribute(id, label, arity, atoms, owing, emitted);
    }

    void distribute(int id, const TreeLabel& label, int arity, const std::vector<Atom>& atoms,
                    const std::vector<bool>& owing,
                    std::set<std::tuple<Position, Position, int>>& emitted) {
        using K = TransitionFormula::Kind;
        std::vector<size_t> choice_atoms;
        for (size_t i = 0; i < atoms.size(); ++i) {
            const Atom& at = atoms[i];
            if (at.kind == K::UpStrict || at.kind == K::UpWeak)
                throw EmptinessUnsupported("is_empty requires automata without up-moves");
            if (at.kind == K::SomeChild && arity == 0) return;
            if (at.kind == K::ChildStrict) {
                if (arity == 0) return;
                if (at.dir == 1 && arity < 2) return;
            }
            if (at.kind == K::SomeChild) choice_atoms.push_back(i);
        }
        if (choice_atoms.size() > 16) throw EmptinessUnsupported("too many child choices");

        size_t combos = size_t{1} << (arity == 2 ? choice_atoms.size() : 0);
        for (size_t mask = 0; mask < combos; ++mask) {
            tick();
            std::map<int, bool> left, right;
            auto send = [&](int dir, int q, bool owe) {
                auto& tgt = dir == 0 ? left : right;
                bool track = owe && a.priority[q] == 1;
                auto [it, fresh] = tgt.try_emplace(q, track);
                if (!fresh) it->second = it->second || track;
            };
            for (size_t i = 0; i < atoms.size(); ++i) {
                const Atom& at = atoms[i];
                switch (at.kind) {
                    case K::SomeChild: {
                        int dir = 0;
                        if (arity == 2) {
                            size_t pos = std::find(choice_atoms.begin(), choice_atoms.end(), i) -
                                         choice_atoms.begin();
                            dir = (mask >> pos) & 1;
                        }
                        send(dir, at.state, owing[i]);
                        break;
                    }
                    case K::AllChildren:
                        if (arity >= 1) send(0, at.state, owing[i]);
                        if (arity == 2) send(1, at.state, owing[i]);
                        break;
                    case K::ChildStrict: send(at.dir, at.state, owing[i]); break;
                    case K::ChildWeak:
                        if (at.dir == 0 && arity >= 1) send(0, at.state, owing[i]);
                        if (at.dir == 1 && arity == 2) send(1, at.state, owing[i]);
                        break;
                    default: break;
                }
            }
            Position pl = normalize(left), pr = normalize(right);
            if (!emitted.insert({pl, pr, arity}).second) continue;
            int move = static_cast<int>(game.nodes.size());
            game.nodes.push_back({false, 1, {}});
            Move mv;
            mv.label = label;
            mv.arity = arity;
            if (arity >= 1) {
                int nl = pos_node(pl);
                game.nodes[move].succ.push_back(nl);
                mv.succ_left = nl;
            }
            if (arity == 2) {
                int nr = pos_node(pr);
                game.nodes[move].succ.push_back(nr);
                mv.succ_right = nr;
            }
            move_info[move] = mv;
            game.nodes[id].succ.push_back(move);
        }
    }

    void distribute(int id, const TreeLabel& label, int arity, const std::vector<Atom>& atoms,
                    const std::vector<bool>& owing) {
        using K = TransitionFormula::Kind;
        // Check feasibility wrt arity and collect choice atoms.
        std::vector<size_t> choice_atoms;  // SomeChild atoms needing a direction
        for (size_t i = 0; i < atoms.size(); ++i) {
            const Atom& at = atoms[i];
            if (at.kind == K::UpStrict || at.kind == K::UpWeak)
                throw EmptinessUnsupported("is_empty requires automata without up-moves");
            if (at.kind == K::SomeChild && arity == 0) return;
            if (at.kind == K::ChildStrict) {
                if (arity == 0) return;
                if (at.dir == 1 && arity < 2) return;
            }
        }
        for (size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i].kind == K::SomeChild) choice_atoms.push_back(i);
        if (choice_atoms.size() > 16) throw EmptinessUnsupported("too many child choices");

        size_t combos = size_t{1} << (arity == 2 ? choice_atoms.size() : 0);
        for (size_t mask = 0; mask < combos; ++mask) {
            tick();
            std::map<int, bool> left, right;
            auto send = [&](int dir, int q, bool owe) {
                auto& tgt = dir == 0 ? left : right;
                bool track = owe && a.priority[q] == 1;
                auto [it, fresh] = tgt.try_emplace(q, track);
                if (!fresh) it->second = it->second || track;
            };
            for (size_t i = 0; i < atoms.size(); ++i) {
                const Atom& at = atoms[i];
                switch (at.kind) {
                    case K::SomeChild: {
                        int dir = 0;
                        if (arity == 2) {
                            size_t pos =
                                std::find(choice_atoms.begin(), choice_atoms.end(), i) -
                                choice_atoms.begin();
                            dir = (mask >> pos) & 1;
                        }
                        send(dir, at.state, owing[i]);
                        break;
                    }
                    case K::AllChildren:
                        if (arity >= 1) send(0, at.state, owing[i]);
                        if (arity == 2) send(1, at.state, owing[i]);
                        break;
                    case K::ChildStrict:
                        send(at.dir, at.state, owing[i]);
                        break;
                    case K::ChildWeak:
                        if (at.dir == 0 && arity >= 1) send(0, at.state, owing[i]);
                        if (at.dir == 1 && arity == 2) send(1, at.state, owing[i]);
                        break;
                    default: break;
                }
            }
            Position pl = normalize(left), pr = normalize(right);
            int move = static_cast<int>(game.nodes.size());
            game.nodes.push_back({false, 1, {}});
            Move mv;
            mv.label = label;
            mv.arity = arity;
            if (arity >= 1) {
                int nl = pos_node(pl);
                game.nodes[move].succ.push_back(nl);
                mv.succ_left = nl;
            }
            if (arity == 2) {
                int nr = pos_node(pr);
                game.nodes[move].succ.push_back(nr);
                mv.succ_right = nr;
            }
            move_info[move] = mv;
            game.nodes[id].succ.push_back(move);
        }
    }
};

} // namespace

std::optional<RegularTree> is_empty(const TwoATA& a) {
    if (a.declared_up_moves && *a.declared_up_moves)
        throw EmptinessUnsupported("is_empty requires automata without up-moves");
    for (int p : a.priority)
        if (p < 0 || p > 2)
            throw EmptinessUnsupported("is_empty supports priorities in {0,1,2} only");
    EmptinessGame eg{a, a.alphabet.enumerate(), {}, {}, {}};
    Position p0;
    p0.push_back({a.initial, a.priority[a.initial] == 1});
    int root = eg.pos_node(p0);
    auto sol = eg.game.solve();
    if (!sol.automaton_wins[root]) return std::nullopt;

    // Extract a witness tree by following the winning strategy.
    RegularTree tree;
    std::map<int, int> pos_to_vertex;
    std::function<int(int)> build = [&](int pos) -> int {
        auto it = pos_to_vertex.find(pos);
        if (it != pos_to_vertex.end()) return it->second;
        int v = static_cast<int>(tree.vertices.size());
        tree.vertices.push_back({});
        pos_to_vertex[pos] = v;
        int move = sol.strategy[pos];
        if (move < 0) {
            // Terminal win (no obligations): emit a blank leaf.
            tree.vertices[v].label = TreeLabel::blank_label();
            return v;
        }
        const auto& mv = eg.move_info.at(move);
        tree.vertices[v].label = mv.label;
        if (mv.succ_left >= 0) {
            int c = build(mv.succ_left);
            tree.vertices[v].left = c;
        }
        if (mv.succ_right >= 0) {
            int c = build(mv.succ_right);
            tree.vertices[v].right = c;
        }
        return v;
    };
    tree.root = build(root);
    return tree;
}

} // namespace dlsep
