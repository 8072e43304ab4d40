#ifndef DLSEP_AUTOMATA_HPP
#define DLSEP_AUTOMATA_HPP

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dlsep/concepts.hpp"

namespace dlsep {

// Node label of a Theta-labeled tree: blank padding or (incoming role,
// member set, flag set).
struct TreeLabel {
    bool blank = true;
    Role role;
    std::set<std::string> members;                        // ind(D) and sig concept names
    std::set<std::pair<std::string, std::string>> flags;  // (role name, individual)

    static TreeLabel blank_label() { return TreeLabel{}; }
    static TreeLabel node(Role r, std::set<std::string> m,
                          std::set<std::pair<std::string, std::string>> f = {}) {
        return TreeLabel{false, std::move(r), std::move(m), std::move(f)};
    }
    bool has_member(const std::string& m) const { return members.count(m) > 0; }
    bool operator==(const TreeLabel&) const = default;
    auto operator<=>(const TreeLabel&) const = default;
    std::string to_string() const;
};

struct LabelUniverse {
    std::vector<Role> roles;
    std::vector<std::string> member_universe;
    std::vector<std::pair<std::string, std::string>> flag_universe;

    bool admits(const TreeLabel& l) const;
    // All labels; throws when the universe exceeds cap.
    std::vector<TreeLabel> enumerate(size_t cap = 1u << 18) const;
    bool operator==(const LabelUniverse&) const = default;
};

// Positive boolean transition conditions. Stay(q) keeps the current node,
// UpStrict/UpWeak move to the predecessor, SomeChild/AllChildren quantify over
// successors, and ChildStrict/ChildWeak address one successor by direction
// (0 = left, 1 = right).
class TransitionFormula {
  public:
    enum class Kind {
        True, False, Stay, UpStrict, UpWeak, SomeChild, AllChildren,
        ChildStrict, ChildWeak, And, Or
    };

    Kind kind() const { return node_->kind; }
    int state() const { return node_->state; }
    int dir() const { return node_->dir; }
    size_t arity() const { return node_->parts.size(); }
    const TransitionFormula& part(size_t i) const { return node_->parts[i]; }

    static TransitionFormula tt();
    static TransitionFormula ff();
    static TransitionFormula stay(int q);
    static TransitionFormula up_strict(int q);
    static TransitionFormula up_weak(int q);
    static TransitionFormula some_child(int q);
    static TransitionFormula all_children(int q);
    static TransitionFormula child_strict(int dir, int q);
    static TransitionFormula child_weak(int dir, int q);
    static TransitionFormula conj(std::vector<TransitionFormula> parts);
    static TransitionFormula disj(std::vector<TransitionFormula> parts);

    // Dualization used by complementation.
    TransitionFormula dual() const;
    // States mentioned.
    void collect_states(std::set<int>& out) const;
    bool uses_up_moves() const;
    std::string to_string() const;

  private:
    struct Node {
        Kind kind;
        int state = -1;
        int dir = -1;
        std::vector<TransitionFormula> parts;
    };
    explicit TransitionFormula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static TransitionFormula make(Node n);
    std::shared_ptr<const Node> node_;
};

// Two-way alternating parity tree automaton over binary Theta-labeled trees.
struct TwoATA {
    int num_states = 0;
    int initial = 0;
    LabelUniverse alphabet;
    std::vector<int> priority;
    std::function<TransitionFormula(int, const TreeLabel&)> delta;
    std::string note;

    int max_priority() const;
    bool uses_up_moves() const;  // scans delta over the alphabet (cached)
    mutable std::optional<bool> up_moves_cache;
    // Builders set this; boolean operations propagate it. Saves the scan.
    std::optional<bool> declared_up_moves;
};

// Finite graph presentation of a regular (possibly infinite) binary tree;
// child index -1 means the child is absent.
struct RegularTree {
    struct Vertex {
        TreeLabel label;
        int left = -1;
        int right = -1;
    };
    std::vector<Vertex> vertices;
    int root = 0;

    // True when every vertex is referenced at most once and no cycles exist,
    // i.e. the graph directly is a finite tree (unique parents).
    bool is_finite_tree() const;
    std::string to_json() const;
    static RegularTree from_json(const std::string& text);
};

// Membership via the parity game on the product. Exact for one-way automata
// on arbitrary regular trees and for all automata on finite trees; throws
// when an up-move occurs on a tree with shared vertices.
bool accepts(const TwoATA& a, const RegularTree& t);

// Complement: dual transitions, priorities shifted by one (then normalized by
// even shifts). Same state count.
TwoATA complement(const TwoATA& a);

// Intersection via a fresh initial state; state count 1 + |a| + |b|.
TwoATA intersect(const TwoATA& a, const TwoATA& b);
TwoATA intersect_all(const std::vector<TwoATA>& as);

// Emptiness for one-way automata with priorities in {0,1,2}: reduction to a
// Buechi set-game with a breakpoint construction, solved as a parity game.
// Returns a member of the language when nonempty. Throws on up-moves.
std::optional<RegularTree> is_empty(const TwoATA& a);

struct EmptinessUnsupported : std::runtime_error {
    explicit EmptinessUnsupported(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Generic parity game (used by accepts and is_empty; exposed for tests).
struct ParityGame {
    struct Node {
        bool automaton_owns = true;
        int priority = 0;
        std::vector<int> succ;
    };
    std::vector<Node> nodes;

    struct Solution {
        std::vector<bool> automaton_wins;
        std::vector<int> strategy;  // successor choice for the winner at each node
    };
    Solution solve() const;  // Zielonka
};

} // namespace dlsep

#endif
