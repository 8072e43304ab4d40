#include "dlsep/automata_build.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "dlsep/bisim.hpp"
#include "dlsep/transforms.hpp"

namespace dlsep {

LabelUniverse kb_alphabet(const LabeledKB& kb) {
    LabelUniverse u;
    Signature sig = signature_of(kb);
    for (const auto& r : sig.role_names) {
        u.roles.emplace_back(r);
        if (dialect_has_inverses(kb.dialect)) u.roles.emplace_back(r, true);
    }
    for (const auto& a : kb.database.individuals()) u.member_universe.push_back(a);
    for (const auto& c : sig.concept_names) u.member_universe.push_back(c);
    for (const auto& r : sig.role_names)
        for (const auto& a : kb.database.individuals()) u.flag_universe.push_back({r, a});
    return u;
}

namespace {

using TF = TransitionFormula;

std::vector<std::string> sorted_inds(const LabeledKB& kb) {
    auto s = kb.database.individuals();
    return {s.begin(), s.end()};
}

} // namespace

TwoATA build_wellformed_automaton(const LabeledKB& kb) {
    auto inds = std::make_shared<std::vector<std::string>>(sorted_inds(kb));
    TwoATA a;
    a.alphabet = kb_alphabet(kb);
    a.note = "A0";
    // 0 init, 1 zone, then per individual i: 2+2i seek (exactly one), 3+2i zero.
    a.num_states = 2 + 2 * static_cast<int>(inds->size());
    a.initial = 0;
    a.priority.assign(a.num_states, 2);
    for (size_t i = 0; i < inds->size(); ++i) a.priority[2 + 2 * i] = 1;

    a.declared_up_moves = false;
    auto ind_set = std::make_shared<std::set<std::string>>(inds->begin(), inds->end());
    a.delta = [inds, ind_set](int q, const TreeLabel& l) -> TF {
        auto has_ind = [&](const TreeLabel& lab) {
            for (const auto& m : lab.members)
                if (ind_set->count(m)) return true;
            return false;
        };
        if (q == 0) {
            std::vector<TF> parts{TF::stay(1)};
            for (size_t i = 0; i < inds->size(); ++i)
                parts.push_back(TF::stay(2 + 2 * static_cast<int>(i)));
            return TF::conj(std::move(parts));
        }
        if (q == 1) {  // zone above the anchors
            if (l.blank) return TF::all_children(1);
            return has_ind(l) ? TF::tt() : TF::ff();
        }
        int i = (q - 2) / 2;
        bool seeking = (q - 2) % 2 == 0;
        const std::string& ind = (*inds)[i];
        int seek = 2 + 2 * i, zero = 3 + 2 * i;
        if (seeking) {
            if (!l.blank && l.has_member(ind))
                return TF::conj({TF::child_weak(0, zero), TF::child_weak(1, zero)});
            return TF::disj({TF::conj({TF::child_strict(0, seek), TF::child_weak(1, zero)}),
                             TF::conj({TF::child_weak(0, zero), TF::child_strict(1, seek)})});
        }
        if (!l.blank && l.has_member(ind)) return TF::ff();
        return TF::conj({TF::child_weak(0, zero), TF::child_weak(1, zero)});
    };
    return a;
}

// ---------------------------------------------------------------------------
// AK: forest-model recognition by guessing a type annotation top-down.

namespace {

struct AKData {
    TypeContextPtr ctx;
    LabeledKB kb;
    std::set<std::string> ind_set;
    std::set<std::string> concept_names;
    std::vector<TypeBits> anon_types;

    struct SeekDuty {
        std::string rep;
        std::set<std::string> cls;
        TypeBits type = 0;
        std::set<std::pair<std::string, std::string>> required_flags;
        std::set<std::pair<std::string, std::string>> allowed_flags;
        uint32_t rest_mask = 0;
        auto operator<=>(const SeekDuty&) const = default;
    };

    // 0 init, 1 root zone, 2 exhausted; dynamic states follow.
    int num_states = 3;
    std::vector<int> priorities{2, 2, 2};
    std::map<SeekDuty, int> seek_ids;
    std::vector<SeekDuty> seek_by_id;
    std::map<std::pair<TypeBits, uint32_t>, int> down_ids, split_ids;
    std::vector<std::pair<TypeBits, uint32_t>> down_by_id, split_by_id;
    std::vector<std::vector<int>> guesses;  // per guess: seek states

    enum class Block { Static, Seek, Down, Split };
    std::vector<std::pair<Block, int>> dispatch{
        {Block::Static, 0}, {Block::Static, 1}, {Block::Static, 2}};

    int seek_state(const SeekDuty& d) {
        auto it = seek_ids.find(d);
        if (it != seek_ids.end()) return it->second;
        int id = num_states++;
        priorities.push_back(1);
        seek_ids[d] = id;
        dispatch.push_back({Block::Seek, static_cast<int>(seek_by_id.size())});
        seek_by_id.push_back(d);
        return id;
    }
    int down_state(TypeBits t, uint32_t m) {
        auto it = down_ids.find({t, m});
        if (it != down_ids.end()) return it->second;
        int id = num_states++;
        priorities.push_back(1);
        down_ids[{t, m}] = id;
        dispatch.push_back({Block::Down, static_cast<int>(down_by_id.size())});
        down_by_id.push_back({t, m});
        return id;
    }
    int split_state(TypeBits t, uint32_t m) {
        auto it = split_ids.find({t, m});
        if (it != split_ids.end()) return it->second;
        int id = num_states++;
        priorities.push_back(2);
        split_ids[{t, m}] = id;
        dispatch.push_back({Block::Split, static_cast<int>(split_by_id.size())});
        split_by_id.push_back({t, m});
        return id;
    }

    bool atoms_match(TypeBits t, const TreeLabel& l) const {
        for (const auto& name : concept_names) {
            int idx = ctx->atom_index(Concept::atom(name));
            bool in_type = idx >= 0 && ((t >> idx) & 1);
            if (in_type != l.has_member(name)) return false;
        }
        return true;
    }

    TF down_or_exhaust(int dir, TypeBits t) const {
        return TF::disj({TF::child_weak(dir, down_ids.at({t, 0})),
                         TF::child_weak(dir, 2)});
    }

    TF split_formula(TypeBits t, uint32_t mask) const {
        auto obls = ctx->obligations(t);
        std::vector<int> pending;
        for (size_t i = 0; i < obls.size(); ++i)
            if ((mask >> i) & 1) pending.push_back(static_cast<int>(i));
        std::vector<TF> options;
        for (size_t c = 0; c < (size_t{1} << pending.size()); ++c) {
            uint32_t left = 0, right = 0;
            for (size_t j = 0; j < pending.size(); ++j)
                ((c >> j) & 1 ? right : left) |= 1u << pending[j];
            std::vector<TF> parts;
            parts.push_back(left ? TF::child_strict(0, down_ids.at({t, left}))
                                 : down_or_exhaust(0, t));
            parts.push_back(right ? TF::child_strict(1, down_ids.at({t, right}))
                                  : down_or_exhaust(1, t));
            options.push_back(TF::conj(std::move(parts)));
        }
        return TF::disj(std::move(options));
    }
};

} // namespace

TwoATA build_forest_model_automaton(const LabeledKB& kb) {
    auto d = std::make_shared<AKData>();
    d->ctx = std::make_shared<TypeContext>(kb.ontology, kb.database, std::vector<Concept>{});
    d->kb = kb;
    auto inds = sorted_inds(kb);
    d->ind_set.insert(inds.begin(), inds.end());
    d->concept_names = signature_of(kb).concept_names;

    TypeBits nom_mask = 0;
    for (int i : d->ctx->nominal_atom_indices()) nom_mask |= TypeBits{1} << i;
    d->anon_types = d->ctx->enumerate_types(nom_mask, 0);
    for (TypeBits t : d->anon_types)
        if (d->ctx->obligations(t).size() > 12)
            throw std::runtime_error("AK: too many obligations per type");

    std::map<std::string, TypeBits> fmask, fval;
    for (const auto& ind : inds) fmask[ind] = fval[ind] = 0;
    for (const auto& f : kb.database.concept_facts) {
        int idx = d->ctx->atom_index(Concept::atom(f.concept_name));
        fmask[f.individual] |= TypeBits{1} << idx;
        fval[f.individual] |= TypeBits{1} << idx;
    }
    Signature sig = signature_of(kb);

    const size_t n = inds.size();
    std::vector<int> cls(n, -1);
    long guess_budget = 200000;

    std::function<void(size_t, int)> partitions = [&](size_t i, int num) {
        if (d->guesses.size() > 2048) throw std::runtime_error("AK guess budget exceeded");
        if (i == n) {
            std::vector<std::vector<std::string>> classes(num);
            for (size_t k = 0; k < n; ++k) classes[cls[k]].push_back(inds[k]);
            std::vector<std::vector<TypeBits>> options(num);
            for (int k = 0; k < num; ++k) {
                TypeBits m = nom_mask, v = 0;
                for (const auto& ind : classes[k]) {
                    v |= TypeBits{1} << d->ctx->nominal_index(ind);
                    m |= fmask[ind];
                    v |= fval[ind];
                }
                options[k] = d->ctx->enumerate_types(m, v);
                if (options[k].empty()) return;
            }
            std::vector<TypeBits> chosen(num);
            std::function<void(int)> pick = [&](int k) {
                if (--guess_budget < 0) throw std::runtime_error("AK guess budget exceeded");
                if (k == num) {
                    std::map<std::string, int> cls_of;
                    for (int j = 0; j < num; ++j)
                        for (const auto& ind : classes[j]) cls_of[ind] = j;
                    std::vector<std::set<std::pair<std::string, std::string>>> base(num);
                    for (const auto& f : d->kb.database.role_facts) {
                        if (!d->ctx->edge_coherent(chosen[cls_of[f.from]], Role(f.role_name),
                                                   chosen[cls_of[f.to]]))
                            return;
                        base[cls_of[f.from]].insert({f.role_name, f.to});
                    }
                    std::vector<std::vector<TypeContext::Obligation>> obls(num);
                    for (int j = 0; j < num; ++j) obls[j] = d->ctx->obligations(chosen[j]);
                    std::vector<uint32_t> rest(num, 0);
                    std::vector<std::set<std::pair<std::string, std::string>>> extra(num);

                    std::function<void(int, size_t)> witness = [&](int j, size_t oi) {
                        if (--guess_budget < 0)
                            throw std::runtime_error("AK guess budget exceeded");
                        if (j == num) {
                            std::vector<int> per_class;
                            bool ok = true;
                            for (int k2 = 0; k2 < num && ok; ++k2) {
                                AKData::SeekDuty duty;
                                duty.rep = classes[k2].front();
                                duty.cls.insert(classes[k2].begin(), classes[k2].end());
                                duty.type = chosen[k2];
                                duty.required_flags = base[k2];
                                duty.required_flags.insert(extra[k2].begin(), extra[k2].end());
                                for (const auto& r : sig.role_names)
                                    for (int k3 = 0; k3 < num; ++k3)
                                        if (d->ctx->edge_coherent(chosen[k2], Role(r), chosen[k3]))
                                            for (const auto& i3 : classes[k3])
                                                duty.allowed_flags.insert({r, i3});
                                for (const auto& rf : duty.required_flags)
                                    if (!duty.allowed_flags.count(rf)) ok = false;
                                duty.rest_mask = rest[k2];
                                if (ok) per_class.push_back(d->seek_state(duty));
                            }
                            if (ok) d->guesses.push_back(per_class);
                            return;
                        }
                        if (oi == obls[j].size()) {
                            witness(j + 1, 0);
                            return;
                        }
                        const auto& ob = obls[j][oi];
                        rest[j] |= 1u << oi;
                        witness(j, oi + 1);
                        rest[j] &= ~(1u << oi);
                        if (!ob.role.inverted()) {
                            for (int k3 = 0; k3 < num; ++k3) {
                                if (!d->ctx->holds(chosen[k3], ob.filler)) continue;
                                if (!d->ctx->edge_coherent(chosen[j], ob.role, chosen[k3]))
                                    continue;
                                std::pair<std::string, std::string> fl{ob.role.name(),
                                                                       classes[k3].front()};
                                bool fresh = extra[j].insert(fl).second;
                                witness(j, oi + 1);
                                if (fresh) extra[j].erase(fl);
                            }
                        } else {
                            for (int k3 = 0; k3 < num; ++k3) {
                                if (!d->ctx->holds(chosen[k3], ob.filler)) continue;
                                if (!d->ctx->edge_coherent(chosen[k3], Role(ob.role.name()),
                                                           chosen[j]))
                                    continue;
                                std::pair<std::string, std::string> fl{ob.role.name(),
                                                                       classes[j].front()};
                                bool fresh = extra[k3].insert(fl).second;
                                witness(j, oi + 1);
                                if (fresh) extra[k3].erase(fl);
                            }
                        }
                    };
                    witness(0, 0);
                    return;
                }
                for (TypeBits t : options[k]) {
                    chosen[k] = t;
                    pick(k + 1);
                }
            };
            pick(0);
            return;
        }
        for (int k = 0; k <= num && k < static_cast<int>(n); ++k) {
            cls[i] = k;
            partitions(i + 1, std::max(num, k + 1));
        }
        cls[i] = -1;
    };
    partitions(0, 0);

    for (TypeBits t : d->anon_types) {
        auto obls = d->ctx->obligations(t);
        for (uint32_t m = 0; m < (1u << obls.size()); ++m) {
            d->down_state(t, m);
            d->split_state(t, m);
        }
    }
    for (const auto& [duty, id] : d->seek_ids) d->split_state(duty.type, duty.rest_mask);
    if (d->num_states > 120000) throw std::runtime_error("AK state budget exceeded");

    TwoATA a;
    a.alphabet = kb_alphabet(kb);
    a.note = "AK";
    a.num_states = d->num_states;
    a.initial = 0;
    a.priority = d->priorities;
    a.declared_up_moves = false;

    a.delta = [d](int q, const TreeLabel& l) -> TF {
        const auto& ctx = *d->ctx;
        switch (d->dispatch[q].first) {
            case AKData::Block::Static: {
                if (q == 0) {
                    std::vector<TF> options;
                    for (const auto& g : d->guesses) {
                        std::vector<TF> parts{TF::stay(1)};
                        for (int s : g) parts.push_back(TF::stay(s));
                        options.push_back(TF::conj(std::move(parts)));
                    }
                    return TF::disj(std::move(options));
                }
                if (q == 1) {
                    if (l.blank) return TF::all_children(1);
                    for (const auto& m : l.members)
                        if (d->ind_set.count(m)) return TF::tt();
                    return TF::ff();
                }
                // q == 2: exhausted padding
                if (!l.blank) return TF::ff();
                return TF::all_children(2);
            }
            case AKData::Block::Seek: {
                const auto& duty = d->seek_by_id[d->dispatch[q].second];
                if (l.blank) return TF::disj({TF::child_strict(0, q), TF::child_strict(1, q)});
                if (!l.has_member(duty.rep)) return TF::ff();
                for (const auto& m : l.members)
                    if (d->ind_set.count(m) && !duty.cls.count(m)) return TF::ff();
                for (const auto& c2 : duty.cls)
                    if (!l.has_member(c2)) return TF::ff();
                if (!d->atoms_match(duty.type, l)) return TF::ff();
                for (const auto& rf : duty.required_flags)
                    if (!l.flags.count(rf)) return TF::ff();
                for (const auto& fl : l.flags)
                    if (!duty.allowed_flags.count(fl)) return TF::ff();
                return TF::stay(d->split_ids.at({duty.type, duty.rest_mask}));
            }
            case AKData::Block::Down: {
                auto [t, mask] = d->down_by_id[d->dispatch[q].second];
                auto obls = ctx.obligations(t);
                if (l.blank) {
                    std::vector<int> pending;
                    for (size_t i = 0; i < obls.size(); ++i)
                        if ((mask >> i) & 1) pending.push_back(static_cast<int>(i));
                    std::vector<TF> options;
                    for (size_t c = 0; c < (size_t{1} << pending.size()); ++c) {
                        uint32_t left = 0, right = 0;
                        for (size_t j = 0; j < pending.size(); ++j)
                            ((c >> j) & 1 ? right : left) |= 1u << pending[j];
                        std::vector<TF> parts;
                        parts.push_back(left ? TF::child_strict(0, d->down_ids.at({t, left}))
                                             : d->down_or_exhaust(0, t));
                        parts.push_back(right ? TF::child_strict(1, d->down_ids.at({t, right}))
                                              : d->down_or_exhaust(1, t));
                        options.push_back(TF::conj(std::move(parts)));
                    }
                    return TF::disj(std::move(options));
                }
                for (const auto& m : l.members)
                    if (d->ind_set.count(m)) return TF::ff();
                if (!l.flags.empty()) return TF::ff();
                std::vector<TF> options;
                for (TypeBits t2 : d->anon_types) {
                    if (!d->atoms_match(t2, l)) continue;
                    if (!ctx.edge_coherent(t, l.role, t2)) continue;
                    bool ok = true;
                    for (size_t i = 0; i < obls.size(); ++i) {
                        if (!((mask >> i) & 1)) continue;
                        if (!(obls[i].role == l.role) || !ctx.holds(t2, obls[i].filler)) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) continue;
                    auto obls2 = ctx.obligations(t2);
                    uint32_t mask2 = 0;
                    for (size_t i = 0; i < obls2.size(); ++i) {
                        bool parent_wit = obls2[i].role == l.role.inverse() &&
                                          ctx.holds(t, obls2[i].filler);
                        if (!parent_wit) mask2 |= 1u << i;
                    }
                    options.push_back(TF::stay(d->split_ids.at({t2, mask2})));
                }
                return TF::disj(std::move(options));
            }
            case AKData::Block::Split: {
                auto [t, mask] = d->split_by_id[d->dispatch[q].second];
                return d->split_formula(t, mask);
            }
        }
        return TF::ff();
    };
    return a;
}

// ---------------------------------------------------------------------------
// Aa: the homomorphism-with-bisimilar-types criterion, two-way.

namespace {

struct AaState {
    enum class Kind {
        Init, SinkFalse, Arrive, Walk, Bis, BisDown, BisUp, JFort, JFortSeek,
        BkDown, BkUp, JBack, JBackSeek, KFClimb, KFSweep
    };
    Kind kind = Kind::Init;
    int gid = -1;
    std::string anchor;                  // Arrive; jump target for J*; flag ind for KF*
    std::set<std::string> up, pending;   // Walk
    TypeBits s = 0;
    Role role;
    Concept filler;

    auto key() const {
        std::ostringstream os;
        os << static_cast<int>(kind) << "|" << gid << "|" << anchor << "|";
        for (const auto& x : up) os << x << ",";
        os << "|";
        for (const auto& x : pending) os << x << ",";
        os << "|" << static_cast<uint64_t>(s) << "|" << role.to_string() << "|"
           << filler.to_string();
        return os.str();
    }
};

struct AaData {
    TypeContextPtr ctx;
    LabeledKB kb;
    Signature sigma;
    Dialect dialect;
    std::vector<std::string> comp;
    std::set<std::string> comp_set;
    std::set<std::string> ind_set;
    std::vector<TypeBits> survivors;

    struct Guess {
        std::map<std::string, TypeBits> types;
        std::map<std::string, std::string> at_anchor;
        std::map<std::string, std::string> below;
        std::set<std::string> anchors() const {
            std::set<std::string> out;
            for (const auto& [e, x] : at_anchor) out.insert(x);
            for (const auto& [e, x] : below) out.insert(x);
            return out;
        }
    };
    std::vector<Guess> guesses;

    int num_states = 2;  // 0 = init, 1 = false sink (used as a root detector)
    std::vector<int> priorities{2, 2};
    std::map<std::string, int> ids;
    std::vector<AaState> by_id{{}, [] {
                                   AaState sd;
                                   sd.kind = AaState::Kind::SinkFalse;
                                   return sd;
                               }()};
    bool frozen = false;
    static constexpr int kSinkFalse = 1;

    int state(AaState sd, int prio) {
        std::string k = sd.key();
        auto it = ids.find(k);
        if (it != ids.end()) return it->second;
        if (frozen) throw std::logic_error("Aa state referenced after freeze: " + k);
        int id = num_states++;
        priorities.push_back(prio);
        ids[k] = id;
        by_id.push_back(std::move(sd));
        return id;
    }

    int bis(TypeBits s) {
        AaState sd;
        sd.kind = AaState::Kind::Bis;
        sd.s = s;
        return state(std::move(sd), 2);
    }
    int helper(AaState::Kind k, TypeBits s, Role r, Concept f, const std::string& ind,
               int prio) {
        AaState sd;
        sd.kind = k;
        sd.s = s;
        sd.role = std::move(r);
        sd.filler = std::move(f);
        sd.anchor = ind;
        return state(std::move(sd), prio);
    }
    int walk(int gid, std::set<std::string> up, std::set<std::string> pending) {
        AaState sd;
        sd.kind = AaState::Kind::Walk;
        sd.gid = gid;
        sd.up = std::move(up);
        sd.pending = std::move(pending);
        return state(std::move(sd), 1);
    }
    int arrive(int gid, const std::string& anchor) {
        AaState sd;
        sd.kind = AaState::Kind::Arrive;
        sd.gid = gid;
        sd.anchor = anchor;
        return state(std::move(sd), 1);
    }

    bool sigma_step(const Role& r) const {
        if (!sigma.contains_role(r.name())) return false;
        return !r.inverted() || dialect_has_inverses(dialect);
    }

    bool atoms_agree(TypeBits s, const TreeLabel& l) const {
        for (const auto& name : sigma.concept_names) {
            int idx = ctx->atom_index(Concept::atom(name));
            bool in_type = idx >= 0 && ((s >> idx) & 1);
            if (in_type != l.has_member(name)) return false;
        }
        return true;
    }

    bool nonsigma_witnessed(TypeBits s, const Role& r, const Concept& f) const {
        for (TypeBits w : survivors)
            if (ctx->edge_coherent(s, r, w) && ctx->holds(w, f)) return true;
        return false;
    }

    int bis_id(TypeBits s) const {
        AaState sd;
        sd.kind = AaState::Kind::Bis;
        sd.s = s;
        return ids.at(sd.key());
    }

    // Continuation at a real node: some survivor type pairs with it.
    TF partner(TypeBits s, const Role& r, const TreeLabel& l, const Concept* filler) const {
        if (l.blank) return TF::ff();
        std::vector<TF> opts;
        for (TypeBits s2 : survivors) {
            if (!ctx->edge_coherent(s, r, s2)) continue;
            if (filler && !ctx->holds(s2, *filler)) continue;
            if (!atoms_agree(s2, l)) continue;
            opts.push_back(TF::stay(bis_id(s2)));
        }
        return TF::disj(std::move(opts));
    }

    TF bis_formula(TypeBits s, const TreeLabel& l) const {
        if (l.blank) return TF::ff();
        if (!atoms_agree(s, l)) return TF::ff();
        std::vector<TF> parts;
        for (const auto& ob : ctx->obligations(s)) {
            if (!sigma_step(ob.role)) {
                if (!nonsigma_witnessed(s, ob.role, ob.filler)) return TF::ff();
                continue;
            }
            std::vector<TF> opts;
            int down = lookup(AaState::Kind::BisDown, s, ob.role, ob.filler, "");
            opts.push_back(TF::child_strict(0, down));
            opts.push_back(TF::child_strict(1, down));
            if (ob.role == l.role.inverse())
                opts.push_back(
                    TF::up_strict(lookup(AaState::Kind::BisUp, s, ob.role, ob.filler, "")));
            if (!ob.role.inverted())
                for (const auto& [fr, fc] : l.flags)
                    if (fr == ob.role.name())
                        opts.push_back(
                            TF::stay(lookup(AaState::Kind::JFort, s, ob.role, ob.filler, fc)));
            parts.push_back(TF::disj(std::move(opts)));
        }
        for (const auto& r : dialect_roles(sigma.role_names, dialect)) {
            parts.push_back(
                TF::all_children(lookup(AaState::Kind::BkDown, s, r, Concept::top(), "")));
            if (r == l.role.inverse())
                parts.push_back(TF::up_weak(lookup(AaState::Kind::BkUp, s, r, Concept::top(), "")));
            if (!r.inverted())
                for (const auto& [fr, fc] : l.flags)
                    if (fr == r.name())
                        parts.push_back(
                            TF::stay(lookup(AaState::Kind::JBack, s, r, Concept::top(), fc)));
            if (r.inverted())
                for (const auto& m : l.members)
                    if (ind_set.count(m))
                        parts.push_back(TF::stay(
                            lookup(AaState::Kind::KFClimb, s, Role(r.name()), Concept::top(), m)));
        }
        return TF::conj(std::move(parts));
    }

    int lookup(AaState::Kind k, TypeBits s, Role r, Concept f, const std::string& ind) const {
        AaState sd;
        sd.kind = k;
        sd.s = s;
        sd.role = std::move(r);
        sd.filler = std::move(f);
        sd.anchor = ind;
        return ids.at(sd.key());
    }

    // Placement checks shared by Arrive and Walk at a real node.
    // `placed` are the component elements put at this node; `up` those at the
    // nearest real ancestor. Returns false when the label refutes the guess.
    bool placement_ok(const Guess& g, const std::set<std::string>& placed,
                      const std::set<std::string>& up, const TreeLabel& l) const {
        auto self_edge = [&](const std::string& r) {
            for (const auto& m : l.members)
                if (ind_set.count(m) && l.flags.count({r, m})) return true;
            return false;
        };
        for (const auto& dd : placed)
            for (const auto& f : kb.database.concept_facts)
                if (f.individual == dd && sigma.contains_concept(f.concept_name) &&
                    !l.has_member(f.concept_name))
                    return false;
        for (const auto& f : kb.database.role_facts) {
            if (!sigma.contains_role(f.role_name)) continue;
            bool from_here = placed.count(f.from), to_here = placed.count(f.to);
            bool from_up = up.count(f.from), to_up = up.count(f.to);
            if (from_here && to_here && !self_edge(f.role_name)) return false;
            if (from_up && to_here && !(l.role == Role(f.role_name))) return false;
            if (from_here && to_up) {
                bool via_inverse = l.role == Role(f.role_name, true);
                bool via_flag = false;
                auto it = g.at_anchor.find(f.to);
                if (it != g.at_anchor.end())
                    via_flag = l.flags.count({f.role_name, it->second}) > 0;
                if (!via_inverse && !via_flag) return false;
            }
            if (from_here && g.at_anchor.count(f.to) && !to_here && !to_up) {
                // Edge to an anchor-placed element: flag edge.
                if (!l.flags.count({f.role_name, g.at_anchor.at(f.to)})) return false;
            }
        }
        return true;
    }
};

// Partitions `pending` over the two children, keeping `up` as the nearest real
// ancestor's placed set.
TF split_pending(const AaData& d, int gid, const std::set<std::string>& up,
                 const std::set<std::string>& pending) {
    std::vector<std::string> pend(pending.begin(), pending.end());
    std::vector<TF> options;
    for (size_t m = 0; m < (size_t{1} << pend.size()); ++m) {
        std::set<std::string> left, right;
        for (size_t j = 0; j < pend.size(); ++j) ((m >> j) & 1 ? right : left).insert(pend[j]);
        std::vector<TF> parts;
        if (!left.empty())
            parts.push_back(TF::child_strict(0, const_cast<AaData&>(d).walk(gid, up, left)));
        if (!right.empty())
            parts.push_back(TF::child_strict(1, const_cast<AaData&>(d).walk(gid, up, right)));
        if (parts.empty()) parts.push_back(TF::tt());
        options.push_back(TF::conj(std::move(parts)));
    }
    return TF::disj(std::move(options));
}

} // namespace

TwoATA build_bisim_automaton(const LabeledKB& kb, const std::string& a, const std::string& b,
                             const Signature& sigma, Dialect dialect) {
    if (dialect != Dialect::ALC && dialect != Dialect::ALCI)
        throw std::invalid_argument("bisim automaton supports ALC and ALCI only");

    auto d = std::make_shared<AaData>();
    d->ctx = std::make_shared<TypeContext>(kb.ontology, kb.database, std::vector<Concept>{},
                                           /*with_nominals=*/false);
    d->kb = kb;
    d->sigma = sigma;
    d->dialect = dialect;
    auto inds = kb.database.individuals();
    d->ind_set = inds;

    std::set<std::string> comp{a};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& f : kb.database.role_facts) {
            if (comp.count(f.from) && !comp.count(f.to)) { comp.insert(f.to); grew = true; }
            if (comp.count(f.to) && !comp.count(f.from)) { comp.insert(f.from); grew = true; }
        }
    }
    d->comp.assign(comp.begin(), comp.end());
    d->comp_set = comp;
    d->survivors = Reasoner::ontology_survivors(d->ctx);
    AssignmentCSP csp = AssignmentCSP::build(d->ctx, d->survivors, kb.database);

    std::vector<std::map<std::string, TypeBits>> assignments;
    {
        std::map<std::string, TypeBits> cur;
        long budget = 20000;
        std::function<void(size_t)> rec = [&](size_t i) {
            if (--budget < 0) throw std::runtime_error("Aa assignment budget exceeded");
            if (i == d->comp.size()) {
                if (csp.extendable(cur)) assignments.push_back(cur);
                return;
            }
            for (TypeBits t : d->survivors) {
                cur[d->comp[i]] = t;
                rec(i + 1);
            }
            cur.erase(d->comp[i]);
        };
        rec(0);
    }

    {
        std::vector<std::string> inds_v(inds.begin(), inds.end());
        for (const auto& as : assignments) {
            AaData::Guess g;
            std::function<void(size_t)> place = [&](size_t i) {
                if (d->guesses.size() > 4096)
                    throw std::runtime_error("Aa placement budget exceeded");
                if (i == d->comp.size()) {
                    // Sigma-facts between elements placed below different
                    // anchors (or from an anchor to a foreign subtree) cannot
                    // be realized.
                    for (const auto& f : kb.database.role_facts) {
                        if (!d->comp_set.count(f.from) || !d->comp_set.count(f.to)) continue;
                        if (!d->sigma.contains_role(f.role_name)) continue;
                        bool fa = g.at_anchor.count(f.from), ta = g.at_anchor.count(f.to);
                        if (!fa && !ta && g.below.at(f.from) != g.below.at(f.to)) return;
                        if (fa && !ta && g.at_anchor.at(f.from) != g.below.at(f.to)) return;
                    }
                    g.types = as;
                    d->guesses.push_back(g);
                    return;
                }
                const std::string& e = d->comp[i];
                if (e == a) {
                    g.at_anchor[e] = b;
                    place(i + 1);
                    g.at_anchor.erase(e);
                    return;
                }
                for (const auto& anchor : inds_v) {
                    g.at_anchor[e] = anchor;
                    place(i + 1);
                    g.at_anchor.erase(e);
                    g.below[e] = anchor;
                    place(i + 1);
                    g.below.erase(e);
                }
            };
            place(0);
        }
    }

    // Register all states.
    std::set<TypeBits> bis_types(d->survivors.begin(), d->survivors.end());
    for (const auto& g : d->guesses)
        for (const auto& [e, t] : g.types) bis_types.insert(t);
    for (TypeBits s : bis_types) {
        d->bis(s);
        for (const auto& ob : d->ctx->obligations(s)) {
            if (!d->sigma_step(ob.role)) continue;
            d->helper(AaState::Kind::BisDown, s, ob.role, ob.filler, "", 1);
            d->helper(AaState::Kind::BisUp, s, ob.role, ob.filler, "", 1);
            if (!ob.role.inverted())
                for (const auto& c : inds) {
                    d->helper(AaState::Kind::JFort, s, ob.role, ob.filler, c, 1);
                    d->helper(AaState::Kind::JFortSeek, s, ob.role, ob.filler, c, 1);
                }
        }
        for (const auto& r : dialect_roles(sigma.role_names, dialect)) {
            d->helper(AaState::Kind::BkDown, s, r, Concept::top(), "", 2);
            d->helper(AaState::Kind::BkUp, s, r, Concept::top(), "", 2);
            if (!r.inverted())
                for (const auto& c : inds) {
                    d->helper(AaState::Kind::JBack, s, r, Concept::top(), c, 1);
                    d->helper(AaState::Kind::JBackSeek, s, r, Concept::top(), c, 1);
                }
            if (r.inverted())
                for (const auto& c : inds) {
                    d->helper(AaState::Kind::KFClimb, s, Role(r.name()), Concept::top(), c, 2);
                    d->helper(AaState::Kind::KFSweep, s, Role(r.name()), Concept::top(), c, 2);
                }
        }
    }
    for (int gid = 0; gid < static_cast<int>(d->guesses.size()); ++gid) {
        const auto& g = d->guesses[gid];
        for (const auto& anc : g.anchors()) {
            d->arrive(gid, anc);
            std::vector<std::string> members;
            for (const auto& [e, anc2] : g.at_anchor)
                if (anc2 == anc) members.push_back(e);
            for (const auto& [e, anc2] : g.below)
                if (anc2 == anc) members.push_back(e);
            // All (up, pending) pairs over this anchor's members.
            size_t m = members.size();
            for (size_t um = 0; um < (size_t{1} << m); ++um)
                for (size_t pm = 0; pm < (size_t{1} << m); ++pm) {
                    if (um & pm) continue;
                    std::set<std::string> up, pending;
                    for (size_t j = 0; j < m; ++j) {
                        if ((um >> j) & 1) up.insert(members[j]);
                        if ((pm >> j) & 1) pending.insert(members[j]);
                    }
                    d->walk(gid, up, pending);
                }
        }
    }
    if (d->num_states > 120000) throw std::runtime_error("Aa state budget exceeded");
    d->frozen = true;

    TwoATA out;
    out.alphabet = kb_alphabet(kb);
    out.note = "Aa(" + a + ")";
    out.num_states = d->num_states;
    out.initial = 0;
    out.priority = d->priorities;
    out.declared_up_moves = true;

    out.delta = [d](int q, const TreeLabel& l) -> TF {
        if (q == 0) {
            std::vector<TF> opts;
            for (int gid = 0; gid < static_cast<int>(d->guesses.size()); ++gid) {
                std::vector<TF> parts;
                for (const auto& anc : d->guesses[gid].anchors())
                    parts.push_back(
                        TF::stay(const_cast<AaData&>(*d).arrive(gid, anc)));
                if (parts.empty()) parts.push_back(TF::tt());
                opts.push_back(TF::conj(std::move(parts)));
            }
            return TF::disj(std::move(opts));
        }
        const AaState& sd = d->by_id[q];
        switch (sd.kind) {
            case AaState::Kind::Init: return TF::ff();
            case AaState::Kind::SinkFalse: return TF::ff();
            case AaState::Kind::Arrive: {
                if (l.blank) return TF::disj({TF::child_strict(0, q), TF::child_strict(1, q)});
                if (!l.has_member(sd.anchor)) return TF::ff();
                const auto& g = d->guesses[sd.gid];
                std::set<std::string> placed, pending;
                for (const auto& [e, anc] : g.at_anchor)
                    if (anc == sd.anchor) placed.insert(e);
                for (const auto& [e, anc] : g.below)
                    if (anc == sd.anchor) pending.insert(e);
                if (!d->placement_ok(g, placed, {}, l)) return TF::ff();
                std::vector<TF> parts;
                for (const auto& e : placed)
                    parts.push_back(TF::stay(d->bis_id(g.types.at(e))));
                parts.push_back(split_pending(*d, sd.gid, placed, pending));
                return TF::conj(std::move(parts));
            }
            case AaState::Kind::Walk: {
                const auto& g = d->guesses[sd.gid];
                if (l.blank) {
                    // Split the pending set over the children.
                    return split_pending(*d, sd.gid, sd.up, sd.pending);
                }
                // Choose the subset placed at this node.
                std::vector<std::string> pend(sd.pending.begin(), sd.pending.end());
                std::vector<TF> options;
                for (size_t m = 0; m < (size_t{1} << pend.size()); ++m) {
                    std::set<std::string> placed, rest;
                    for (size_t j = 0; j < pend.size(); ++j)
                        ((m >> j) & 1 ? placed : rest).insert(pend[j]);
                    // A pending element with a Sigma-fact into `up` must land now.
                    bool ok = true;
                    for (const auto& e : rest)
                        for (const auto& f : d->kb.database.role_facts) {
                            if (!d->sigma.contains_role(f.role_name)) continue;
                            if ((f.from == e && sd.up.count(f.to)) ||
                                (f.to == e && sd.up.count(f.from)))
                                ok = false;
                        }
                    if (!ok) continue;
                    if (!d->placement_ok(g, placed, sd.up, l)) continue;
                    std::vector<TF> parts;
                    for (const auto& e : placed)
                        parts.push_back(TF::stay(d->bis_id(g.types.at(e))));
                    parts.push_back(split_pending(*d, sd.gid, placed, rest));
                    options.push_back(TF::conj(std::move(parts)));
                }
                return TF::disj(std::move(options));
            }
            case AaState::Kind::Bis: return d->bis_formula(sd.s, l);
            case AaState::Kind::BisDown: {
                if (l.blank) return TF::disj({TF::child_strict(0, q), TF::child_strict(1, q)});
                if (!(l.role == sd.role)) return TF::ff();
                return d->partner(sd.s, sd.role, l, &sd.filler);
            }
            case AaState::Kind::BisUp: {
                if (l.blank) return TF::up_strict(q);
                return d->partner(sd.s, sd.role, l, &sd.filler);
            }
            case AaState::Kind::JFort:
            case AaState::Kind::JBack: {
                // Climb to the root, then seek the anchor. [-]false holds only
                // at the root, so the second disjunct fires exactly there.
                auto seek_kind = sd.kind == AaState::Kind::JFort ? AaState::Kind::JFortSeek
                                                                 : AaState::Kind::JBackSeek;
                int seek = d->lookup(seek_kind, sd.s, sd.role, sd.filler, sd.anchor);
                return TF::disj({TF::up_strict(q),
                                 TF::conj({TF::up_weak(AaData::kSinkFalse), TF::stay(seek)})});
            }
            case AaState::Kind::JFortSeek:
            case AaState::Kind::JBackSeek: {
                if (!l.blank && l.has_member(sd.anchor)) {
                    const Concept* filler =
                        sd.kind == AaState::Kind::JFortSeek ? &sd.filler : nullptr;
                    return d->partner(sd.s, sd.role, l, filler);
                }
                return TF::disj({TF::child_strict(0, q), TF::child_strict(1, q)});
            }
            case AaState::Kind::BkDown: {
                if (l.blank) return TF::all_children(q);
                if (!(l.role == sd.role)) return TF::tt();
                return d->partner(sd.s, sd.role, l, nullptr);
            }
            case AaState::Kind::BkUp: {
                if (l.blank) return TF::up_weak(q);
                return d->partner(sd.s, sd.role, l, nullptr);
            }
            case AaState::Kind::KFClimb: {
                int sweep =
                    d->lookup(AaState::Kind::KFSweep, sd.s, sd.role, Concept::top(), sd.anchor);
                return TF::disj({TF::up_strict(q),
                                 TF::conj({TF::up_weak(AaData::kSinkFalse), TF::stay(sweep)})});
            }
            case AaState::Kind::KFSweep: {
                std::vector<TF> parts{TF::all_children(q)};
                if (!l.blank && l.flags.count({sd.role.name(), sd.anchor}))
                    parts.push_back(d->partner(sd.s, Role(sd.role.name(), true), l, nullptr));
                return TF::conj(std::move(parts));
            }
        }
        return TF::ff();
    };
    return out;
}

// ---------------------------------------------------------------------------
// Encoding and decoding of forest models.

bool is_forest_shaped(const Structure& s, const LabeledKB& kb) {
    auto inds = kb.database.individuals();
    std::set<ElementId> anchors;
    for (const auto& ind : inds) {
        auto it = s.anchors.find(ind);
        if (it == s.anchors.end()) return false;
        anchors.insert(it->second);
    }
    // Remove edges between anchors; the rest must be a forest of trees rooted
    // at the anchors, with no edges into anchors and (for ALC/ALCO) unique
    // parents, (for ALCI/ALCIO) undirected acyclicity and no multi-edges.
    std::map<ElementId, std::vector<std::tuple<std::string, ElementId, bool>>> adj;
    for (const auto& [r, ext] : s.role_ext)
        for (const auto& [x, y] : ext) {
            if (anchors.count(x) && anchors.count(y)) continue;
            if (anchors.count(y)) return false;  // edge into an anchor from a tree node
            adj[x].push_back({r, y, false});
            adj[y].push_back({r, x, true});
        }
    // Each non-anchor element must have exactly one neighbor closer to a root.
    std::set<ElementId> visited(anchors.begin(), anchors.end());
    std::vector<ElementId> queue(anchors.begin(), anchors.end());
    std::map<ElementId, int> tree_deg;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        ElementId v = queue[qi];
        for (const auto& [r, w, inv] : adj[v]) {
            if (visited.count(w)) {
                tree_deg[w]++;
                if (!anchors.count(w) || !anchors.count(v)) {
                    // second connection to an already visited node: cycle or
                    // multi-edge in the tree part
                    if (w != v && tree_deg[w] > 1) return false;
                }
                continue;
            }
            tree_deg[w] = 1;
            visited.insert(w);
            queue.push_back(w);
        }
    }
    if (visited.size() != s.domain.size()) return false;
    // Multi-edge check within the tree part.
    std::set<std::pair<ElementId, ElementId>> seen_pairs;
    for (const auto& [r, ext] : s.role_ext)
        for (const auto& [x, y] : ext) {
            if (anchors.count(x) && anchors.count(y)) continue;
            auto p = std::minmax(x, y);
            if (!seen_pairs.insert({p.first, p.second}).second) return false;
        }
    return true;
}

RegularTree encode_forest_model(const Structure& s, const LabeledKB& kb) {
    if (!is_forest_shaped(s, kb))
        throw std::invalid_argument("encode_forest_model: structure is not forest shaped");
    auto inds = kb.database.individuals();
    std::map<ElementId, std::set<std::string>> names_at;
    for (const auto& ind : inds) names_at[s.anchors.at(ind)].insert(ind);
    std::set<ElementId> anchor_elems;
    for (const auto& [e, names] : names_at) anchor_elems.insert(e);
    Signature sig = signature_of(kb);

    RegularTree t;
    auto new_vertex = [&](const TreeLabel& l) {
        t.vertices.push_back({l, -1, -1});
        return static_cast<int>(t.vertices.size()) - 1;
    };

    auto label_of = [&](ElementId e, const Role& incoming) {
        std::set<std::string> members;
        for (const auto& name : sig.concept_names)
            if (s.in_concept(name, e)) members.insert(name);
        auto it = names_at.find(e);
        if (it != names_at.end()) members.insert(it->second.begin(), it->second.end());
        std::set<std::pair<std::string, std::string>> flags;
        for (const auto& [r, ext] : s.role_ext)
            for (const auto& [x, y] : ext)
                if (x == e && anchor_elems.count(y))
                    for (const auto& nm : names_at.at(y)) flags.insert({r, nm});
        return TreeLabel::node(incoming, members, flags);
    };

    // Children of an element within the tree part.
    auto tree_children = [&](ElementId e, ElementId parent) {
        std::vector<std::pair<Role, ElementId>> out;
        for (const auto& [r, ext] : s.role_ext)
            for (const auto& [x, y] : ext) {
                if (anchor_elems.count(x) && anchor_elems.count(y)) continue;
                if (x == e && !anchor_elems.count(y) && y != parent) out.push_back({Role(r), y});
                if (y == e && !anchor_elems.count(x) && x != parent)
                    out.push_back({Role(r, true), x});
            }
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
        return out;
    };

    // Attach a list of children below `vertex` using a blank spine.
    std::function<void(int, const std::vector<int>&)> attach = [&](int vertex,
                                                                   const std::vector<int>& kids) {
        if (kids.empty()) return;
        t.vertices[vertex].left = kids[0];
        int spine = vertex;
        for (size_t i = 1; i < kids.size(); ++i) {
            int pad = new_vertex(TreeLabel::blank_label());
            t.vertices[spine].right = pad;
            t.vertices[pad].left = kids[i];
            spine = pad;
        }
    };

    std::function<int(ElementId, ElementId, const Role&)> build =
        [&](ElementId e, ElementId parent, const Role& incoming) {
            int v = new_vertex(label_of(e, incoming));
            std::vector<int> kids;
            for (const auto& [r, child] : tree_children(e, parent))
                kids.push_back(build(child, e, r));
            attach(v, kids);
            return v;
        };

    t.root = new_vertex(TreeLabel::blank_label());
    Role dummy = sig.role_names.empty() ? Role("r") : Role(*sig.role_names.begin());
    std::vector<int> anchor_vertices;
    for (ElementId e : anchor_elems) anchor_vertices.push_back(build(e, e, dummy));
    attach(t.root, anchor_vertices);
    return t;
}

Structure decode_forest_model(const RegularTree& t, const LabeledKB& kb) {
    if (!t.is_finite_tree())
        throw std::invalid_argument("decode_forest_model: input is not a finite tree");
    auto inds = kb.database.individuals();
    Structure s;
    std::map<int, ElementId> elem;  // real vertex -> element
    std::vector<int> real;
    for (size_t v = 0; v < t.vertices.size(); ++v)
        if (!t.vertices[v].label.blank) {
            elem[static_cast<int>(v)] = static_cast<ElementId>(real.size());
            real.push_back(static_cast<int>(v));
        }
    for (size_t i = 0; i < real.size(); ++i) s.add_element(static_cast<ElementId>(i));

    // Anchors.
    for (const auto& ind : inds) {
        int where = -1;
        for (int v : real)
            if (t.vertices[v].label.has_member(ind)) {
                if (where >= 0)
                    throw std::invalid_argument("decode: duplicate anchor for " + ind);
                where = v;
            }
        if (where < 0) throw std::invalid_argument("decode: missing anchor for " + ind);
        s.set_anchor(ind, elem.at(where));
    }
    // Concepts (members that are not individuals).
    for (int v : real)
        for (const auto& m : t.vertices[v].label.members)
            if (!inds.count(m)) s.add_concept(m, elem.at(v));
    // Parent edges.
    std::vector<int> parent(t.vertices.size(), -1);
    for (size_t v = 0; v < t.vertices.size(); ++v) {
        if (t.vertices[v].left >= 0) parent[t.vertices[v].left] = static_cast<int>(v);
        if (t.vertices[v].right >= 0) parent[t.vertices[v].right] = static_cast<int>(v);
    }
    auto real_ancestor = [&](int v) {
        int p = parent[v];
        while (p >= 0 && t.vertices[p].label.blank) p = parent[p];
        return p;
    };
    for (int v : real) {
        const auto& lab = t.vertices[v].label;
        int up = real_ancestor(v);
        if (up >= 0) {
            if (lab.role.inverted())
                s.add_edge(lab.role.name(), elem.at(v), elem.at(up));
            else
                s.add_edge(lab.role.name(), elem.at(up), elem.at(v));
        }
        for (const auto& [r, ind] : lab.flags) {
            auto it = s.anchors.find(ind);
            if (it == s.anchors.end()) throw std::invalid_argument("decode: flag to unknown " + ind);
            s.add_edge(r, elem.at(v), it->second);
        }
    }
    return s;
}

} // namespace dlsep
