#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dlsep/fixtures.hpp"
#include "dlsep/parser.hpp"
#include "dlsep/separability.hpp"

using namespace dlsep;

namespace {

struct CommonOpts {
    std::string kb_path;
    std::string language = "alc";
    bool projective = false;
    bool oracle = false;
    bool pretty = false;
    int jobs = 1;
    int model_bound = 4;
    int concept_bound = 9;
    int cq_bound = 4;
    int timeout_ms = 10000;
};

void add_budget_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--model-bound", o.model_bound, "brute-force model size bound");
    cmd->add_option("--concept-bound", o.concept_bound, "witness concept size bound");
    cmd->add_option("--cq-bound", o.cq_bound, "CQ variable bound");
    cmd->add_option("--timeout-ms", o.timeout_ms, "per-subproblem wall clock budget");
    cmd->add_flag("--pretty", o.pretty, "human readable JSON");
    cmd->add_option("--jobs", o.jobs, "parallel subproblem workers");
}

Budgets budgets_of(const CommonOpts& o) {
    Budgets b;
    b.model_bound = o.model_bound;
    b.concept_bound = o.concept_bound;
    b.cq_vars = o.cq_bound;
    b.timeout_ms = o.timeout_ms;
    return b;
}

SeparabilityProblem load_problem(const CommonOpts& o, SepMode mode) {
    ParsedKB parsed = parse_kb_file(o.kb_path);
    SeparabilityProblem p;
    p.kb = parsed.kb;
    if (parsed.sigma) {
        p.sigma = *parsed.sigma;
    } else {
        Signature s = signature_of(p.kb);
        s.individual_names.clear();
        p.sigma = s;
    }
    p.mode = mode;
    p.projective = o.projective;
    p.budget = budgets_of(o);
    if (o.language == "ucqr") {
        p.language = SepLanguage::UCQr;
        p.language_dialect = p.kb.dialect;
    } else if (o.language == "fo") {
        p.language = SepLanguage::FO;
    } else if (o.language == "bocq") {
        p.language = SepLanguage::BoCQ;
    } else {
        auto d = dialect_from_string(o.language);
        if (!d) throw std::invalid_argument("unknown language: " + o.language);
        p.language = SepLanguage::Concept;
        p.language_dialect = *d;
    }
    return p;
}

int emit(const Verdict& v, bool pretty) {
    std::cout << v.to_json(pretty) << "\n";
    return v.outcome == Verdict::Outcome::Unknown ? 2 : 0;
}

// Weak-mode oracle: the projective decider and the semi-decider must not
// disagree on conclusive verdicts.
bool weak_oracle_agrees(const SeparabilityProblem& p, const Verdict& v) {
    Verdict other = weak_semi_decide(p, p.budget);
    if (v.outcome == Verdict::Outcome::Unknown || other.outcome == Verdict::Outcome::Unknown)
        return true;
    return v.outcome == other.outcome;
}

bool strong_oracle_agrees(const SeparabilityProblem& p, const Verdict& v) {
    const std::string a = *p.kb.positives.begin();
    const std::string b = *p.kb.negatives.begin();
    OracleConfig cfg;
    cfg.max_elements = p.budget.model_bound;
    try {
        auto r = Oracle::joint_bisimilar_models(
            p.kb, a, b, p.language_dialect, p.sigma, cfg);
        if (r.found && v.outcome == Verdict::Outcome::Separable) return false;
    } catch (const OracleBudgetExceeded&) {
    }
    if (v.outcome == Verdict::Outcome::Separable && v.witness)
        return verify_separator(p, *v.witness);
    return true;
}

QueryFormulaPtr parse_surface_formula(const std::string& concept_text,
                                      const std::string& neg_self_loop,
                                      const std::string& twin) {
    if (!concept_text.empty()) return QueryFormula::concept_at(parse_concept(concept_text));
    if (!neg_self_loop.empty()) return QueryFormula::neg_self_loop(neg_self_loop);
    if (!twin.empty()) return QueryFormula::twin_successors(twin);
    throw std::invalid_argument("no formula given");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dlsep: weak and strong separability of labeled DL knowledge bases"};
    app.require_subcommand(1);

    CommonOpts o;

    auto* checksat = app.add_subcommand("check-sat", "KB satisfiability");
    checksat->add_option("kb", o.kb_path)->required();
    add_budget_flags(checksat, o);

    auto* entails = app.add_subcommand("entails", "instance entailment K |= C(a)");
    std::string concept_text, individual;
    entails->add_option("kb", o.kb_path)->required();
    entails->add_option("--concept", concept_text)->required();
    entails->add_option("--ind", individual)->required();
    add_budget_flags(entails, o);

    auto* bisim = app.add_subcommand("bisim", "maximal bisimulation between two models");
    std::string model_a, model_b, dialect_name = "alc";
    std::vector<std::string> sig_items;
    int point_a = 0, point_b = 0;
    bool functional = false;
    bisim->add_option("--left", model_a)->required();
    bisim->add_option("--right", model_b)->required();
    bisim->add_option("--left-point", point_a);
    bisim->add_option("--right-point", point_b);
    bisim->add_option("--dialect", dialect_name);
    bisim->add_option("--sigma", sig_items, "symbols as concept:A role:r ind:a");
    bisim->add_flag("--functional", functional);
    bisim->add_flag("--pretty", o.pretty);

    auto* hom = app.add_subcommand("hom", "sigma-homomorphism between two models");
    hom->add_option("--left", model_a)->required();
    hom->add_option("--right", model_b)->required();
    hom->add_option("--sigma", sig_items);
    hom->add_flag("--pretty", o.pretty);

    auto* weak = app.add_subcommand("weak-sep", "weak separability");
    weak->add_option("kb", o.kb_path)->required();
    weak->add_option("--language", o.language, "alc|alci|alco|alcio|ucqr");
    weak->add_flag("--projective", o.projective);
    weak->add_flag("--oracle", o.oracle);
    add_budget_flags(weak, o);

    auto* strong = app.add_subcommand("strong-sep", "strong separability");
    strong->add_option("kb", o.kb_path)->required();
    strong->add_option("--language", o.language, "alc|alci|alco|alcio|fo|bocq");
    strong->add_flag("--oracle", o.oracle);
    add_budget_flags(strong, o);

    auto* verify = app.add_subcommand("verify", "verify a separator");
    std::string v_concept, v_nsl, v_twin, v_mode = "weak";
    verify->add_option("kb", o.kb_path)->required();
    verify->add_option("--concept", v_concept);
    verify->add_option("--neg-self-loop", v_nsl);
    verify->add_option("--twin-successors", v_twin);
    verify->add_option("--mode", v_mode, "weak|strong");
    verify->add_option("--language", o.language);
    verify->add_flag("--projective", o.projective);
    add_budget_flags(verify, o);

    auto* reduce_ce = app.add_subcommand("reduce-ce", "conservative extension to separability");
    std::string onto1, onto2;
    bool decide_flag = false;
    reduce_ce->add_option("ontology", onto1)->required();
    reduce_ce->add_option("extension", onto2)->required();
    reduce_ce->add_option("--language", o.language);
    reduce_ce->add_flag("--decide", decide_flag, "also decide the reduced problem");
    add_budget_flags(reduce_ce, o);

    auto* reduce_rh = app.add_subcommand("reduce-role-helpers", "add the dummy helper role");
    reduce_rh->add_option("kb", o.kb_path)->required();
    reduce_rh->add_option("--language", o.language);
    reduce_rh->add_flag("--pretty", o.pretty);

    auto* evalq = app.add_subcommand("eval-query", "evaluate a formula on a model");
    std::string model_path;
    int at_element = 0;
    evalq->add_option("--model", model_path)->required();
    evalq->add_option("--concept", v_concept);
    evalq->add_option("--neg-self-loop", v_nsl);
    evalq->add_option("--twin-successors", v_twin);
    evalq->add_option("--at", at_element)->required();
    evalq->add_flag("--pretty", o.pretty);

    auto* emitm = app.add_subcommand("emit-model", "extract a bounded model");
    int depth = 3;
    emitm->add_option("kb", o.kb_path)->required();
    emitm->add_option("--depth", depth);
    emitm->add_flag("--pretty", o.pretty);

    auto* fixc = app.add_subcommand("fixtures", "write the example corpus");
    std::string fix_dir = "fixtures";
    fixc->add_option("--dir", fix_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (checksat->parsed()) {
            auto parsed = parse_kb_file(o.kb_path);
            nlohmann::ordered_json j;
            j["satisfiable"] = Reasoner::kb_satisfiable(parsed.kb);
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (entails->parsed()) {
            auto parsed = parse_kb_file(o.kb_path);
            nlohmann::ordered_json j;
            j["entailed"] =
                Reasoner::entails_instance(parsed.kb, parse_concept(concept_text), individual);
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        auto read_sigma = [&]() {
            Signature s;
            for (const auto& item : sig_items) {
                auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("sigma items look like concept:A");
                std::string kind = item.substr(0, colon), name = item.substr(colon + 1);
                if (kind == "concept") s.concept_names.insert(name);
                else if (kind == "role") s.role_names.insert(name);
                else if (kind == "ind") s.individual_names.insert(name);
                else throw std::invalid_argument("unknown sigma kind " + kind);
            }
            return s;
        };
        auto read_structure = [&](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open " + path);
            std::ostringstream ss;
            ss << in.rdbuf();
            return structure_from_json(ss.str());
        };
        if (bisim->parsed()) {
            Structure A = read_structure(model_a), B = read_structure(model_b);
            auto d = dialect_from_string(dialect_name);
            if (!d) throw std::invalid_argument("unknown dialect " + dialect_name);
            Signature s = read_sigma();
            nlohmann::ordered_json j;
            if (functional) {
                auto f = functional_bisim_exists({A, point_a}, {B, point_b}, *d, s);
                j["functional_bisimilar"] = f.has_value();
                if (f) {
                    nlohmann::ordered_json m;
                    for (const auto& [x, y] : *f) m[std::to_string(x)] = y;
                    j["mapping"] = m;
                }
            } else {
                auto rel = max_bisimulation(A, B, *d, s);
                j["bisimilar"] = rel.relates(point_a, point_b);
                nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
                for (const auto& [x, y] : rel.pairs) pairs.push_back({x, y});
                j["pairs"] = pairs;
            }
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (hom->parsed()) {
            Structure A = read_structure(model_a), B = read_structure(model_b);
            Signature s = read_sigma();
            auto h = sigma_homomorphism(A, B, s);
            nlohmann::ordered_json j;
            j["homomorphism"] = h.has_value();
            if (h) {
                nlohmann::ordered_json m;
                for (const auto& [x, y] : *h) m[std::to_string(x)] = y;
                j["mapping"] = m;
            }
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (weak->parsed()) {
            auto p = load_problem(o, SepMode::Weak);
            Verdict v = decide(p, o.jobs);
            int code = emit(v, o.pretty);
            if (o.oracle && !weak_oracle_agrees(p, v)) return 3;
            return code;
        }
        if (strong->parsed()) {
            auto p = load_problem(o, SepMode::Strong);
            Verdict v = decide(p, o.jobs);
            int code = emit(v, o.pretty);
            if (o.oracle && p.language == SepLanguage::Concept &&
                !strong_oracle_agrees(p, v))
                return 3;
            return code;
        }
        if (verify->parsed()) {
            auto p = load_problem(o, v_mode == "strong" ? SepMode::Strong : SepMode::Weak);
            auto f = parse_surface_formula(v_concept, v_nsl, v_twin);
            if (p.language == SepLanguage::Concept &&
                f->kind != QueryFormula::Kind::ConceptAt)
                p.language = SepLanguage::FO;
            nlohmann::ordered_json j;
            j["separates"] = verify_separator(p, f);
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (reduce_ce->parsed()) {
            Ontology base = parse_ontology_file(onto1);
            Ontology ext = parse_ontology_file(onto2);
            auto d = dialect_from_string(o.language);
            if (!d) throw std::invalid_argument("unknown language " + o.language);
            auto red = reduce_ce_to_sep(base, ext, *d);
            red.problem.budget = budgets_of(o);
            nlohmann::ordered_json j;
            j["kb"] = print_kb(red.problem.kb, red.problem.sigma);
            if (decide_flag) {
                Verdict v = decide(red.problem, o.jobs);
                j["verdict"] = nlohmann::json::parse(v.to_json());
                j["conservative"] = v.outcome == Verdict::Outcome::Inseparable;
                std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
                return v.outcome == Verdict::Outcome::Unknown ? 2 : 0;
            }
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (reduce_rh->parsed()) {
            auto p = load_problem(o, SepMode::Weak);
            p.projective = true;
            auto q = reduce_role_helpers(p);
            nlohmann::ordered_json j;
            j["kb"] = print_kb(q.kb, q.sigma);
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (evalq->parsed()) {
            Structure m = read_structure(model_path);
            auto f = parse_surface_formula(v_concept, v_nsl, v_twin);
            nlohmann::ordered_json j;
            j["holds"] = eval_query(m, *f, at_element);
            std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
            return 0;
        }
        if (emitm->parsed()) {
            auto parsed = parse_kb_file(o.kb_path);
            auto bm = Reasoner::extract_bounded_model(parsed.kb, depth);
            if (!bm) {
                nlohmann::ordered_json j;
                j["satisfiable"] = false;
                std::cout << j.dump(o.pretty ? 2 : -1) << "\n";
                return 0;
            }
            std::cout << structure_to_json(bm->structure) << "\n";
            return 0;
        }
        if (fixc->parsed()) {
            write_fixtures(fix_dir);
            std::cout << "{\"written\":" << fixtures().size() << "}\n";
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const InconclusiveError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
