#ifndef DLSEP_SEPARABILITY_HPP
#define DLSEP_SEPARABILITY_HPP

#include <optional>

#include "dlsep/automata_build.hpp"
#include "dlsep/oracle.hpp"
#include "dlsep/queryeval.hpp"
#include "dlsep/reasoner.hpp"

namespace dlsep {

enum class SepMode { Weak, Strong };
enum class SepLanguage { Concept, UCQr, BoCQ, FO };

struct Budgets {
    int model_bound = 4;       // brute-force model size
    int concept_bound = 9;     // witness AST nodes
    int cq_vars = 4;           // CQ enumeration variables
    int timeout_ms = 10000;    // wall clock per subproblem
    long enum_cap = 200000;    // candidate formulas examined
};

struct SeparabilityProblem {
    LabeledKB kb;
    Signature sigma;
    SepMode mode = SepMode::Weak;
    bool projective = false;
    SepLanguage language = SepLanguage::Concept;
    Dialect language_dialect = Dialect::ALC;  // for SepLanguage::Concept / UCQr
    Budgets budget;

    void check() const;  // sigma within sig(kb); strong mode is non-projective
};

struct Certificate {
    std::string kind;  // bisimilar-models | automaton-empty | rule | budget
    std::string detail;
    std::optional<Structure> model_a, model_b;
};

struct Verdict {
    enum class Outcome { Separable, Inseparable, Unknown };
    Outcome outcome = Outcome::Unknown;
    std::optional<QueryFormulaPtr> witness;
    std::optional<Certificate> certificate;
    std::string budget_report;
    double elapsed_ms = 0;

    static Verdict separable(QueryFormulaPtr w) {
        Verdict v;
        v.outcome = Outcome::Separable;
        v.witness = std::move(w);
        return v;
    }
    static Verdict inseparable(Certificate c) {
        Verdict v;
        v.outcome = Outcome::Inseparable;
        v.certificate = std::move(c);
        return v;
    }
    static Verdict unknown(std::string report) {
        Verdict v;
        v.outcome = Outcome::Unknown;
        v.budget_report = std::move(report);
        return v;
    }
    std::string to_json(bool pretty = false) const;
};

std::string to_string(Verdict::Outcome o);

// --- verification -----------------------------------------------------------

// Entailment of a one-free-variable formula at an individual. Sound yes/no
// rules backed by the reasoner; throws InconclusiveError when the budgeted
// semi-decision procedures cannot settle the query.
struct InconclusiveError : std::runtime_error {
    explicit InconclusiveError(const std::string& w) : std::runtime_error(w) {}
};
bool entails_query(const LabeledKB& kb, const QueryFormulaPtr& f, const std::string& ind,
                   const Budgets& budget);

bool verify_separator(const SeparabilityProblem& p, const QueryFormulaPtr& f);
bool verify_separator(const SeparabilityProblem& p, const Concept& c);

// --- reductions and combinators ---------------------------------------------

std::vector<SeparabilityProblem> decompose_negatives(const SeparabilityProblem& p);

QueryFormulaPtr strong_combine(
    const std::vector<std::pair<std::pair<std::string, std::string>, QueryFormulaPtr>>& parts,
    const std::set<std::string>& positives, const std::set<std::string>& negatives);

// C_{K,Sigma,ind}: the ALCIO^u encoding of the KB relative to ind, with the
// marker individual m__@ind and off-signature symbols renamed NAME__@ind.
Concept encode_strong_fo(const LabeledKB& kb, const Signature& sigma, const std::string& ind);

struct CEReduction {
    SeparabilityProblem problem;
    // Conservativity holds iff the problem is inseparable.
};
CEReduction reduce_ce_to_sep(const Ontology& o, const Ontology& o_prime, Dialect dialect);

SeparabilityProblem reduce_role_helpers(const SeparabilityProblem& p);

// --- deciders ----------------------------------------------------------------

Verdict decide_strong_fo(const SeparabilityProblem& p);
Verdict decide_strong_dl(const SeparabilityProblem& p);
std::optional<QueryFormulaPtr> find_bocq_separator(const SeparabilityProblem& p,
                                                   const Budgets& budget);

Verdict decide_weak_projective(const SeparabilityProblem& p);
Verdict weak_semi_decide(const SeparabilityProblem& p, const Budgets& budget);

bool check_condition3(const SeparabilityProblem& p, const Structure& candidate,
                      const Budgets& budget);
bool check_ucqr_characterization(const SeparabilityProblem& p, const Structure& candidate,
                                 int bound);

// Entry point used by the CLI: dispatches on mode/language/projectivity.
Verdict decide(const SeparabilityProblem& p, int jobs = 1);

// Witness-concept enumeration shared by the deciders (exposed for tests).
std::optional<Concept> enumerate_separating_concept(const SeparabilityProblem& p,
                                                    const Budgets& budget);

} // namespace dlsep

#endif
