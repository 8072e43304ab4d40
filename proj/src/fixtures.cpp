#include "dlsep/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace dlsep {

const std::vector<Fixture>& fixtures() {
    static const std::vector<Fixture> corpus = {
        {"ex1",
         "# r-cycle of length 3 against a dangling r-edge\n"
         "DIALECT\n  alci\nONTOLOGY\n"
         "  top sub (some r . top and some inv(r) . top)\n"
         "DATABASE\n  r(a1,a2)\n  r(a2,a3)\n  r(a3,a1)\n  r(b,b1)\n"
         "POSITIVE\n  a1\nNEGATIVE\n  b\nSIGNATURE\n  role:r\n",
         "projective ALCI: separable; non-projective ALCI: inseparable"},
        {"ex2",
         "# helper-role example: a is r-isolated below c\n"
         "DIALECT\n  alco\nONTOLOGY\n"
         "  (A0 and some r . top) sub bot\n  B sub all r . A\n"
         "DATABASE\n  r(c,a)\n  A0(a)\n  A0(b)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  ind:c\n  concept:B\n  concept:A\n",
         "separable with a helper role after reduce-role-helpers"},
        {"ex3",
         "# twin r-successors forced at a\n"
         "DIALECT\n  alc\nONTOLOGY\n"
         "  A sub (some r . B and some r . not B)\n"
         "DATABASE\n  A(a)\n  r(b,c)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  role:r\n",
         "FO-separable via twin successors; recorded verdict only"},
        {"ex4",
         "# value restriction visible in the signature\n"
         "DIALECT\n  alc\nONTOLOGY\n  A sub all r . B\n"
         "DATABASE\n  A(a)\n  C(b)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  role:r\n  concept:B\n",
         "separable with all r.B; not UCQ-separable; not strongly separable"},
        {"ex5",
         "# joint r/s successor with a guarded filler\n"
         "DIALECT\n  alc\nONTOLOGY\n  B sub all t . A\n"
         "DATABASE\n  r(a,c)\n  s(a,c)\n  B(c)\n  r(b1,d)\n  s(b1,d)\n  r(b2,e)\n  s(b2,f)\n"
         "  B(e)\n  B(f)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b1\n  b2\nSIGNATURE\n"
         "  role:r\n  role:s\n  role:t\n  concept:A\n",
         "UCQ_r separable with the joint-successor query"},
        {"ex6",
         "# nominal loop at a against a plain self-loop at b\n"
         "DIALECT\n  alco\nONTOLOGY\n"
         "  {a} sub all r . {a}\n  top sub some r . top\n"
         "DATABASE\n  A(a)\n  r(b,b)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  role:r\n",
         "projectively separable with X -> all r.X; UCQ_r inseparable"},
        {"ex7",
         "# strong separation by the negated self-loop\n"
         "DIALECT\n  alc\nONTOLOGY\n  A sub all r . not A\n"
         "DATABASE\n  A(a)\n  r(b,b)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  role:r\n",
         "strongly FO-separable with not r(x,x); strongly ALCI-inseparable"},
        {"ex8",
         "# disjointness gives a strong concept separator\n"
         "DIALECT\n  alc\nONTOLOGY\n  A sub not B\n"
         "DATABASE\n  A(a)\n  B(b)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  concept:A\n  concept:B\n",
         "strongly separable with A"},
        {"ex9a",
         "# forest-model counterexample base: concept satisfiable, but never in\n"
         "# a finite-outdegree forest model\n"
         "DIALECT\n  alcio\nONTOLOGY\nDATABASE\n  A(a)\n"
         "POSITIVE\n  a\nNEGATIVE\n  a\nSIGNATURE\n  concept:A\n",
         "pair with concept {a} and A and some s.top and all s.(not A and some r. some inv(s).{a})"},
        {"ex9b",
         "# weak ALCIO separability is out of scope: the forest-model\n"
         "# characterization fails on this KB\n"
         "DIALECT\n  alcio\nONTOLOGY\n"
         "  C sub ((some inv(r0) . A) -> A0)\n"
         "  C sub (some s . top and all s . (((not C and not A) and not B) and some r . "
         "(((not C and not A) and not B) and some inv(s) . top)))\n"
         "  A0 sub (some s . some inv(s) . not A0 or some s . some r . some inv(s) . not A0)\n"
         "  (B or A) sub not C\n"
         "DATABASE\n  A(a)\n  B(b)\n  C(c)\n  r0(b,c)\n"
         "POSITIVE\n  a\nNEGATIVE\n  b\nSIGNATURE\n  ind:c\n  role:r0\n  role:s\n  role:r\n",
         "weak-sep requests for ALCIO are refused with a documented error"},
    };
    return corpus;
}

const Fixture& fixture(const std::string& name) {
    for (const auto& f : fixtures())
        if (f.name == name) return f;
    throw std::invalid_argument("unknown fixture: " + name);
}

void write_fixtures(const std::string& directory) {
    std::filesystem::create_directories(directory);
    for (const auto& f : fixtures()) {
        std::ofstream out(directory + "/" + f.name + ".kb");
        out << f.kb_text;
    }
}

} // namespace dlsep
