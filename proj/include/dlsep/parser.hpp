#ifndef DLSEP_PARSER_HPP
#define DLSEP_PARSER_HPP

#include <optional>
#include <string>

#include "dlsep/kb.hpp"

namespace dlsep {

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + msg),
          line(line), column(column) {}
};

struct ParsedKB {
    LabeledKB kb;
    // Contents of the SIGNATURE section, when present.
    std::optional<Signature> sigma;
};

ParsedKB parse_kb(const std::string& text);
ParsedKB parse_kb_file(const std::string& path);

// Standalone concept parser (used by the CLI for --formula arguments).
Concept parse_concept(const std::string& text);

// Reads just the ONTOLOGY section of a KB file (for reduce-ce inputs).
Ontology parse_ontology_file(const std::string& path);

std::string print_kb(const LabeledKB& kb, const std::optional<Signature>& sigma = {});
std::string print_concept(const Concept& c);

} // namespace dlsep

#endif
