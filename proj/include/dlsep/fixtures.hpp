#ifndef DLSEP_FIXTURES_HPP
#define DLSEP_FIXTURES_HPP

#include <string>
#include <vector>

namespace dlsep {

struct Fixture {
    std::string name;
    std::string kb_text;
    std::string notes;
};

// The installed example corpus (ex1..ex9b).
const std::vector<Fixture>& fixtures();
const Fixture& fixture(const std::string& name);

// Writes the corpus as .kb files into a directory.
void write_fixtures(const std::string& directory);

} // namespace dlsep

#endif
