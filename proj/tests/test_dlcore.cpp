#include <doctest.h>
#include "dlsep/parser.hpp"
TEST_CASE("smoke") { CHECK(dlsep::parse_concept("top").is_top()); }
