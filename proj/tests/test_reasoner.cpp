#include <doctest.h>
TEST_CASE("placeholder test_reasoner") { CHECK(true); }
