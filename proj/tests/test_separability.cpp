#include <doctest.h>
TEST_CASE("placeholder test_separability") { CHECK(true); }
