#include <catch2/catch_amalgamated.hpp>

TEST_CASE("placeholder: harness suite pending") { SUCCEED(); }
