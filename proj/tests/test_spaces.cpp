#include <doctest.h>

TEST_SUITE("spaces") {}
