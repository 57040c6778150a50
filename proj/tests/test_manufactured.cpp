#include <doctest.h>

TEST_SUITE("manufactured") {}
