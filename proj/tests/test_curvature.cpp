#include <doctest.h>

TEST_SUITE("curvature") {}
