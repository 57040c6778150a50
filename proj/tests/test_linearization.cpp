#include <doctest.h>

TEST_SUITE("linearization") {}
