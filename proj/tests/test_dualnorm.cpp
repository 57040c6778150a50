#include <doctest.h>

TEST_SUITE("dualnorm") {}
