// Catch2 v3 amalgamated implementation, compiled once and linked into both
// test binaries. Its default main() drives the suites.
#include <catch2/catch_amalgamated.cpp>
