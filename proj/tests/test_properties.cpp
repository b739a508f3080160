#include <doctest.h>

#include "property_checks.hpp"

TEST_CASE("randomised invariants") {
    for (const auto& report : props::run_all(20000, 4242)) {
        INFO(report.name << ": " << report.detail);
        CHECK(report.ok);
    }
}
