#pragma once

#include <string>
#include <vector>

namespace cpsdyn {

/// Deliberate defects for exercising the suite itself.
struct ValidationFaults {
    bool heaviside_flip = false;    // K11 = h(y) with h(0) = 1, overlapping K22 at y = 0
    bool elliptic_modulus = false;  // Case 2 reference built from K(2y), E(2y)
};

struct SuiteCheck {
    std::string group;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
};

struct SuiteReport {
    std::vector<SuiteCheck> checks;

    bool ok() const;
    const SuiteCheck* find(const std::string& group, const std::string& name) const;
    /// "group,check,status,measured,tolerance" rows with a header line.
    std::string to_csv() const;
};

/// Runs the invariant checks of every module; a few seconds on one core.
SuiteReport run_validation_suite(const ValidationFaults& faults = {});

}  // namespace cpsdyn
