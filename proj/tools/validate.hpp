#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "setup.hpp"

namespace phicredit::cli {

struct CheckRow {
    std::string suite;
    std::string check;
    double value;
    double threshold;
    bool pass;
    /// Failures are reported as warnings and do not change the exit code.
    bool advisory = false;
};

const std::vector<std::string>& validation_suites();

/// Runs one suite, or all of them for "all".
std::vector<CheckRow> run_validation(const Context& context, const std::string& suite);

}  // namespace phicredit::cli
