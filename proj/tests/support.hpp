#pragma once

#include <fstream>
#include <string>

#include "phicredit/curves.hpp"

namespace test_support {

inline std::string ford_path() { return std::string(PHICREDIT_DATA_DIR) + "/ford_2018-11-12.csv"; }

inline phicredit::SurvivalCurve ford_curve() {
    std::ifstream in(ford_path());
    const auto quotes = phicredit::parse_quotes(in);
    return phicredit::bootstrap(quotes);
}

}  // namespace test_support
