#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cellcycle {

/// Outcome of a numerical inequality or identity check.
struct ResidualReport {
    std::string check;
    double max_violation = 0.0;        // signed; <= tolerance passes
    std::size_t step = 0;              // location of the worst violation
    std::size_t phase = 0;
    std::size_t cell = 0;
    double integrated_violation = 0.0; // sum of positive violations times the cell volume
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

}  // namespace cellcycle
