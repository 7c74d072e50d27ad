#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gzsl/gradcheck.hpp"

namespace gzsl {

struct GradCheckCase {
    std::string name;
    std::function<ad::GradCheckReport()> run;
};

// Finite-difference checks for every training loss: the four VAE terms and
// their weighted sum, the three adversarial terms and their sum, and the two
// classifier losses. Toy model sizes, all randomness fixed by the seed.
std::vector<GradCheckCase> standard_gradcheck_cases(std::uint64_t seed);

struct GradCheckOutcome {
    std::string name;
    double max_rel_error = 0.0;
    std::string worst_param;
    bool passed = false;
};

std::vector<GradCheckOutcome> run_gradcheck_cases(const std::vector<GradCheckCase>& cases,
                                                  double tolerance);

} // namespace gzsl
