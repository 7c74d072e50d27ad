#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gzsl/tensor.hpp"

namespace gzsl::ad {

struct NamedParam {
    std::string name;
    Tensor tensor;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
};

// Compares reverse-mode gradients against central finite differences.
// loss_builder must rebuild the same scalar loss on every call (any noise it
// uses has to be fixed up front). Relative error per entry is
// |analytic - numeric| / max(1e-4, |analytic|, |numeric|); the floor keeps
// entries whose true gradient sits at the finite-difference noise scale from
// reporting noise as disagreement.
GradCheckReport gradcheck(const std::function<Tensor()>& loss_builder,
                          const std::vector<NamedParam>& params, double eps = 1e-5);

} // namespace gzsl::ad
