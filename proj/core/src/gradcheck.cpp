#include "gzsl/gradcheck.hpp"

#include <cmath>

#include "gzsl/error.hpp"

namespace gzsl::ad {

namespace {
constexpr double kDenomFloor = 1e-4;
} // namespace

GradCheckReport gradcheck(const std::function<Tensor()>& loss_builder,
                          const std::vector<NamedParam>& params, double eps) {
    if (params.empty()) throw ContractError("gradcheck with no parameters");
    if (!(eps > 0.0)) throw ContractError("gradcheck: eps must be positive");

    for (const NamedParam& p : params) {
        if (!p.tensor.requires_grad())
            throw ContractError("gradcheck: parameter '" + p.name +
                                "' does not require gradients");
        const_cast<Tensor&>(p.tensor).zero_grad();
    }

    Tensor loss = loss_builder();
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const NamedParam& p : params) {
        const auto g = p.tensor.grad();
        analytic.emplace_back(g.begin(), g.end());
    }

    GradCheckReport report;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor t = params[k].tensor;
        auto v = t.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double saved = v[i];
            v[i] = saved + eps;
            const double f_plus = loss_builder().value();
            v[i] = saved - eps;
            const double f_minus = loss_builder().value();
            v[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
                throw NumericError("gradcheck: non-finite loss while probing parameter '" +
                                   params[k].name + "' entry " + std::to_string(i));
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            // Central differences carry ~1e-11 absolute noise (roundoff over
            // 2*eps plus truncation), so ratios against denominators near that
            // scale are meaningless. The floor keeps near-zero gradients from
            // turning noise into spurious failures; any genuine error larger
            // than floor*tolerance still registers.
            const double denom = std::max({kDenomFloor, std::fabs(analytic[k][i]),
                                           std::fabs(numeric)});
            const double rel = std::fabs(analytic[k][i] - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = params[k].name;
                report.worst_index = i;
            }
        }
    }
    return report;
}

} // namespace gzsl::ad
