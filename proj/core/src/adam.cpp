#include "gzsl/adam.hpp"

#include <algorithm>
#include <cmath>

#include "gzsl/error.hpp"
#include "gzsl/log.hpp"

namespace gzsl::ad {

AdamState make_adam(const std::vector<Tensor>& params, double lr, double beta1,
                    double beta2, double epsilon) {
    if (!(lr > 0.0)) throw ContractError("adam: learning rate must be positive");
    AdamState st;
    st.lr = lr;
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.epsilon = epsilon;
    st.first_moment.reserve(params.size());
    st.second_moment.reserve(params.size());
    for (const Tensor& p : params) {
        st.first_moment.emplace_back(p.size(), 0.0);
        st.second_moment.emplace_back(p.size(), 0.0);
    }
    return st;
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
    if (params.empty()) {
        log_info("adam_step called with an empty parameter list; nothing to do");
        return;
    }
    if (params.size() != state.first_moment.size())
        throw ContractError("adam_step: state tracks " +
                            std::to_string(state.first_moment.size()) +
                            " parameters, got " + std::to_string(params.size()));
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto v = params[k].values();
        const auto g = params[k].grad();
        auto& m1 = state.first_moment[k];
        auto& m2 = state.second_moment[k];
        if (m1.size() != v.size())
            throw ContractError("adam_step: parameter " + std::to_string(k) +
                                " changed size since state creation");
        for (std::size_t i = 0; i < v.size(); ++i) {
            m1[i] = state.beta1 * m1[i] + (1.0 - state.beta1) * g[i];
            m2[i] = state.beta2 * m2[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m1[i] / bc1;
            const double vhat = m2[i] / bc2;
            v[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

void clip_weights(std::vector<Tensor>& params, double c) {
    if (!(c > 0.0)) throw ContractError("clip_weights: bound must be positive");
    for (Tensor& p : params) {
        for (double& x : p.values()) x = std::clamp(x, -c, c);
    }
}

} // namespace gzsl::ad
