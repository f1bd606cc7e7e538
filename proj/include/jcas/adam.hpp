// Adam with bias correction over MlpParams-shaped parameter blocks.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jcas/error.hpp"
#include "jcas/mlp.hpp"

namespace jcas {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::uint64_t step = 0;
    std::vector<MlpParams::Layer> m, v; // same shapes as the parameters

    static AdamState init(const MlpParams& params, AdamConfig cfg = {}) {
        AdamState s;
        s.cfg = cfg;
        s.m.resize(params.layers.size());
        s.v.resize(params.layers.size());
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            s.m[l].w = RealMatrix(params.layers[l].w.rows(), params.layers[l].w.cols());
            s.m[l].b.assign(params.layers[l].b.size(), 0.0);
            s.v[l].w = RealMatrix(params.layers[l].w.rows(), params.layers[l].w.cols());
            s.v[l].b.assign(params.layers[l].b.size(), 0.0);
        }
        return s;
    }
};

namespace detail {

inline void adam_update(double& p, double& m, double& v, double g, const AdamConfig& c,
                        double bc1, double bc2) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    p -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
}

} // namespace detail

// One optimizer step.  `label` names the parameter block in diagnostics.
inline void adam_step(AdamState& state, MlpParams& params, const MlpGradients& grads,
                      const std::string& label = "mlp") {
    if (grads.layers.size() != params.layers.size())
        throw DomainError("adam_step: gradient/parameter layer mismatch");

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& gl = grads.layers[l];
        for (std::size_t i = 0; i < gl.w.size(); ++i)
            if (!std::isfinite(gl.w.data()[i]))
                throw TrainingError("adam_step: non-finite weight gradient in " + label +
                                    " layer " + std::to_string(l));
        for (double g : gl.b)
            if (!std::isfinite(g))
                throw TrainingError("adam_step: non-finite bias gradient in " + label +
                                    " layer " + std::to_string(l));
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, t);

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& pw = params.layers[l].w;
        const auto& gw = grads.layers[l].w;
        for (std::size_t i = 0; i < pw.size(); ++i)
            detail::adam_update(pw.data()[i], state.m[l].w.data()[i], state.v[l].w.data()[i],
                                gw.data()[i], state.cfg, bc1, bc2);
        auto& pb = params.layers[l].b;
        const auto& gb = grads.layers[l].b;
        for (std::size_t i = 0; i < pb.size(); ++i)
            detail::adam_update(pb[i], state.m[l].b[i], state.v[l].b[i], gb[i], state.cfg, bc1,
                                bc2);
    }
    if (!params.all_finite())
        throw TrainingError("adam_step: parameters became non-finite in " + label);
}

} // namespace jcas
