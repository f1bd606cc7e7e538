// Dense feed-forward networks with ELU hidden units and four output heads,
// plus exact reverse-mode gradients.  Everything is batched: rows are samples.
//
// Loop shapes are AXPY-style (no inner-product reductions) so they vectorize
// without reassociation flags, and accumulation order is fixed, which keeps
// results bit-reproducible.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jcas/error.hpp"
#include "jcas/real_matrix.hpp"
#include "jcas/rng.hpp"

namespace jcas {

enum class Head {
    linear,          // raw outputs (LLRs)
    sigmoid_offset,  // sigmoid(raw + per-sample offset) (detector)
    scaled_tanh,     // (pi/2) tanh(raw) (angle)
    beam_normalized, // raw / ||raw||_2 per sample (beamformer)
};

struct MlpSpec {
    std::vector<std::size_t> widths; // input, hidden..., output
    Head head = Head::linear;

    std::size_t input_width() const { return widths.front(); }
    std::size_t output_width() const { return widths.back(); }
    std::size_t n_layers() const { return widths.size() - 1; }

    void validate() const {
        if (widths.size() < 3) throw DomainError("MlpSpec: need at least one hidden layer");
        for (std::size_t w : widths)
            if (w == 0) throw DomainError("MlpSpec: zero layer width");
        if (head == Head::beam_normalized && widths.back() % 2 != 0)
            throw DomainError("MlpSpec: beam head needs an even output width");
    }

    bool operator==(const MlpSpec&) const = default;
};

struct MlpParams {
    struct Layer {
        RealMatrix w;          // out x in, row-major
        std::vector<double> b; // out
        bool operator==(const Layer&) const = default;
    };
    std::vector<Layer> layers;

    bool operator==(const MlpParams&) const = default;

    void validate_shapes(const MlpSpec& spec) const {
        if (layers.size() != spec.n_layers()) throw DomainError("MlpParams: layer count mismatch");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (layers[l].w.rows() != spec.widths[l + 1] || layers[l].w.cols() != spec.widths[l] ||
                layers[l].b.size() != spec.widths[l + 1])
                throw DomainError("MlpParams: shape mismatch at layer " + std::to_string(l));
        }
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (const Layer& l : layers) n += l.w.size() + l.b.size();
        return n;
    }

    bool all_finite() const {
        for (const Layer& l : layers) {
            for (std::size_t i = 0; i < l.w.size(); ++i)
                if (!std::isfinite(l.w.data()[i])) return false;
            for (double b : l.b)
                if (!std::isfinite(b)) return false;
        }
        return true;
    }
};

// Uniform init in +-sqrt(6/(fan_in+fan_out)), biases zero.
inline MlpParams glorot_init(const MlpSpec& spec, SeededRng& rng) {
    spec.validate();
    MlpParams p;
    p.layers.resize(spec.n_layers());
    for (std::size_t l = 0; l < spec.n_layers(); ++l) {
        const std::size_t fan_in = spec.widths[l];
        const std::size_t fan_out = spec.widths[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        p.layers[l].w = RealMatrix(fan_out, fan_in);
        for (std::size_t i = 0; i < p.layers[l].w.size(); ++i)
            p.layers[l].w.data()[i] = rng.uniform(-bound, bound);
        p.layers[l].b.assign(fan_out, 0.0);
    }
    return p;
}

namespace detail {

inline double elu(double x) noexcept { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) noexcept { return x > 0.0 ? 1.0 : std::exp(x); }

// pre = h W^T + b, AXPY over the input index.
inline void affine_forward(const RealMatrix& h, const MlpParams::Layer& layer, RealMatrix& pre) {
    const std::size_t b = h.rows();
    const std::size_t in = h.cols();
    const std::size_t out = layer.w.rows();
    // Transposed weight copy so the inner loop walks contiguous memory.
    RealMatrix wt(in, out);
    for (std::size_t o = 0; o < out; ++o)
        for (std::size_t j = 0; j < in; ++j) wt(j, o) = layer.w(o, j);

    pre = RealMatrix(b, out);
    for (std::size_t i = 0; i < b; ++i) {
        double* dst = pre.data() + i * out;
        for (std::size_t o = 0; o < out; ++o) dst[o] = layer.b[o];
        const double* src = h.data() + i * in;
        for (std::size_t j = 0; j < in; ++j) {
            const double a = src[j];
            if (a == 0.0) continue;
            const double* wrow = wt.data() + j * out;
            for (std::size_t o = 0; o < out; ++o) dst[o] += a * wrow[o];
        }
    }
}

} // namespace detail

struct MlpCache {
    RealMatrix input;
    std::vector<RealMatrix> pre; // pre-activation per layer; last entry = raw head input
    std::vector<double> offsets; // per-sample pre-sigmoid offsets (may be empty)
};

// Batched forward pass.  `offsets` applies to the sigmoid head only (one per
// sample; empty means zero).
inline RealMatrix forward(const MlpSpec& spec, const MlpParams& params, const RealMatrix& x,
                          MlpCache* cache = nullptr, std::span<const double> offsets = {}) {
    spec.validate();
    params.validate_shapes(spec);
    if (x.cols() != spec.input_width()) throw DomainError("forward: input width mismatch");
    if (!offsets.empty() && spec.head != Head::sigmoid_offset)
        throw DomainError("forward: offsets only apply to the sigmoid head");
    if (!offsets.empty() && offsets.size() != x.rows())
        throw DomainError("forward: offset count != batch size");

    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->offsets.assign(offsets.begin(), offsets.end());
    }

    RealMatrix h = x;
    RealMatrix pre;
    for (std::size_t l = 0; l < spec.n_layers(); ++l) {
        detail::affine_forward(h, params.layers[l], pre);
        if (cache) cache->pre.push_back(pre);
        if (l + 1 < spec.n_layers()) {
            h = RealMatrix(pre.rows(), pre.cols());
            for (std::size_t i = 0; i < pre.size(); ++i)
                h.data()[i] = detail::elu(pre.data()[i]);
        } else {
            h = std::move(pre);
        }
    }

    // Output head.
    switch (spec.head) {
        case Head::linear:
            break;
        case Head::scaled_tanh:
            for (std::size_t i = 0; i < h.size(); ++i)
                h.data()[i] = 1.5707963267948966 * std::tanh(h.data()[i]);
            break;
        case Head::sigmoid_offset:
            for (std::size_t r = 0; r < h.rows(); ++r) {
                const double off = offsets.empty() ? 0.0 : offsets[r];
                for (std::size_t c = 0; c < h.cols(); ++c) {
                    const double t = h(r, c) + off;
                    h(r, c) = 1.0 / (1.0 + std::exp(-t));
                }
            }
            break;
        case Head::beam_normalized:
            for (std::size_t r = 0; r < h.rows(); ++r) {
                double nn = 0.0;
                for (std::size_t c = 0; c < h.cols(); ++c) nn += h(r, c) * h(r, c);
                if (!(nn > 0.0))
                    throw NumericalError("forward: beam head got a zero raw vector");
                const double inv = 1.0 / std::sqrt(nn);
                for (std::size_t c = 0; c < h.cols(); ++c) h(r, c) *= inv;
            }
            break;
    }
    return h;
}

// Convenience single-sample forward.
inline std::vector<double> forward_one(const MlpSpec& spec, const MlpParams& params,
                                       std::span<const double> x, double offset = 0.0) {
    RealMatrix in(1, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) in(0, i) = x[i];
    std::vector<double> off;
    if (spec.head == Head::sigmoid_offset) off.assign(1, offset);
    const RealMatrix out = forward(spec, params, in, nullptr, off);
    return {out.data(), out.data() + out.size()};
}

struct MlpGradients {
    std::vector<MlpParams::Layer> layers;
    RealMatrix input; // dL/dx

    void accumulate(const MlpGradients& other) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            for (std::size_t i = 0; i < layers[l].w.size(); ++i)
                layers[l].w.data()[i] += other.layers[l].w.data()[i];
            for (std::size_t i = 0; i < layers[l].b.size(); ++i)
                layers[l].b[i] += other.layers[l].b[i];
        }
    }

    void scale(double s) {
        for (auto& l : layers) {
            for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] *= s;
            for (double& b : l.b) b *= s;
        }
    }
};

inline MlpGradients zero_gradients(const MlpSpec& spec) {
    MlpGradients g;
    g.layers.resize(spec.n_layers());
    for (std::size_t l = 0; l < spec.n_layers(); ++l) {
        g.layers[l].w = RealMatrix(spec.widths[l + 1], spec.widths[l]);
        g.layers[l].b.assign(spec.widths[l + 1], 0.0);
    }
    return g;
}

// Exact reverse-mode gradients through the head, the ELU stack and the affine
// layers.  `upstream` is dL/d(output), one row per sample.
inline MlpGradients backward(const MlpSpec& spec, const MlpParams& params, const MlpCache& cache,
                             const RealMatrix& upstream) {
    params.validate_shapes(spec);
    const std::size_t batch = cache.input.rows();
    if (upstream.rows() != batch || upstream.cols() != spec.output_width())
        throw DomainError("backward: upstream shape mismatch");
    if (cache.pre.size() != spec.n_layers()) throw DomainError("backward: stale cache");

    const RealMatrix& raw = cache.pre.back();
    RealMatrix g = upstream; // becomes d L / d raw
    switch (spec.head) {
        case Head::linear:
            break;
        case Head::scaled_tanh:
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double t = std::tanh(raw.data()[i]);
                g.data()[i] *= 1.5707963267948966 * (1.0 - t * t);
            }
            break;
        case Head::sigmoid_offset:
            for (std::size_t r = 0; r < g.rows(); ++r) {
                const double off = cache.offsets.empty() ? 0.0 : cache.offsets[r];
                for (std::size_t c = 0; c < g.cols(); ++c) {
                    const double p = 1.0 / (1.0 + std::exp(-(raw(r, c) + off)));
                    g(r, c) *= p * (1.0 - p);
                }
            }
            break;
        case Head::beam_normalized:
            for (std::size_t r = 0; r < g.rows(); ++r) {
                double nn = 0.0;
                for (std::size_t c = 0; c < g.cols(); ++c) nn += raw(r, c) * raw(r, c);
                const double norm = std::sqrt(nn);
                double dot = 0.0;
                for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * raw(r, c) / norm;
                for (std::size_t c = 0; c < g.cols(); ++c)
                    g(r, c) = (g(r, c) - dot * raw(r, c) / norm) / norm;
            }
            break;
    }

    MlpGradients grads = zero_gradients(spec);
    grads.input = RealMatrix(batch, spec.input_width());

    for (std::size_t l = spec.n_layers(); l-- > 0;) {
        // Activations feeding this layer.
        RealMatrix h;
        const RealMatrix* hp;
        if (l == 0) {
            hp = &cache.input;
        } else {
            const RealMatrix& pre = cache.pre[l - 1];
            h = RealMatrix(pre.rows(), pre.cols());
            for (std::size_t i = 0; i < pre.size(); ++i)
                h.data()[i] = detail::elu(pre.data()[i]);
            hp = &h;
        }
        const std::size_t in = hp->cols();
        const std::size_t out = g.cols();

        MlpParams::Layer& gl = grads.layers[l];
        for (std::size_t i = 0; i < batch; ++i) {
            const double* hrow = hp->data() + i * in;
            const double* grow = g.data() + i * out;
            for (std::size_t o = 0; o < out; ++o) {
                const double go = grow[o];
                if (go == 0.0) continue;
                gl.b[o] += go;
                double* wrow = gl.w.data() + o * in;
                for (std::size_t j = 0; j < in; ++j) wrow[j] += go * hrow[j];
            }
        }

        // Downstream gradient.
        RealMatrix gh(batch, in);
        for (std::size_t i = 0; i < batch; ++i) {
            double* dst = gh.data() + i * in;
            const double* grow = g.data() + i * out;
            for (std::size_t o = 0; o < out; ++o) {
                const double go = grow[o];
                if (go == 0.0) continue;
                const double* wrow = params.layers[l].w.data() + o * in;
                for (std::size_t j = 0; j < in; ++j) dst[j] += go * wrow[j];
            }
        }
        if (l == 0) {
            grads.input = std::move(gh);
        } else {
            const RealMatrix& pre = cache.pre[l - 1];
            g = RealMatrix(batch, in);
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data()[i] = gh.data()[i] * detail::elu_grad(pre.data()[i]);
        }
    }
    return grads;
}

// ---- flat parameter views (finite-difference harnesses, optimizers) -------

inline std::vector<double> flatten_params(const MlpParams& p) {
    std::vector<double> out;
    out.reserve(p.count());
    for (const auto& l : p.layers) {
        out.insert(out.end(), l.w.data(), l.w.data() + l.w.size());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
    return out;
}

inline void unflatten_params(std::span<const double> flat, MlpParams& p) {
    std::size_t idx = 0;
    for (auto& l : p.layers) {
        for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = flat[idx++];
        for (double& b : l.b) b = flat[idx++];
    }
    if (idx != flat.size()) throw DomainError("unflatten_params: size mismatch");
}

inline std::vector<double> flatten_gradients(const MlpGradients& g) {
    std::vector<double> out;
    for (const auto& l : g.layers) {
        out.insert(out.end(), l.w.data(), l.w.data() + l.w.size());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
    return out;
}

} // namespace jcas
