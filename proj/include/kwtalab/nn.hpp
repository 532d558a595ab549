#pragma once

// Layers, models and hand-written forward/backward passes. Supported
// layers: dense, conv2d (cross-correlation, im2col), relu, kwta, flatten.
// Backward exposes the gradient with respect to the network input, which
// the attack routines consume.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kwtalab/kwta.hpp"
#include "kwtalab/tensor.hpp"

namespace kwtalab {

enum class LayerKind { dense, conv2d, relu, kwta, flatten };

struct LayerSpec {
    LayerKind kind;
    std::size_t in_dim = 0, out_dim = 0;                               // dense
    std::size_t in_channels = 0, out_channels = 0;                     // conv2d
    std::size_t kernel_size = 0, stride = 1, padding = 0;              // conv2d
    double gamma = 0.0;                                                // kwta

    static LayerSpec dense(std::size_t in, std::size_t out) {
        LayerSpec s{LayerKind::dense};
        s.in_dim = in;
        s.out_dim = out;
        return s;
    }
    static LayerSpec conv2d(std::size_t in_c, std::size_t out_c, std::size_t k,
                            std::size_t stride = 1, std::size_t padding = 0) {
        LayerSpec s{LayerKind::conv2d};
        s.in_channels = in_c;
        s.out_channels = out_c;
        s.kernel_size = k;
        s.stride = stride;
        s.padding = padding;
        return s;
    }
    static LayerSpec relu() { return LayerSpec{LayerKind::relu}; }
    static LayerSpec kwta(double gamma) {
        LayerSpec s{LayerKind::kwta};
        s.gamma = gamma;
        return s;
    }
    static LayerSpec flatten() { return LayerSpec{LayerKind::flatten}; }
};

struct LayerParams {
    Tensor weights;  // dense: [out,in]; conv2d: [outC,inC,K,K]
    Tensor bias;     // dense: [out];    conv2d: [outC]
    bool present = false;
};

/// Ordered layer list with parameter blocks. Parameter mutation bumps
/// `version`, which invalidates previously recorded traces.
struct Model {
    std::vector<LayerSpec> layers;
    std::vector<LayerParams> params;
    Shape input_shape;
    std::string name;
    std::uint64_t creation_seed = 0;
    std::uint64_t version = 0;

    // counts backward() invocations; lets black-box tests assert that a
    // target model's gradients were never queried
    std::shared_ptr<std::atomic<std::uint64_t>> grad_calls =
        std::make_shared<std::atomic<std::uint64_t>>(0);

    bool has_kwta() const {
        for (const auto& l : layers)
            if (l.kind == LayerKind::kwta) return true;
        return false;
    }

    /// Lock-step sparsity update on every kwta layer.
    void set_gamma(double g) {
        if (!(g > 0.0) || g > 1.0) throw std::invalid_argument("set_gamma: gamma out of (0,1]");
        for (auto& l : layers)
            if (l.kind == LayerKind::kwta) l.gamma = g;
        ++version;
    }

    double gamma() const {
        for (const auto& l : layers)
            if (l.kind == LayerKind::kwta) return l.gamma;
        return 1.0;
    }
};

namespace detail {

inline Shape conv_output_shape(const LayerSpec& s, const Shape& in) {
    if (in.size() != 3 || in[0] != s.in_channels)
        throw std::invalid_argument("conv2d: expected input [C,H,W] with C=" +
                                    std::to_string(s.in_channels) + ", got " + shape_str(in));
    if (in[1] + 2 * s.padding < s.kernel_size || in[2] + 2 * s.padding < s.kernel_size)
        throw std::invalid_argument("conv2d: kernel larger than padded input");
    const std::size_t ho = (in[1] + 2 * s.padding - s.kernel_size) / s.stride + 1;
    const std::size_t wo = (in[2] + 2 * s.padding - s.kernel_size) / s.stride + 1;
    return {s.out_channels, ho, wo};
}

inline Shape layer_output_shape(const LayerSpec& s, const Shape& in, std::size_t layer_index) {
    switch (s.kind) {
        case LayerKind::dense:
            if (in.size() != 1 || in[0] != s.in_dim)
                throw std::invalid_argument("model build: layer " + std::to_string(layer_index) +
                                            " (dense) expects [" + std::to_string(s.in_dim) +
                                            "], got " + shape_str(in));
            return {s.out_dim};
        case LayerKind::conv2d:
            return conv_output_shape(s, in);
        case LayerKind::relu:
        case LayerKind::kwta:
            return in;
        case LayerKind::flatten:
            return {shape_numel(in)};
    }
    throw std::logic_error("unreachable");
}

// unrolls [C,H,W] into a [C*K*K, Ho*Wo] patch matrix
inline Tensor im2col(const Tensor& x, std::size_t k, std::size_t stride, std::size_t pad,
                     std::size_t ho, std::size_t wo) {
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor col({c * k * k, ho * wo});
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* plane = x.data() + ch * h * w;
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                double* crow = col.data() + ((ch * k + ki) * k + kj) * (ho * wo);
                for (std::size_t oi = 0; oi < ho; ++oi) {
                    const std::ptrdiff_t ii =
                        static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(pad);
                    if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t oj = 0; oj < wo; ++oj) {
                        const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(oj * stride + kj) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
                        crow[oi * wo + oj] = plane[ii * w + jj];
                    }
                }
            }
        }
    }
    return col;
}

inline void col2im(const Tensor& col, std::size_t k, std::size_t stride, std::size_t pad,
                   std::size_t ho, std::size_t wo, Tensor& x_grad) {
    const std::size_t c = x_grad.dim(0), h = x_grad.dim(1), w = x_grad.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double* plane = x_grad.data() + ch * h * w;
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
                const double* crow = col.data() + ((ch * k + ki) * k + kj) * (ho * wo);
                for (std::size_t oi = 0; oi < ho; ++oi) {
                    const std::ptrdiff_t ii =
                        static_cast<std::ptrdiff_t>(oi * stride + ki) - static_cast<std::ptrdiff_t>(pad);
                    if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t oj = 0; oj < wo; ++oj) {
                        const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(oj * stride + kj) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
                        plane[ii * w + jj] += crow[oi * wo + oj];
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Standalone conv2d forward (cross-correlation convention).
inline Tensor conv2d_forward(const Tensor& x, const Tensor& weights, const Tensor& bias,
                             std::size_t stride, std::size_t padding) {
    if (x.rank() != 3 || weights.rank() != 4 || weights.dim(1) != x.dim(0))
        throw std::invalid_argument("conv2d_forward: shape mismatch");
    const std::size_t out_c = weights.dim(0), k = weights.dim(2);
    if (x.dim(1) + 2 * padding < k || x.dim(2) + 2 * padding < k)
        throw std::invalid_argument("conv2d_forward: kernel larger than padded input");
    const std::size_t ho = (x.dim(1) + 2 * padding - k) / stride + 1;
    const std::size_t wo = (x.dim(2) + 2 * padding - k) / stride + 1;
    Tensor col = detail::im2col(x, k, stride, padding, ho, wo);
    Tensor wmat = weights.reshaped({out_c, weights.dim(1) * k * k});
    Tensor ymat = matmul(wmat, col);  // [outC, Ho*Wo]
    for (std::size_t c = 0; c < out_c; ++c) {
        double* row = ymat.data() + c * ho * wo;
        for (std::size_t i = 0; i < ho * wo; ++i) row[i] += bias[c];
    }
    return ymat.reshaped({out_c, ho, wo});
}

/// Per-layer inputs, pre-activations where relevant, activation patterns at
/// kwta layers, and the final logits. The pattern set is exactly the linear
/// region the input lies in.
struct ForwardTrace {
    std::vector<Tensor> inputs;  // inputs[i] = input to layer i
    std::vector<std::optional<ActivationPattern>> patterns;
    Tensor logits;
    std::uint64_t model_version = 0;
};

struct Gradients {
    std::vector<LayerParams> params;  // same layout as Model::params
    Tensor input;
};

inline Model build_model(std::vector<LayerSpec> specs, Shape input_shape, Rng& rng,
                         std::string name = "model") {
    Model m;
    m.layers = std::move(specs);
    m.input_shape = std::move(input_shape);
    m.name = std::move(name);
    m.creation_seed = rng.seed();
    Shape cur = m.input_shape;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        if (s.kind == LayerKind::kwta && (!(s.gamma > 0.0) || s.gamma > 1.0))
            throw std::invalid_argument("model build: kwta gamma out of (0,1] at layer " +
                                        std::to_string(i));
        cur = detail::layer_output_shape(s, cur, i);
        LayerParams p;
        if (s.kind == LayerKind::dense) {
            // weights ~ N(0, 1/fan_out), biases zero
            p.weights = gaussian_matrix(s.out_dim, s.in_dim, 1.0 / static_cast<double>(s.out_dim), rng);
            p.bias = Tensor({s.out_dim});
            p.present = true;
        } else if (s.kind == LayerKind::conv2d) {
            const double fan_out = static_cast<double>(s.out_channels * s.kernel_size * s.kernel_size);
            Tensor w = gaussian_matrix(s.out_channels, s.in_channels * s.kernel_size * s.kernel_size,
                                       1.0 / fan_out, rng);
            p.weights = w.reshaped({s.out_channels, s.in_channels, s.kernel_size, s.kernel_size});
            p.bias = Tensor({s.out_channels});
            p.present = true;
        }
        m.params.push_back(std::move(p));
    }
    return m;
}

inline Shape output_shape(const Model& m) {
    Shape cur = m.input_shape;
    for (std::size_t i = 0; i < m.layers.size(); ++i)
        cur = detail::layer_output_shape(m.layers[i], cur, i);
    return cur;
}

inline ForwardTrace forward(const Model& m, const Tensor& x) {
    if (x.shape() != m.input_shape)
        throw std::invalid_argument("forward: input shape " + shape_str(x.shape()) +
                                    " does not match model input " + shape_str(m.input_shape));
    ForwardTrace tr;
    tr.model_version = m.version;
    Tensor cur = x;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        tr.inputs.push_back(cur);
        tr.patterns.emplace_back();
        switch (s.kind) {
            case LayerKind::dense: {
                Tensor y = matvec(m.params[i].weights, cur);
                for (std::size_t j = 0; j < y.size(); ++j) y[j] += m.params[i].bias[j];
                cur = std::move(y);
                break;
            }
            case LayerKind::conv2d:
                cur = conv2d_forward(cur, m.params[i].weights, m.params[i].bias, s.stride, s.padding);
                break;
            case LayerKind::relu: {
                Tensor y = cur;
                for (std::size_t j = 0; j < y.size(); ++j)
                    if (y[j] < 0.0) y[j] = 0.0;
                cur = std::move(y);
                break;
            }
            case LayerKind::kwta: {
                const std::size_t n = cur.size();
                const std::size_t k = k_from_gamma(s.gamma, n);
                Tensor flat = cur.reshaped({n});
                ActivationPattern pat = activation_pattern(flat, k);
                Tensor y = kwta_backward(flat, pat);  // winner mask == value pass-through
                tr.patterns.back() = std::move(pat);
                cur = y.reshaped(cur.shape());
                break;
            }
            case LayerKind::flatten:
                cur = cur.reshaped({cur.size()});
                break;
        }
    }
    tr.logits = std::move(cur);
    return tr;
}

/// Reverse accumulation over a recorded trace. Throws if the model was
/// mutated since the trace was taken.
inline Gradients backward(const Model& m, const ForwardTrace& tr, const Tensor& loss_grad) {
    if (tr.model_version != m.version)
        throw std::runtime_error("backward: stale trace (model mutated since forward)");
    m.grad_calls->fetch_add(1, std::memory_order_relaxed);
    Gradients g;
    g.params.resize(m.layers.size());
    Tensor grad = loss_grad;
    for (std::size_t ri = m.layers.size(); ri-- > 0;) {
        const LayerSpec& s = m.layers[ri];
        const Tensor& in = tr.inputs[ri];
        switch (s.kind) {
            case LayerKind::dense: {
                LayerParams& pg = g.params[ri];
                pg.present = true;
                pg.weights = Tensor({s.out_dim, s.in_dim});
                pg.bias = grad;
                for (std::size_t o = 0; o < s.out_dim; ++o) {
                    double* row = pg.weights.data() + o * s.in_dim;
                    const double go = grad[o];
                    for (std::size_t j = 0; j < s.in_dim; ++j) row[j] = go * in[j];
                }
                grad = matvec_transposed(m.params[ri].weights, grad);
                break;
            }
            case LayerKind::conv2d: {
                const std::size_t k = s.kernel_size, out_c = s.out_channels;
                const std::size_t ho = (in.dim(1) + 2 * s.padding - k) / s.stride + 1;
                const std::size_t wo = (in.dim(2) + 2 * s.padding - k) / s.stride + 1;
                Tensor col = detail::im2col(in, k, s.stride, s.padding, ho, wo);
                Tensor gmat = grad.reshaped({out_c, ho * wo});
                LayerParams& pg = g.params[ri];
                pg.present = true;
                pg.bias = Tensor({out_c});
                for (std::size_t c = 0; c < out_c; ++c) {
                    double acc = 0.0;
                    const double* row = gmat.data() + c * ho * wo;
                    for (std::size_t i = 0; i < ho * wo; ++i) acc += row[i];
                    pg.bias[c] = acc;
                }
                // gW = g_mat * col^T, accumulated without materializing col^T
                const std::size_t kk = s.in_channels * k * k;
                Tensor gw({out_c, kk});
                for (std::size_t c = 0; c < out_c; ++c) {
                    const double* grow = gmat.data() + c * ho * wo;
                    double* wrow = gw.data() + c * kk;
                    for (std::size_t p = 0; p < kk; ++p) {
                        const double* crow = col.data() + p * ho * wo;
                        double acc = 0.0;
                        for (std::size_t i = 0; i < ho * wo; ++i) acc += grow[i] * crow[i];
                        wrow[p] = acc;
                    }
                }
                pg.weights = gw.reshaped({out_c, s.in_channels, k, k});
                Tensor wmat = m.params[ri].weights.reshaped({out_c, kk});
                // gcol = W^T * g_mat
                Tensor gcol({kk, ho * wo});
                for (std::size_t c = 0; c < out_c; ++c) {
                    const double* wrow = wmat.data() + c * kk;
                    const double* grow = gmat.data() + c * ho * wo;
                    for (std::size_t p = 0; p < kk; ++p) {
                        const double w = wrow[p];
                        if (w == 0.0) continue;
                        double* crow = gcol.data() + p * ho * wo;
                        for (std::size_t i = 0; i < ho * wo; ++i) crow[i] += w * grow[i];
                    }
                }
                Tensor gx(in.shape());
                detail::col2im(gcol, k, s.stride, s.padding, ho, wo, gx);
                grad = std::move(gx);
                break;
            }
            case LayerKind::relu: {
                Tensor gx = grad;
                for (std::size_t j = 0; j < gx.size(); ++j)
                    if (in[j] <= 0.0) gx[j] = 0.0;
                grad = std::move(gx);
                break;
            }
            case LayerKind::kwta: {
                Tensor flat = grad.reshaped({grad.size()});
                grad = kwta_backward(flat, *tr.patterns[ri]).reshaped(in.shape());
                break;
            }
            case LayerKind::flatten:
                grad = grad.reshaped(in.shape());
                break;
        }
    }
    g.input = std::move(grad);
    return g;
}

/// Replay a recorded trace's activation decisions as fixed masks. With the
/// patterns frozen the network is an affine map of its input.
inline Tensor forward_frozen(const Model& m, const ForwardTrace& tr, const Tensor& x) {
    if (tr.model_version != m.version)
        throw std::runtime_error("forward_frozen: stale trace");
    Tensor cur = x;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        switch (s.kind) {
            case LayerKind::dense: {
                Tensor y = matvec(m.params[i].weights, cur);
                for (std::size_t j = 0; j < y.size(); ++j) y[j] += m.params[i].bias[j];
                cur = std::move(y);
                break;
            }
            case LayerKind::conv2d:
                cur = conv2d_forward(cur, m.params[i].weights, m.params[i].bias, s.stride, s.padding);
                break;
            case LayerKind::relu: {
                Tensor y = cur;
                for (std::size_t j = 0; j < y.size(); ++j)
                    if (tr.inputs[i][j] <= 0.0) y[j] = 0.0;
                cur = std::move(y);
                break;
            }
            case LayerKind::kwta: {
                Tensor flat = cur.reshaped({cur.size()});
                cur = kwta_backward(flat, *tr.patterns[i]).reshaped(cur.shape());
                break;
            }
            case LayerKind::flatten:
                cur = cur.reshaped({cur.size()});
                break;
        }
    }
    return cur;
}

struct LossGrad {
    double loss;
    Tensor grad;
};

/// loss = -log softmax(logits)[label], computed with max subtraction.
inline LossGrad softmax_cross_entropy(const Tensor& logits, std::size_t label) {
    const std::size_t n = logits.size();
    if (label >= n) throw std::invalid_argument("softmax_cross_entropy: label out of range");
    double mx = logits[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double z = 0.0;
    Tensor g(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = std::exp(logits[i] - mx);
        z += g[i];
    }
    for (std::size_t i = 0; i < n; ++i) g[i] /= z;
    const double loss = -(logits[label] - mx - std::log(z));
    g[label] -= 1.0;
    return {loss, std::move(g)};
}

inline std::size_t argmax(const Tensor& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

inline std::size_t predict(const Model& m, const Tensor& x) {
    return argmax(forward(m, x).logits);
}

// ---------------------------------------------------------------------------
// Serialization: textual header (layer specs, dtype, gamma values) followed
// by little-endian parameter blobs in layer order, each preceded by its
// 64-bit element count. Round trips are bit-exact.

inline void save_model(const Model& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_model: cannot open " + path);
    std::ostringstream hdr;
    hdr << "KWTALAB-MODEL v1\n";
    hdr << "name " << m.name << "\n";
    hdr << "dtype f64\n";
    hdr << "seed " << m.creation_seed << "\n";
    hdr << "input";
    for (std::size_t d : m.input_shape) hdr << " " << d;
    hdr << "\n";
    hdr << "layers " << m.layers.size() << "\n";
    char buf[64];
    for (const auto& s : m.layers) {
        switch (s.kind) {
            case LayerKind::dense:
                hdr << "dense " << s.in_dim << " " << s.out_dim << "\n";
                break;
            case LayerKind::conv2d:
                hdr << "conv2d " << s.in_channels << " " << s.out_channels << " " << s.kernel_size
                    << " " << s.stride << " " << s.padding << "\n";
                break;
            case LayerKind::relu:
                hdr << "relu\n";
                break;
            case LayerKind::kwta:
                std::snprintf(buf, sizeof buf, "%a", s.gamma);  // exact round trip
                hdr << "kwta " << buf << "\n";
                break;
            case LayerKind::flatten:
                hdr << "flatten\n";
                break;
        }
    }
    hdr << "BLOBS\n";
    const std::string h = hdr.str();
    f.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (const auto& p : m.params) {
        if (!p.present) continue;
        for (const Tensor* t : {&p.weights, &p.bias}) {
            const std::uint64_t n = t->size();
            f.write(reinterpret_cast<const char*>(&n), sizeof n);
            f.write(reinterpret_cast<const char*>(t->data()),
                    static_cast<std::streamsize>(n * sizeof(double)));
        }
    }
    if (!f) throw std::runtime_error("save_model: write failed for " + path);
}

inline Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_model: cannot open " + path);
    std::string line;
    auto next_line = [&]() -> std::string {
        if (!std::getline(f, line)) throw std::runtime_error("load_model: truncated header");
        return line;
    };
    if (next_line() != "KWTALAB-MODEL v1") throw std::runtime_error("load_model: bad magic");
    Model m;
    std::size_t n_layers = 0;
    while (true) {
        std::istringstream ls(next_line());
        std::string key;
        ls >> key;
        if (key == "BLOBS") break;
        if (key == "name") {
            ls >> m.name;
        } else if (key == "dtype") {
            std::string dt;
            ls >> dt;
            if (dt != "f64") throw std::runtime_error("load_model: unsupported dtype " + dt);
        } else if (key == "seed") {
            ls >> m.creation_seed;
        } else if (key == "input") {
            std::size_t d;
            while (ls >> d) m.input_shape.push_back(d);
        } else if (key == "layers") {
            ls >> n_layers;
        } else if (key == "dense") {
            std::size_t in, out;
            ls >> in >> out;
            m.layers.push_back(LayerSpec::dense(in, out));
        } else if (key == "conv2d") {
            std::size_t ic, oc, k, st, pd;
            ls >> ic >> oc >> k >> st >> pd;
            m.layers.push_back(LayerSpec::conv2d(ic, oc, k, st, pd));
        } else if (key == "relu") {
            m.layers.push_back(LayerSpec::relu());
        } else if (key == "kwta") {
            std::string gs;
            ls >> gs;
            m.layers.push_back(LayerSpec::kwta(std::strtod(gs.c_str(), nullptr)));
        } else if (key == "flatten") {
            m.layers.push_back(LayerSpec::flatten());
        } else {
            throw std::runtime_error("load_model: unknown header line: " + line);
        }
    }
    if (m.layers.size() != n_layers) throw std::runtime_error("load_model: layer count mismatch");
    Shape cur = m.input_shape;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        cur = detail::layer_output_shape(s, cur, i);
        LayerParams p;
        if (s.kind == LayerKind::dense || s.kind == LayerKind::conv2d) {
            Shape wshape = s.kind == LayerKind::dense
                               ? Shape{s.out_dim, s.in_dim}
                               : Shape{s.out_channels, s.in_channels, s.kernel_size, s.kernel_size};
            Shape bshape{s.kind == LayerKind::dense ? s.out_dim : s.out_channels};
            for (Shape* sh : {&wshape, &bshape}) {
                std::uint64_t n = 0;
                f.read(reinterpret_cast<char*>(&n), sizeof n);
                if (!f || n != shape_numel(*sh))
                    throw std::runtime_error("load_model: blob size mismatch at layer " +
                                             std::to_string(i));
                Tensor t(*sh);
                f.read(reinterpret_cast<char*>(t.data()),
                       static_cast<std::streamsize>(n * sizeof(double)));
                if (!f) throw std::runtime_error("load_model: truncated blob at layer " +
                                                 std::to_string(i));
                if (sh == &wshape)
                    p.weights = std::move(t);
                else
                    p.bias = std::move(t);
            }
            p.present = true;
        }
        m.params.push_back(std::move(p));
    }
    return m;
}

}  // namespace kwtalab
