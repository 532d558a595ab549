#pragma once

// k-Winners-Take-All activation: forward mask, activation-pattern
// extraction, backward mask and the gamma -> k rule. Ties among equal
// values are broken toward the smaller index, so the winner set is the
// first k entries under the strict order (value desc, index asc).

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "kwtalab/tensor.hpp"

namespace kwtalab {

struct KwtaConfig {
    double gamma;  // sparsity ratio, in (0, 1]; gamma = 1 is the identity map
};

/// Index set A(y) of the k winning positions of one layer's pre-activation,
/// strictly increasing, with the layer width alongside.
struct ActivationPattern {
    std::vector<std::size_t> indices;
    std::size_t width = 0;

    bool operator==(const ActivationPattern& o) const {
        return width == o.width && indices == o.indices;
    }
    bool operator!=(const ActivationPattern& o) const { return !(*this == o); }

    bool contains(std::size_t j) const {
        return std::binary_search(indices.begin(), indices.end(), j);
    }
};

/// k = floor(gamma * n), clamped to >= 1 so tiny layers never go fully dark.
inline std::size_t k_from_gamma(double gamma, std::size_t n) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("k_from_gamma: gamma must be in (0, 1]");
    if (n == 0) throw std::invalid_argument("k_from_gamma: n must be positive");
    auto k = static_cast<std::size_t>(gamma * static_cast<double>(n));
    if (k < 1) k = 1;
    if (k > n) k = n;
    return k;
}

namespace detail {

/// The k winner indices of y under (value desc, index asc), sorted ascending.
/// Selection by nth_element on a strict total order is bit-identical to a
/// full stable sort's top-k.
template <typename T>
std::vector<std::size_t> winner_indices(const TensorT<T>& y, std::size_t k) {
    const std::size_t n = y.size();
    if (k < 1 || k > n) throw std::invalid_argument("kwta: k out of range [1, N]");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    auto better = [&y](std::size_t a, std::size_t b) {
        return y[a] > y[b] || (y[a] == y[b] && a < b);
    };
    if (k < n) std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), better);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace detail

/// Eq.-style mask: output[j] = y[j] when j is among the k largest (ties to
/// smaller index), 0 otherwise.
template <typename T>
TensorT<T> kwta_forward(const TensorT<T>& y, std::size_t k) {
    auto winners = detail::winner_indices(y, k);
    TensorT<T> out(y.shape());
    for (std::size_t j : winners) out[j] = y[j];
    return out;
}

template <typename T>
ActivationPattern activation_pattern(const TensorT<T>& y, std::size_t k) {
    return ActivationPattern{detail::winner_indices(y, k), y.size()};
}

/// Pass-through-on-winners subgradient, same convention as max-pooling.
template <typename T>
TensorT<T> kwta_backward(const TensorT<T>& grad_out, const ActivationPattern& pattern) {
    if (grad_out.size() != pattern.width)
        throw std::invalid_argument("kwta_backward: width mismatch");
    TensorT<T> grad_in(grad_out.shape());
    for (std::size_t j : pattern.indices) grad_in[j] = grad_out[j];
    return grad_in;
}

/// CHW tensors are treated as one long C*H*W vector; the output keeps the
/// input shape (no downsampling).
template <typename T>
TensorT<T> kwta_forward_chw(const TensorT<T>& t, const KwtaConfig& cfg) {
    const std::size_t n = t.size();
    TensorT<T> flat = t.reshaped({n});
    TensorT<T> masked = kwta_forward(flat, k_from_gamma(cfg.gamma, n));
    return masked.reshaped(t.shape());
}

}  // namespace kwtalab
