#pragma once

// Canned MNIST architectures. The CNN is the reduced-width variant (conv
// channels 16/16/32/32, hidden 1250); pass a width multiplier of 8 to get
// the full-size layout back.

#include <stdexcept>
#include <string>
#include <vector>

#include "kwtalab/nn.hpp"

namespace kwtalab {

/// relu or kwta(gamma) activation row, chosen by name.
inline LayerSpec activation_spec(const std::string& activation, double gamma) {
    if (activation == "relu") return LayerSpec::relu();
    if (activation == "kwta") return LayerSpec::kwta(gamma);
    throw std::invalid_argument("unknown activation: " + activation);
}

inline Model make_mnist_cnn(const std::string& activation, double gamma, Rng& rng,
                            std::size_t width_mult = 1) {
    const std::size_t c1 = 16 * width_mult, c2 = 32 * width_mult;
    const std::size_t hidden = 1250 * width_mult;
    std::vector<LayerSpec> specs = {
        LayerSpec::conv2d(1, c1, 3, 1, 1),  activation_spec(activation, gamma),
        LayerSpec::conv2d(c1, c1, 3, 2, 1), activation_spec(activation, gamma),
        LayerSpec::conv2d(c1, c2, 3, 1, 1), activation_spec(activation, gamma),
        // the fourth convolution feeds the classifier head directly, with no
        // activation in between
        LayerSpec::conv2d(c2, c2, 3, 2, 1),
        LayerSpec::flatten(),
        LayerSpec::dense(c2 * 7 * 7, hidden), activation_spec(activation, gamma),
        LayerSpec::dense(hidden, 10)};
    return build_model(std::move(specs), {1, 28, 28}, rng, "mnist-cnn-" + activation);
}

inline Model make_mnist_mlp(const std::string& activation, double gamma, Rng& rng) {
    std::vector<LayerSpec> specs = {LayerSpec::flatten(),
                                    LayerSpec::dense(784, 256),
                                    activation_spec(activation, gamma),
                                    LayerSpec::dense(256, 128),
                                    activation_spec(activation, gamma),
                                    LayerSpec::dense(128, 10)};
    return build_model(std::move(specs), {1, 28, 28}, rng, "mnist-mlp-" + activation);
}

inline Model make_preset(const std::string& preset, const std::string& activation, double gamma,
                         Rng& rng) {
    if (preset == "mnist-cnn") return make_mnist_cnn(activation, gamma, rng);
    if (preset == "mnist-mlp") return make_mnist_mlp(activation, gamma, rng);
    throw std::invalid_argument("unknown preset: " + preset);
}

}  // namespace kwtalab
