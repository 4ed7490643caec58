#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qlearn/core/rng.hpp"
#include "qlearn/nn/convolution.hpp"
#include "qlearn/nn/dueling.hpp"
#include "qlearn/nn/linear.hpp"
#include "qlearn/nn/network.hpp"
#include "qlearn/nn/relu.hpp"

namespace qlearn::nn {

/// One body stage of an architecture description. Only the fields relevant
/// to `kind` are read.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t units = 0;  // linear outputs or convolution filters
    std::size_t kernel_h = 0, kernel_w = 0;
    std::size_t stride_h = 1, stride_w = 1;

    static LayerSpec conv(std::size_t filters, std::size_t k, std::size_t s) {
        return {LayerKind::convolution, filters, k, k, s, s};
    }
    static LayerSpec linear(std::size_t units) { return {LayerKind::linear, units}; }
    static LayerSpec relu() { return {LayerKind::relu}; }
};

/// Network body; the action head (linear or dueling) is appended by
/// build_network.
struct Architecture {
    std::string name;
    std::vector<LayerSpec> body;

    /// 84x84x4 Atari network: three convolutions and a 512-unit hidden layer.
    static Architecture atari() {
        return {"atari",
                {LayerSpec::conv(32, 8, 4), LayerSpec::relu(), LayerSpec::conv(64, 4, 2), LayerSpec::relu(),
                 LayerSpec::conv(64, 3, 1), LayerSpec::relu(), LayerSpec::linear(512), LayerSpec::relu()}};
    }

    /// Reduced convolutional network for 24x24 boards: 24 -> 11 -> 5.
    static Architecture small() {
        return {"small",
                {LayerSpec::conv(16, 4, 2), LayerSpec::relu(), LayerSpec::conv(32, 3, 2), LayerSpec::relu(),
                 LayerSpec::linear(128), LayerSpec::relu()}};
    }

    /// One hidden layer, for low-dimensional observations.
    static Architecture mlp(std::size_t hidden = 64) {
        return {"mlp", {LayerSpec::linear(hidden), LayerSpec::relu()}};
    }

    /// No hidden layers: the head maps the observation straight to Q-values.
    static Architecture linear() { return {"linear", {}}; }

    static Architecture named(const std::string& name) {
        if (name == "atari") return atari();
        if (name == "small") return small();
        if (name == "mlp") return mlp();
        if (name == "linear") return linear();
        throw std::invalid_argument("unknown architecture preset '" + name + "' (atari|small|mlp|linear)");
    }
};

/// Builds body + head for inputs of per-sample shape H x W x C.
template <typename T>
Network<T> build_network(const Architecture& arch, const Shape& input_shape, std::size_t n_actions, bool dueling) {
    if (input_shape.size() != 3 || element_count(input_shape) == 0)
        throw std::invalid_argument("build_network: input shape must be HxWxC with positive extents, got " +
                                    to_string(input_shape));
    if (n_actions < 2) throw std::invalid_argument("build_network: need at least 2 actions");
    Network<T> net(input_shape);
    std::size_t conv_i = 0, fc_i = 0;
    for (const auto& spec : arch.body) {
        const auto& in = net.output_shape();
        switch (spec.kind) {
            case LayerKind::convolution: {
                if (in.size() != 3)
                    throw std::invalid_argument("build_network: convolution must precede linear layers");
                ConvGeometry g{spec.units, spec.kernel_h, spec.kernel_w, spec.stride_h, spec.stride_w};
                net.add(std::make_unique<Convolution<T>>(in, g, "conv" + std::to_string(++conv_i)));
                break;
            }
            case LayerKind::linear:
                net.add(std::make_unique<Linear<T>>(element_count(in), spec.units, true,
                                                    "fc" + std::to_string(++fc_i)));
                break;
            case LayerKind::relu:
                net.add(std::make_unique<Relu<T>>());
                break;
            case LayerKind::dueling_head:
                throw std::invalid_argument("build_network: dueling head is selected by the dueling flag");
        }
    }
    const auto features = element_count(net.output_shape());
    if (dueling)
        net.add(std::make_unique<DuelingHead<T>>(features, n_actions, "head"));
    else
        net.add(std::make_unique<Linear<T>>(features, n_actions, true, "head"));
    return net;
}

/// Glorot-uniform weights, zero biases. For convolutions fan_in and fan_out
/// count the receptive field: fan_in = kh*kw*C_in, fan_out = kh*kw*C_out.
template <typename T>
void init_params(Network<T>& net, std::uint64_t seed) {
    Rng rng = derive(seed, Stream::init);
    for (auto* p : net.params()) {
        const auto& s = p->weight.shape();
        std::size_t fan_in, fan_out;
        if (s.size() == 4) {
            fan_in = s[0] * s[1] * s[2];
            fan_out = s[0] * s[1] * s[3];
        } else {
            fan_in = s[0];
            fan_out = s[1];
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (auto& w : p->weight.values()) w = static_cast<T>(rng.uniform(-limit, limit));
        if (p->bias) p->bias->fill(T{0});
        p->zero_grad();
    }
}

}  // namespace qlearn::nn
