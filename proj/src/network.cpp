#include "xbar/network.hpp"

#include <array>
#include <utility>

#include "xbar/conv_mapper.hpp"
#include "xbar/error.hpp"

namespace xbar {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 11> kKindNames{{
    {LayerKind::conv, "conv"},
    {LayerKind::depthwise_conv, "depthwise_conv"},
    {LayerKind::pointwise_conv, "pointwise_conv"},
    {LayerKind::batchnorm, "batchnorm"},
    {LayerKind::relu, "relu"},
    {LayerKind::hard_sigmoid, "hard_sigmoid"},
    {LayerKind::hard_swish, "hard_swish"},
    {LayerKind::gap, "gap"},
    {LayerKind::fc, "fc"},
    {LayerKind::se_block, "se_block"},
    {LayerKind::residual_add, "residual_add"},
}};

std::string describe(const NetworkSpec& spec, std::size_t k) {
    const auto& l = spec.layers[k];
    std::string s = "layer " + std::to_string(k) + " (" + std::string(to_string(l.kind));
    if (!l.name.empty()) s += " '" + l.name + "'";
    return s + ")";
}

}  // namespace

std::string_view to_string(LayerKind kind) {
    for (const auto& [k, n] : kKindNames) {
        if (k == kind) return n;
    }
    return "?";
}

LayerKind layer_kind_from_string(std::string_view s) {
    for (const auto& [k, n] : kKindNames) {
        if (n == s) return k;
    }
    throw ParameterError("unknown layer kind '" + std::string(s) + "'");
}

ShapeTrace infer_shapes(const NetworkSpec& spec) {
    if (spec.input_shape.size() != 3 || shape_volume(spec.input_shape) == 0) {
        throw GeometryError("model input_shape must be (C, H, W) with nonzero dims");
    }
    if (spec.class_count == 0) throw ParameterError("class_count must be positive");

    ShapeTrace trace;
    Shape cur = spec.input_shape;
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const LayerSpec& l = spec.layers[k];
        trace.inputs.push_back(cur);
        auto need_map = [&]() {
            if (cur.size() != 3) {
                std::string prev = k == 0 ? std::string("model input") : describe(spec, k - 1);
                throw GeometryError(describe(spec, k) + " needs a (C, H, W) input but " + prev + " produces " +
                                    shape_to_string(cur));
            }
        };
        auto wrap = [&](auto&& fn) {
            try {
                fn();
            } catch (const GeometryError& e) {
                throw GeometryError(describe(spec, k) + ": " + e.what());
            }
        };
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::pointwise_conv:
            case LayerKind::depthwise_conv: {
                need_map();
                if (l.kind == LayerKind::pointwise_conv && (l.kernel_rows != 1 || l.kernel_cols != 1 || l.padding != 0)) {
                    throw GeometryError(describe(spec, k) + " must be 1x1 with no padding");
                }
                if (l.kind != LayerKind::depthwise_conv && l.out_channels == 0) {
                    throw GeometryError(describe(spec, k) + " needs out_channels >= 1");
                }
                std::size_t oh = 0, ow = 0;
                wrap([&] {
                    oh = output_extent(cur[1], l.kernel_rows, l.padding, l.stride);
                    ow = output_extent(cur[2], l.kernel_cols, l.padding, l.stride);
                });
                const std::size_t c = l.kind == LayerKind::depthwise_conv ? cur[0] : l.out_channels;
                cur = {c, oh, ow};
                break;
            }
            case LayerKind::batchnorm:
            case LayerKind::relu:
            case LayerKind::hard_sigmoid:
            case LayerKind::hard_swish: break;
            case LayerKind::gap:
                if (cur.size() == 3) cur = {cur[0]};
                else if (cur.size() != 1) throw GeometryError(describe(spec, k) + " cannot pool " + shape_to_string(cur));
                break;
            case LayerKind::fc:
                if (l.out_features == 0) throw GeometryError(describe(spec, k) + " needs out_features >= 1");
                cur = {l.out_features};
                break;
            case LayerKind::se_block:
                need_map();
                if (l.reduced_channels == 0) throw GeometryError(describe(spec, k) + " needs reduced_channels >= 1");
                break;
            case LayerKind::residual_add:
                if (l.from >= k) {
                    throw GeometryError(describe(spec, k) + " can only join the input of an earlier layer");
                }
                if (trace.inputs[l.from] != cur) {
                    throw GeometryError(describe(spec, k) + " joins " + shape_to_string(cur) + " with the input of " +
                                        describe(spec, l.from) + " " + shape_to_string(trace.inputs[l.from]));
                }
                break;
        }
        trace.outputs.push_back(cur);
    }
    if (shape_volume(cur) != spec.class_count) {
        throw GeometryError("network ends with " + shape_to_string(cur) + " but class_count is " +
                            std::to_string(spec.class_count));
    }
    return trace;
}

void WeightStore::insert(std::string name, Tensor t) {
    if (!entries_.emplace(name, std::move(t)).second) throw ParameterError("duplicate tensor '" + name + "'");
}

const Tensor& WeightStore::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw LookupError("missing weight tensor '" + name + "'");
    return it->second;
}

std::vector<std::pair<std::string, Shape>> required_tensors(const NetworkSpec& spec) {
    const ShapeTrace trace = infer_shapes(spec);
    std::vector<std::pair<std::string, Shape>> out;
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const LayerSpec& l = spec.layers[k];
        const Shape& in = trace.inputs[k];
        const std::string& n = l.name;
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::pointwise_conv:
                out.emplace_back(n + ".weight", Shape{l.out_channels, in[0], l.kernel_rows, l.kernel_cols});
                if (l.bias) out.emplace_back(n + ".bias", Shape{l.out_channels});
                break;
            case LayerKind::depthwise_conv:
                out.emplace_back(n + ".weight", Shape{in[0], l.kernel_rows, l.kernel_cols});
                break;
            case LayerKind::batchnorm:
                for (const char* f : {".mean", ".var", ".gamma", ".beta"}) out.emplace_back(n + f, Shape{in[0]});
                break;
            case LayerKind::fc:
                out.emplace_back(n + ".weight", Shape{l.out_features, shape_volume(in)});
                if (l.bias) out.emplace_back(n + ".bias", Shape{l.out_features});
                break;
            case LayerKind::se_block:
                out.emplace_back(n + ".fc1.weight", Shape{l.reduced_channels, in[0]});
                out.emplace_back(n + ".fc1.bias", Shape{l.reduced_channels});
                out.emplace_back(n + ".fc2.weight", Shape{in[0], l.reduced_channels});
                out.emplace_back(n + ".fc2.bias", Shape{in[0]});
                break;
            default: break;
        }
    }
    return out;
}

namespace {

const Tensor& fetch(const WeightStore& w, const std::string& name, const Shape& expect) {
    const Tensor& t = w.get(name);
    if (t.shape() != expect) {
        throw GeometryError("tensor '" + name + "' has shape " + shape_to_string(t.shape()) + ", expected " +
                            shape_to_string(expect));
    }
    return t;
}

}  // namespace

BoundNetwork bind(const NetworkSpec& spec, const WeightStore& weights) {
    BoundNetwork net;
    net.spec = spec;
    net.shapes = infer_shapes(spec);
    net.params.resize(spec.layers.size());
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const LayerSpec& l = spec.layers[k];
        const Shape& in = net.shapes.inputs[k];
        LayerParams& p = net.params[k];
        const std::string& n = l.name;
        auto vec = [&](const std::string& name, std::size_t len) { return fetch(weights, name, {len}).values(); };
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::pointwise_conv:
                p.kernel = fetch(weights, n + ".weight", {l.out_channels, in[0], l.kernel_rows, l.kernel_cols});
                if (l.bias) p.bias = vec(n + ".bias", l.out_channels);
                break;
            case LayerKind::depthwise_conv:
                p.kernel = fetch(weights, n + ".weight", {in[0], l.kernel_rows, l.kernel_cols});
                break;
            case LayerKind::batchnorm:
                if (!(l.eps > 0.0)) throw ParameterError("layer '" + n + "': batchnorm eps must be positive");
                p.bn.mean = vec(n + ".mean", in[0]);
                p.bn.var = vec(n + ".var", in[0]);
                p.bn.gamma = vec(n + ".gamma", in[0]);
                p.bn.beta = vec(n + ".beta", in[0]);
                p.bn.eps = l.eps;
                for (std::size_t c = 0; c < in[0]; ++c) {
                    if (p.bn.var[c] < 0.0) {
                        throw ParameterError("tensor '" + n + ".var' is negative at channel " + std::to_string(c));
                    }
                }
                break;
            case LayerKind::fc:
                p.fc.weight = fetch(weights, n + ".weight", {l.out_features, shape_volume(in)});
                p.fc.bias = l.bias ? vec(n + ".bias", l.out_features) : std::vector<double>(l.out_features, 0.0);
                break;
            case LayerKind::se_block:
                p.se_fc1.weight = fetch(weights, n + ".fc1.weight", {l.reduced_channels, in[0]});
                p.se_fc1.bias = vec(n + ".fc1.bias", l.reduced_channels);
                p.se_fc2.weight = fetch(weights, n + ".fc2.weight", {in[0], l.reduced_channels});
                p.se_fc2.bias = vec(n + ".fc2.bias", in[0]);
                break;
            default: break;
        }
    }
    return net;
}

}  // namespace xbar
