#include "xbar/pipeline.hpp"

#include <algorithm>

#include "xbar/analog_functional.hpp"
#include "xbar/error.hpp"
#include "xbar/reference_net.hpp"

namespace xbar {

namespace {

std::string stage_label(const LayerSpec& l, std::size_t k) {
    if (!l.name.empty()) return l.name;
    return std::string(to_string(l.kind)) + std::to_string(k);
}

Activation activation_of(LayerKind kind) {
    switch (kind) {
        case LayerKind::relu: return Activation::relu;
        case LayerKind::hard_sigmoid: return Activation::hard_sigmoid;
        default: return Activation::hard_swish;
    }
}

Tensor run_conv(const ConvStage& st, const Tensor& x, const Shape& out_shape, const DeviceParams& dp) {
    Tensor out(out_shape);
    const std::size_t plane = st.geom.output_count();
    std::vector<double> volts(plane);
    auto emit = [&](std::size_t ch) {
        const Tensor decoded = decode_output(volts, st.geom, dp);
        std::copy(decoded.data().begin(), decoded.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(ch * plane));
    };
    if (st.depthwise) {
        for (std::size_t c = 0; c < st.programs.size(); ++c) {
            const EncodedInput enc = encode_input(x.channel(c), st.geom, dp);
            evaluate_crossbar(st.programs[c].program, enc.voltages, volts);
            emit(c);
        }
    } else {
        // All output channels read the same stacked input rows.
        const EncodedInput enc = encode_input(x, st.geom, dp);
        for (std::size_t c = 0; c < st.programs.size(); ++c) {
            evaluate_crossbar(st.programs[c].program, enc.voltages, volts);
            emit(c);
        }
    }
    return out;
}

Tensor run_bn(const BnStage& st, const Tensor& x, const DeviceParams& dp) {
    Tensor y = x;
    const std::size_t channels = st.circuits.size();
    const std::size_t plane = x.size() / channels;
    for (std::size_t c = 0; c < channels; ++c) {
        evaluate_bn_circuit(st.circuits[c], y.data().subspan(c * plane, plane), st.params[c], dp);
    }
    return y;
}

Tensor run_se(const SeStage& st, const Tensor& x, const DeviceParams& dp) {
    const Tensor pooled = run_gap(st.squeeze, x, dp);
    Tensor hidden = run_fc(st.fc1, pooled.data(), dp);
    analog::apply_activation(hidden.data(), Activation::relu);
    Tensor gate = run_fc(st.fc2, hidden.data(), dp);
    analog::apply_activation(gate.data(), Activation::hard_sigmoid);
    return analog::analog_mul(x, gate.data());
}

}  // namespace

CompiledNetwork compile_network(const NetworkSpec& spec, const DeviceParams& dp, const WeightStore& weights) {
    return compile_network(bind(spec, weights), dp);
}

CompiledNetwork compile_network(const BoundNetwork& net, const DeviceParams& dp) {
    dp.validate();
    CompiledNetwork out;
    out.spec = net.spec;
    out.dp = dp;
    for (std::size_t k = 0; k < net.spec.layers.size(); ++k) {
        const LayerSpec& l = net.spec.layers[k];
        const LayerParams& p = net.params[k];
        Stage st;
        st.kind = l.kind;
        st.label = stage_label(l, k);
        st.input_shape = net.shapes.inputs[k];
        st.output_shape = net.shapes.outputs[k];
        const Shape& in = st.input_shape;
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::pointwise_conv:
            case LayerKind::depthwise_conv: {
                ConvStage cs;
                cs.geom = ConvGeometry::make(in[1], in[2], l.kernel_rows, l.kernel_cols, l.padding, l.stride);
                cs.depthwise = l.kind == LayerKind::depthwise_conv;
                cs.programs = cs.depthwise ? compile_depthwise(p.kernel, cs.geom, dp, st.label)
                                           : compile_multichannel_conv(p.kernel, p.bias, cs.geom, dp, st.label);
                st.body = std::move(cs);
                break;
            }
            case LayerKind::batchnorm: {
                BnStage bs;
                for (std::size_t c = 0; c < in[0]; ++c) {
                    bs.params.push_back({p.bn.mean[c], p.bn.var[c], p.bn.gamma[c], p.bn.beta[c], p.bn.eps});
                    bs.circuits.push_back(compile_bn(bs.params.back(), dp, st.label + ".ch" + std::to_string(c)));
                }
                st.body = std::move(bs);
                break;
            }
            case LayerKind::relu:
            case LayerKind::hard_sigmoid:
            case LayerKind::hard_swish: st.body = ActivationStage{activation_of(l.kind)}; break;
            case LayerKind::gap: {
                const std::size_t n = in.size() == 3 ? in[1] * in[2] : 1;
                st.body = GapStage{compile_gap(n, in[0], dp, st.label)};
                break;
            }
            case LayerKind::fc: st.body = FcStage{compile_fc(p.fc.weight, p.fc.bias, dp, st.label)}; break;
            case LayerKind::se_block:
                st.body = SeStage{compile_gap(in[1] * in[2], in[0], dp, st.label + ".squeeze"),
                                  compile_fc(p.se_fc1.weight, p.se_fc1.bias, dp, st.label + ".fc1"),
                                  compile_fc(p.se_fc2.weight, p.se_fc2.bias, dp, st.label + ".fc2")};
                break;
            case LayerKind::residual_add: st.body = ResidualStage{l.from}; break;
        }
        out.stages.push_back(std::move(st));
    }
    return out;
}

std::vector<const CrossbarProgram*> stage_programs(const Stage& stage) {
    std::vector<const CrossbarProgram*> out;
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, ConvStage>) {
                for (const auto& p : body.programs) out.push_back(&p.program);
            } else if constexpr (std::is_same_v<T, BnStage>) {
                for (const auto& c : body.circuits) {
                    out.push_back(&c.stage1);
                    out.push_back(&c.stage2);
                }
            } else if constexpr (std::is_same_v<T, SeStage>) {
                out.push_back(&body.squeeze.program);
                out.push_back(&body.fc1.program);
                out.push_back(&body.fc2.program);
            } else if constexpr (std::is_same_v<T, GapStage>) {
                out.push_back(&body.gap.program);
            } else if constexpr (std::is_same_v<T, FcStage>) {
                out.push_back(&body.fc.program);
            }
        },
        stage.body);
    return out;
}

Tensor forward_analog(const CompiledNetwork& net, const Tensor& image) {
    if (image.shape() != net.spec.input_shape) {
        throw GeometryError("image shape " + shape_to_string(image.shape()) + " differs from model input " +
                            shape_to_string(net.spec.input_shape));
    }
    const DeviceParams& dp = net.dp;
    std::vector<Tensor> stage_inputs;
    stage_inputs.reserve(net.stages.size());
    Tensor x = image;
    for (const Stage& st : net.stages) {
        stage_inputs.push_back(x);
        x = std::visit(
            [&](const auto& body) -> Tensor {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, ConvStage>) {
                    return run_conv(body, x, st.output_shape, dp);
                } else if constexpr (std::is_same_v<T, BnStage>) {
                    return run_bn(body, x, dp);
                } else if constexpr (std::is_same_v<T, ActivationStage>) {
                    Tensor y = x;
                    analog::apply_activation(y.data(), body.kind);
                    return y;
                } else if constexpr (std::is_same_v<T, SeStage>) {
                    return run_se(body, x, dp);
                } else if constexpr (std::is_same_v<T, ResidualStage>) {
                    return Tensor(x.shape(), analog::analog_add(x.data(), stage_inputs.at(body.from).data()));
                } else if constexpr (std::is_same_v<T, GapStage>) {
                    return run_gap(body.gap, x, dp);
                } else {
                    return run_fc(body.fc, x.data(), dp);
                }
            },
            st.body);
    }
    return x.reshaped({x.size()});
}

std::size_t predict(const CompiledNetwork& net, const Tensor& image) {
    const Tensor scores = forward_analog(net, image);
    return ref::argmax(scores.data());
}

}  // namespace xbar
