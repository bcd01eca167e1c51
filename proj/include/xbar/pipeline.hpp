#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xbar/bn_mapper.hpp"
#include "xbar/conv_mapper.hpp"
#include "xbar/crossbar.hpp"
#include "xbar/network.hpp"
#include "xbar/pool_fc_mapper.hpp"

namespace xbar {

/// conv and pointwise_conv: one program per output channel over stacked
/// input channels. depthwise_conv: one program per channel.
struct ConvStage {
    ConvGeometry geom;
    std::vector<CompiledConv> programs;
    bool depthwise = false;

    bool operator==(const ConvStage&) const = default;
};

struct BnStage {
    std::vector<BNParams> params;
    std::vector<BNCircuit> circuits;

    bool operator==(const BnStage&) const = default;
};

struct ActivationStage {
    Activation kind = Activation::relu;

    bool operator==(const ActivationStage&) const = default;
};

struct SeStage {
    GapProgram squeeze;
    FcProgram fc1;
    FcProgram fc2;

    bool operator==(const SeStage&) const = default;
};

struct ResidualStage {
    std::size_t from = 0;

    bool operator==(const ResidualStage&) const = default;
};

struct GapStage {
    GapProgram gap;

    bool operator==(const GapStage&) const = default;
};

struct FcStage {
    FcProgram fc;

    bool operator==(const FcStage&) const = default;
};

using StageBody = std::variant<ConvStage, BnStage, ActivationStage, SeStage, ResidualStage, GapStage, FcStage>;

/// One lowered layer. Stage k corresponds to layer k of the spec.
struct Stage {
    LayerKind kind = LayerKind::relu;
    std::string label;
    Shape input_shape;
    Shape output_shape;
    StageBody body;

    bool operator==(const Stage&) const = default;
};

struct CompiledNetwork {
    NetworkSpec spec;
    DeviceParams dp;
    std::vector<Stage> stages;

    bool operator==(const CompiledNetwork&) const = default;
};

/// Throws LookupError for a missing tensor and GeometryError for a broken
/// shape chain, as `bind` does.
CompiledNetwork compile_network(const NetworkSpec& spec, const DeviceParams& dp, const WeightStore& weights);
CompiledNetwork compile_network(const BoundNetwork& net, const DeviceParams& dp);

/// Every crossbar a stage programs, in a fixed order.
std::vector<const CrossbarProgram*> stage_programs(const Stage& stage);

/// Sequential stage evaluation. Crossbar stages encode their input to volts,
/// evaluate the array and decode back to activation units.
Tensor forward_analog(const CompiledNetwork& net, const Tensor& image);

/// argmax of forward_analog; ties go to the lowest index.
std::size_t predict(const CompiledNetwork& net, const Tensor& image);

}  // namespace xbar
