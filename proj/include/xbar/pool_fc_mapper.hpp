#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xbar/conv_mapper.hpp"
#include "xbar/crossbar.hpp"
#include "xbar/tensor.hpp"

namespace xbar {

/// Global average pooling crossbar. Rows are the negated inputs of all
/// channels (channel c occupies rows [c*N, (c+1)*N)); column c holds N cells of
/// weight 1/N so the inverting TIA turns the negative mean current into +mean.
struct GapProgram {
    CrossbarProgram program;
    std::size_t spatial = 0;   // N = H * W
    std::size_t channels = 0;  // C

    bool operator==(const GapProgram&) const = default;
};

GapProgram compile_gap(std::size_t spatial_count, std::size_t channels, const DeviceParams& dp,
                       const std::string& label = "gap");

/// (C, H, W) or flat (C) input -> negated, scaled voltages.
std::vector<double> encode_gap_input(const Tensor& input, const GapProgram& gap, const DeviceParams& dp);

/// Full pass: encode, evaluate, decode. Returns (C).
Tensor run_gap(const GapProgram& gap, const Tensor& input, const DeviceParams& dp);

/// Fully connected crossbar: rows [0, L) carry x, [L, 2L) carry -x, then the
/// +V_b / -V_b pair. One column (and one TIA) per output neuron.
struct FcProgram {
    CrossbarProgram program;
    PlacementPlan plan;
    std::size_t inputs = 0;
    std::size_t outputs = 0;

    bool operator==(const FcProgram&) const = default;
};

/// weight is (outputs, inputs); bias is empty or `outputs` long.
FcProgram compile_fc(const Tensor& weight, std::span<const double> bias, const DeviceParams& dp,
                     const std::string& label = "fc");

std::vector<double> encode_fc_input(std::span<const double> x, const FcProgram& fc, const DeviceParams& dp);

/// Full pass on a flattened input. Returns (outputs).
Tensor run_fc(const FcProgram& fc, std::span<const double> x, const DeviceParams& dp);

}  // namespace xbar
