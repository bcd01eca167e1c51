#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xbar/crossbar.hpp"
#include "xbar/tensor.hpp"

namespace xbar {

/// O = (W - F + 2P) / S + 1 on unpadded W. Throws GeometryError, quoting all
/// four parameters, when the division is not exact or the window does not fit.
std::size_t output_extent(std::size_t w, std::size_t f, std::size_t p, std::size_t s);

/// Both axes at once.
std::pair<std::size_t, std::size_t> output_dims(std::pair<std::size_t, std::size_t> w,
                                                std::pair<std::size_t, std::size_t> f, std::size_t p,
                                                std::size_t s);

/// Sliding-window geometry. w_r / w_c are the PADDED input dims, which are
/// the dims of the flattened input region on the crossbar.
struct ConvGeometry {
    std::size_t w_r = 0, w_c = 0;
    std::size_t f_r = 1, f_c = 1;
    std::size_t p = 0, s = 1;
    std::size_t o_r = 0, o_c = 0;

    /// From unpadded input dims; validates the output-size formula.
    static ConvGeometry make(std::size_t in_rows, std::size_t in_cols, std::size_t f_r, std::size_t f_c,
                             std::size_t padding, std::size_t stride);

    std::size_t in_rows() const noexcept { return w_r - 2 * p; }
    std::size_t in_cols() const noexcept { return w_c - 2 * p; }
    /// Rows in one input region (one polarity, one channel).
    std::size_t region_size() const noexcept { return w_r * w_c; }
    std::size_t output_count() const noexcept { return o_r * o_c; }

    bool operator==(const ConvGeometry&) const = default;
};

/// Start rows of output i in the original-input and negated-input regions:
/// p_pi = (floor(i / O_c) * W_c + i mod O_c) * S, p_ni = p_pi + W_r * W_c.
/// Throws IndexError when i >= O_r * O_c.
std::pair<std::size_t, std::size_t> placement_start(std::size_t i, const ConvGeometry& geom);

struct PlacementEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double signed_weight = 0.0;

    bool operator==(const PlacementEntry&) const = default;
};

/// Placement before materialization. Kernel entries obey the inverted split:
/// positive weights sit in the negated region [N, 2N), negative weights in the
/// original region [0, N). Bias cells are listed separately.
struct PlacementPlan {
    std::vector<PlacementEntry> entries;
    std::vector<PlacementEntry> bias_entries;
    std::size_t plus_vb_row = 0;
    std::size_t minus_vb_row = 0;
    std::size_t region_split = 0;  // N

    /// True when every entry respects the region rule and no weight is zero.
    bool regions_respected() const;

    bool operator==(const PlacementPlan&) const = default;
};

struct CompiledConv {
    CrossbarProgram program;
    PlacementPlan plan;

    bool operator==(const CompiledConv&) const = default;
};

/// Rows [0, N): padded input flattened row-major times v_scale; [N, 2N): the
/// negation; last two rows: +V_b and -V_b (V_b = 1, scaled by v_scale).
/// With several channels, the original regions of all channels come first,
/// then all negated regions, then the bias pair.
struct EncodedInput {
    std::vector<double> voltages;
};

/// Single-channel convolution. `kernel` is (F_r, F_c) or (1, 1, F_r, F_c).
CompiledConv compile_conv(const Tensor& kernel, double bias, const ConvGeometry& geom, const DeviceParams& dp,
                          const std::string& label = "conv");

/// input is (H, W) or (C, H, W); channels are stacked as described on EncodedInput.
EncodedInput encode_input(const Tensor& input, const ConvGeometry& geom, const DeviceParams& dp);

/// Reshape the column voltages to (O_r, O_c) and strip v_scale.
Tensor decode_output(std::span<const double> v_out, const ConvGeometry& geom, const DeviceParams& dp);

/// One independent program per channel; kernels is (C, F_r, F_c).
std::vector<CompiledConv> compile_depthwise(const Tensor& kernels, const ConvGeometry& geom,
                                            const DeviceParams& dp, const std::string& label = "dw");

/// One program per output channel. All C_in kernel slices share the output
/// columns so the column current sums across input channels. kernel is
/// (C_out, C_in, F_r, F_c); biases is empty or C_out long.
std::vector<CompiledConv> compile_multichannel_conv(const Tensor& kernel, std::span<const double> biases,
                                                    const ConvGeometry& geom, const DeviceParams& dp,
                                                    const std::string& label = "conv");

}  // namespace xbar
