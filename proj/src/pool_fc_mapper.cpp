#include "xbar/pool_fc_mapper.hpp"

#include "xbar/error.hpp"

namespace xbar {

GapProgram compile_gap(std::size_t spatial_count, std::size_t channels, const DeviceParams& dp,
                       const std::string& label) {
    if (spatial_count == 0) throw GeometryError("global average pooling over zero inputs");
    const double r = weight_to_resistance(1.0 / static_cast<double>(spatial_count), dp);
    std::vector<Cell> cells;
    cells.reserve(spatial_count * channels);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t k = 0; k < spatial_count; ++k) cells.push_back({c * spatial_count + k, c, r});
    }
    return {CrossbarProgram(label, spatial_count * channels, channels, dp.feedback_resistance(), std::move(cells)),
            spatial_count, channels};
}

std::vector<double> encode_gap_input(const Tensor& input, const GapProgram& gap, const DeviceParams& dp) {
    if (input.size() != gap.spatial * gap.channels) {
        throw GeometryError("gap crossbar expects " + std::to_string(gap.channels) + " x " +
                            std::to_string(gap.spatial) + " inputs, got " + shape_to_string(input.shape()));
    }
    std::vector<double> v(input.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -input[i] * dp.v_scale;
    return v;
}

Tensor run_gap(const GapProgram& gap, const Tensor& input, const DeviceParams& dp) {
    auto out = evaluate_crossbar(gap.program, encode_gap_input(input, gap, dp));
    for (auto& v : out) v /= dp.v_scale;
    return Tensor::vector(std::move(out));
}

FcProgram compile_fc(const Tensor& weight, std::span<const double> bias, const DeviceParams& dp,
                     const std::string& label) {
    if (weight.rank() != 2) throw GeometryError("fc weight must be a matrix, got " + shape_to_string(weight.shape()));
    const std::size_t outs = weight.dim(0), ins = weight.dim(1);
    if (!bias.empty() && bias.size() != outs) {
        throw GeometryError("fc bias has " + std::to_string(bias.size()) + " entries for " + std::to_string(outs) +
                            " outputs");
    }
    FcProgram fc;
    fc.inputs = ins;
    fc.outputs = outs;
    fc.plan.region_split = ins;
    fc.plan.plus_vb_row = 2 * ins;
    fc.plan.minus_vb_row = 2 * ins + 1;
    std::vector<Cell> cells;
    for (std::size_t j = 0; j < outs; ++j) {
        for (std::size_t k = 0; k < ins; ++k) {
            const double w = weight[j * ins + k];
            if (w == 0.0) continue;
            const std::size_t row = w > 0.0 ? ins + k : k;
            fc.plan.entries.push_back({row, j, w});
            cells.push_back({row, j, weight_to_resistance(w, dp)});
        }
        const double b = bias.empty() ? 0.0 : bias[j];
        if (b != 0.0) {
            const std::size_t row = b > 0.0 ? fc.plan.minus_vb_row : fc.plan.plus_vb_row;
            fc.plan.bias_entries.push_back({row, j, b});
            cells.push_back({row, j, weight_to_resistance(b, dp)});
        }
    }
    fc.program = CrossbarProgram(label, 2 * ins + 2, outs, dp.feedback_resistance(), std::move(cells));
    return fc;
}

std::vector<double> encode_fc_input(std::span<const double> x, const FcProgram& fc, const DeviceParams& dp) {
    if (x.size() != fc.inputs) {
        throw GeometryError("fc crossbar expects " + std::to_string(fc.inputs) + " inputs, got " +
                            std::to_string(x.size()));
    }
    std::vector<double> v(2 * fc.inputs + 2);
    for (std::size_t k = 0; k < fc.inputs; ++k) {
        v[k] = x[k] * dp.v_scale;
        v[fc.inputs + k] = -v[k];
    }
    v[2 * fc.inputs] = dp.v_scale;
    v[2 * fc.inputs + 1] = -dp.v_scale;
    return v;
}

Tensor run_fc(const FcProgram& fc, std::span<const double> x, const DeviceParams& dp) {
    auto out = evaluate_crossbar(fc.program, encode_fc_input(x, fc, dp));
    for (auto& v : out) v /= dp.v_scale;
    return Tensor::vector(std::move(out));
}

}  // namespace xbar
