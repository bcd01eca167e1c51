#include "xbar/conv_mapper.hpp"

#include <algorithm>

#include "xbar/error.hpp"

namespace xbar {

std::size_t output_extent(std::size_t w, std::size_t f, std::size_t p, std::size_t s) {
    auto fail = [&](const char* why) {
        return GeometryError(std::string("conv geometry ") + why + ": W=" + std::to_string(w) +
                             " F=" + std::to_string(f) + " P=" + std::to_string(p) + " S=" + std::to_string(s));
    };
    if (w == 0 || f == 0 || s == 0) throw fail("needs W, F, S >= 1");
    if (f > w + 2 * p) throw fail("kernel larger than padded input");
    const std::size_t span = w + 2 * p - f;
    if (span % s != 0) throw fail("output size not integral");
    return span / s + 1;
}

std::pair<std::size_t, std::size_t> output_dims(std::pair<std::size_t, std::size_t> w,
                                                std::pair<std::size_t, std::size_t> f, std::size_t p,
                                                std::size_t s) {
    return {output_extent(w.first, f.first, p, s), output_extent(w.second, f.second, p, s)};
}

ConvGeometry ConvGeometry::make(std::size_t in_rows, std::size_t in_cols, std::size_t f_r, std::size_t f_c,
                                std::size_t padding, std::size_t stride) {
    ConvGeometry g;
    g.o_r = output_extent(in_rows, f_r, padding, stride);
    g.o_c = output_extent(in_cols, f_c, padding, stride);
    g.w_r = in_rows + 2 * padding;
    g.w_c = in_cols + 2 * padding;
    g.f_r = f_r;
    g.f_c = f_c;
    g.p = padding;
    g.s = stride;
    return g;
}

std::pair<std::size_t, std::size_t> placement_start(std::size_t i, const ConvGeometry& geom) {
    if (i >= geom.output_count()) {
        throw IndexError("output index " + std::to_string(i) + " outside " + std::to_string(geom.output_count()) +
                         " outputs");
    }
    const std::size_t pp = (i / geom.o_c * geom.w_c + i % geom.o_c) * geom.s;
    return {pp, pp + geom.w_r * geom.w_c};
}

bool PlacementPlan::regions_respected() const {
    return std::all_of(entries.begin(), entries.end(), [&](const PlacementEntry& e) {
        if (e.signed_weight > 0.0) return e.row >= region_split && e.row < 2 * region_split;
        if (e.signed_weight < 0.0) return e.row < region_split;
        return false;
    });
}

namespace {

// Places every nonzero weight of `slices` (C_in kernels of F_r x F_c, flat)
// into one program whose columns are the spatial outputs.
CompiledConv place(std::span<const double> slices, std::size_t in_channels, double bias, const ConvGeometry& geom,
                   const DeviceParams& dp, const std::string& label) {
    const std::size_t n = geom.region_size();
    const std::size_t split = in_channels * n;
    const std::size_t kernel_size = geom.f_r * geom.f_c;

    PlacementPlan plan;
    plan.region_split = split;
    plan.plus_vb_row = 2 * split;
    plan.minus_vb_row = 2 * split + 1;

    std::vector<Cell> cells;
    for (std::size_t i = 0; i < geom.output_count(); ++i) {
        const auto [pp, pn] = placement_start(i, geom);
        (void)pn;
        for (std::size_t ci = 0; ci < in_channels; ++ci) {
            // F_c consecutive cells per kernel row, then skip to the next padded row.
            for (std::size_t r = 0; r < geom.f_r; ++r) {
                for (std::size_t c = 0; c < geom.f_c; ++c) {
                    const double w = slices[ci * kernel_size + r * geom.f_c + c];
                    if (w == 0.0) continue;
                    const std::size_t offset = pp + r * geom.w_c + c;
                    // Inverted split: positive weights read the negated input.
                    const std::size_t row = (w > 0.0 ? split : 0) + ci * n + offset;
                    plan.entries.push_back({row, i, w});
                    cells.push_back({row, i, weight_to_resistance(w, dp)});
                }
            }
        }
        if (bias != 0.0) {
            const std::size_t row = bias > 0.0 ? plan.minus_vb_row : plan.plus_vb_row;
            plan.bias_entries.push_back({row, i, bias});
            cells.push_back({row, i, weight_to_resistance(bias, dp)});
        }
    }
    CrossbarProgram prog(label, 2 * split + 2, geom.output_count(), dp.feedback_resistance(), std::move(cells));
    return {std::move(prog), std::move(plan)};
}

void check_kernel_dims(std::size_t f_r, std::size_t f_c, const ConvGeometry& geom) {
    if (f_r != geom.f_r || f_c != geom.f_c) {
        throw GeometryError("kernel " + std::to_string(f_r) + "x" + std::to_string(f_c) + " does not match geometry " +
                            std::to_string(geom.f_r) + "x" + std::to_string(geom.f_c));
    }
}

}  // namespace

CompiledConv compile_conv(const Tensor& kernel, double bias, const ConvGeometry& geom, const DeviceParams& dp,
                          const std::string& label) {
    const auto& s = kernel.shape();
    const bool plain = s.size() == 2;
    const bool wrapped = s.size() == 4 && s[0] == 1 && s[1] == 1;
    if (!plain && !wrapped) throw GeometryError("compile_conv kernel must be (F_r, F_c), got " + shape_to_string(s));
    check_kernel_dims(s[s.size() - 2], s[s.size() - 1], geom);
    return place(kernel.data(), 1, bias, geom, dp, label);
}

EncodedInput encode_input(const Tensor& input, const ConvGeometry& geom, const DeviceParams& dp) {
    const auto& s = input.shape();
    if (s.size() != 2 && s.size() != 3) {
        throw GeometryError("encode_input expects (H, W) or (C, H, W), got " + shape_to_string(s));
    }
    const std::size_t channels = s.size() == 3 ? s[0] : 1;
    const std::size_t h = s[s.size() - 2];
    const std::size_t w = s[s.size() - 1];
    if (h != geom.in_rows() || w != geom.in_cols()) {
        throw GeometryError("input " + shape_to_string(s) + " does not match geometry input " +
                            std::to_string(geom.in_rows()) + "x" + std::to_string(geom.in_cols()));
    }
    const std::size_t n = geom.region_size();
    const std::size_t split = channels * n;
    EncodedInput enc;
    enc.voltages.assign(2 * split + 2, 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const double v = input[(c * h + y) * w + x] * dp.v_scale;
                const std::size_t k = c * n + (y + geom.p) * geom.w_c + (x + geom.p);
                enc.voltages[k] = v;
                enc.voltages[split + k] = -v;
            }
        }
    }
    enc.voltages[2 * split] = dp.v_scale;
    enc.voltages[2 * split + 1] = -dp.v_scale;
    return enc;
}

Tensor decode_output(std::span<const double> v_out, const ConvGeometry& geom, const DeviceParams& dp) {
    if (v_out.size() != geom.output_count()) {
        throw InputError("decode_output expects " + std::to_string(geom.output_count()) + " voltages, got " +
                         std::to_string(v_out.size()));
    }
    std::vector<double> values(v_out.begin(), v_out.end());
    for (auto& v : values) v /= dp.v_scale;
    return Tensor({geom.o_r, geom.o_c}, std::move(values));
}

std::vector<CompiledConv> compile_depthwise(const Tensor& kernels, const ConvGeometry& geom, const DeviceParams& dp,
                                            const std::string& label) {
    const auto& s = kernels.shape();
    if (s.size() != 3) throw GeometryError("depthwise kernels must be (C, F_r, F_c), got " + shape_to_string(s));
    check_kernel_dims(s[1], s[2], geom);
    const std::size_t ks = s[1] * s[2];
    std::vector<CompiledConv> out;
    out.reserve(s[0]);
    for (std::size_t c = 0; c < s[0]; ++c) {
        out.push_back(place(kernels.data().subspan(c * ks, ks), 1, 0.0, geom, dp, label + ".ch" + std::to_string(c)));
    }
    return out;
}

std::vector<CompiledConv> compile_multichannel_conv(const Tensor& kernel, std::span<const double> biases,
                                                    const ConvGeometry& geom, const DeviceParams& dp,
                                                    const std::string& label) {
    const auto& s = kernel.shape();
    if (s.size() != 4) throw GeometryError("conv kernel must be (C_out, C_in, F_r, F_c), got " + shape_to_string(s));
    check_kernel_dims(s[2], s[3], geom);
    if (!biases.empty() && biases.size() != s[0]) {
        throw GeometryError("conv has " + std::to_string(s[0]) + " output channels but " +
                            std::to_string(biases.size()) + " biases");
    }
    const std::size_t per_out = s[1] * s[2] * s[3];
    std::vector<CompiledConv> out;
    out.reserve(s[0]);
    for (std::size_t co = 0; co < s[0]; ++co) {
        out.push_back(place(kernel.data().subspan(co * per_out, per_out), s[1], biases.empty() ? 0.0 : biases[co], geom,
                            dp, label + ".oc" + std::to_string(co)));
    }
    return out;
}

}  // namespace xbar
