#pragma once

// Test-only generators and independent oracles. Nothing here calls the
// mappers; the oracles recompute results from first principles.

#include <cstddef>
#include <random>
#include <vector>

#include "xbar/network.hpp"
#include "xbar/tensor.hpp"

namespace xbar::test {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                            double sparsity = 0.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::bernoulli_distribution zero(sparsity);
    Tensor t(shape);
    for (auto& v : t.data()) {
        v = u(rng);
        if (sparsity > 0.0 && zero(rng)) v = 0.0;
    }
    return t;
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// im2col: rows are output positions, columns are (channel, kernel row,
/// kernel col) taps of the zero-padded input. Independent of the crossbar
/// placement arithmetic.
struct Im2col {
    std::size_t out_rows = 0, out_cols = 0;
    std::vector<std::vector<double>> patches;
    /// Flat index of each tap inside the padded, row-major single-channel
    /// input, per output position. Used to check placement rows.
    std::vector<std::vector<std::size_t>> tap_index;
};

inline Im2col im2col(const Tensor& input, std::size_t fr, std::size_t fc, std::size_t stride, std::size_t pad) {
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;
    Im2col r;
    r.out_rows = (hp - fr) / stride + 1;
    r.out_cols = (wp - fc) / stride + 1;
    for (std::size_t oy = 0; oy < r.out_rows; ++oy) {
        for (std::size_t ox = 0; ox < r.out_cols; ++ox) {
            std::vector<double> patch;
            std::vector<std::size_t> taps;
            for (std::size_t ch = 0; ch < c; ++ch) {
                for (std::size_t ky = 0; ky < fr; ++ky) {
                    for (std::size_t kx = 0; kx < fc; ++kx) {
                        const std::size_t py = oy * stride + ky, px = ox * stride + kx;
                        const bool inside = py >= pad && py < pad + h && px >= pad && px < pad + w;
                        patch.push_back(inside ? input.at(ch, py - pad, px - pad) : 0.0);
                        if (ch == 0) taps.push_back(py * wp + px);
                    }
                }
            }
            r.patches.push_back(std::move(patch));
            r.tap_index.push_back(std::move(taps));
        }
    }
    return r;
}

/// Convolution as unfold-and-matmul.
inline Tensor conv_im2col(const Tensor& input, const Tensor& kernel, const std::vector<double>& bias,
                          std::size_t stride, std::size_t pad) {
    const std::size_t co = kernel.dim(0), fr = kernel.dim(2), fc = kernel.dim(3);
    const Im2col cols = im2col(input, fr, fc, stride, pad);
    const std::size_t taps = kernel.size() / co;
    Tensor out({co, cols.out_rows, cols.out_cols});
    for (std::size_t o = 0; o < co; ++o) {
        for (std::size_t p = 0; p < cols.patches.size(); ++p) {
            double acc = 0.0;
            for (std::size_t t = 0; t < taps; ++t) acc += kernel[o * taps + t] * cols.patches[p][t];
            out[o * cols.patches.size() + p] = acc + (bias.empty() ? 0.0 : bias[o]);
        }
    }
    return out;
}

/// Random MobileNetV3-flavoured spec: stem, up to `max_blocks` bottlenecks
/// (expand, depthwise, optional SE, project, optional residual), head with
/// GAP and two FC layers.
inline NetworkSpec random_spec(std::mt19937_64& rng, std::size_t max_blocks = 4, std::size_t max_channels = 8,
                               std::size_t max_spatial = 16) {
    NetworkSpec s;
    s.name = "random";
    std::size_t c = pick(rng, 1, 3);
    std::size_t h = pick(rng, 4, max_spatial), w = pick(rng, 4, max_spatial);
    s.input_shape = {c, h, w};
    auto act = [&]() { return pick(rng, 0, 1) ? LayerKind::hard_swish : LayerKind::relu; };
    auto add = [&](LayerSpec l) {
        s.layers.push_back(l);
        return s.layers.size() - 1;
    };
    auto conv_out = [](std::size_t x, std::size_t k, std::size_t p, std::size_t st) {
        return (x + 2 * p - k) / st + 1;
    };
    auto fits = [](std::size_t x, std::size_t k, std::size_t p, std::size_t st) {
        return x + 2 * p >= k && (x + 2 * p - k) % st == 0;
    };
    int id = 0;
    auto name = [&](const char* base) { return std::string(base) + std::to_string(id++); };

    // stem
    {
        LayerSpec l;
        l.kind = LayerKind::conv;
        l.name = name("stem");
        l.out_channels = pick(rng, 2, max_channels);
        l.kernel_rows = l.kernel_cols = 3;
        l.padding = 1;
        l.stride = (fits(h, 3, 1, 2) && fits(w, 3, 1, 2) && pick(rng, 0, 1)) ? 2 : 1;
        l.bias = pick(rng, 0, 1) == 1;
        add(l);
        h = conv_out(h, 3, 1, l.stride);
        w = conv_out(w, 3, 1, l.stride);
        c = l.out_channels;
        LayerSpec bn;
        bn.kind = LayerKind::batchnorm;
        bn.name = name("bn");
        add(bn);
        add({.kind = act()});
    }
    const std::size_t blocks = pick(rng, 1, max_blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        LayerSpec ex;
        ex.kind = LayerKind::pointwise_conv;
        ex.name = name("expand");
        ex.out_channels = pick(rng, c, max_channels);
        const std::size_t block_start = add(ex);
        const std::size_t ce = ex.out_channels;
        LayerSpec bn;
        bn.kind = LayerKind::batchnorm;
        bn.name = name("bn");
        add(bn);
        add({.kind = act()});

        LayerSpec dw;
        dw.kind = LayerKind::depthwise_conv;
        dw.name = name("dw");
        const std::size_t k = pick(rng, 0, 1) ? 3 : 5;
        dw.kernel_rows = dw.kernel_cols = k;
        dw.padding = k / 2;
        dw.stride = (fits(h, k, dw.padding, 2) && fits(w, k, dw.padding, 2) && pick(rng, 0, 2) == 0) ? 2 : 1;
        if (!fits(h, k, dw.padding, dw.stride) || !fits(w, k, dw.padding, dw.stride)) {
            dw.kernel_rows = dw.kernel_cols = 1;
            dw.padding = 0;
            dw.stride = 1;
        }
        add(dw);
        h = conv_out(h, dw.kernel_rows, dw.padding, dw.stride);
        w = conv_out(w, dw.kernel_cols, dw.padding, dw.stride);
        bn.name = name("bn");
        add(bn);
        add({.kind = act()});
        if (pick(rng, 0, 1)) {
            LayerSpec se;
            se.kind = LayerKind::se_block;
            se.name = name("se");
            se.reduced_channels = pick(rng, 1, std::max<std::size_t>(1, ce / 2));
            add(se);
        }
        LayerSpec pr;
        pr.kind = LayerKind::pointwise_conv;
        pr.name = name("project");
        pr.out_channels = pick(rng, 1, max_channels);
        if (dw.stride == 1 && pick(rng, 0, 1)) pr.out_channels = c;
        add(pr);
        bn.name = name("bn");
        add(bn);
        if (dw.stride == 1 && pr.out_channels == c) add({.kind = LayerKind::residual_add, .from = block_start});
        c = pr.out_channels;
    }
    LayerSpec last;
    last.kind = LayerKind::pointwise_conv;
    last.name = name("last");
    last.out_channels = pick(rng, 2, max_channels);
    add(last);
    LayerSpec bn;
    bn.kind = LayerKind::batchnorm;
    bn.name = name("bn");
    add(bn);
    add({.kind = LayerKind::hard_swish});
    add({.kind = LayerKind::gap});
    LayerSpec fc1;
    fc1.kind = LayerKind::fc;
    fc1.name = name("fc");
    fc1.bias = true;
    fc1.out_features = pick(rng, 4, 16);
    add(fc1);
    add({.kind = LayerKind::hard_swish});
    LayerSpec fc2;
    fc2.kind = LayerKind::fc;
    fc2.name = name("fc");
    fc2.bias = true;
    fc2.out_features = pick(rng, 2, 10);
    add(fc2);
    s.class_count = fc2.out_features;
    return s;
}

}  // namespace xbar::test
