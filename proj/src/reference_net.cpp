#include "xbar/reference_net.hpp"

#include <algorithm>
#include <cmath>

#include "xbar/conv_mapper.hpp"
#include "xbar/error.hpp"

namespace xbar::ref {

Tensor conv2d(const Tensor& input, const Tensor& kernel, std::span<const double> bias, std::size_t stride,
              std::size_t padding) {
    if (input.rank() != 3) throw GeometryError("conv2d input must be (C, H, W), got " + shape_to_string(input.shape()));
    if (kernel.rank() != 4) {
        throw GeometryError("conv2d kernel must be (C_out, C_in, F_r, F_c), got " + shape_to_string(kernel.shape()));
    }
    const std::size_t ci = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t co = kernel.dim(0), fr = kernel.dim(2), fc = kernel.dim(3);
    if (kernel.dim(1) != ci) {
        throw GeometryError("conv2d kernel expects " + std::to_string(kernel.dim(1)) + " input channels, input has " +
                            std::to_string(ci));
    }
    if (!bias.empty() && bias.size() != co) throw GeometryError("conv2d bias length differs from output channels");
    const std::size_t oh = output_extent(h, fr, padding, stride);
    const std::size_t ow = output_extent(w, fc, padding, stride);

    Tensor out({co, oh, ow});
    for (std::size_t o = 0; o < co; ++o) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (std::size_t c = 0; c < ci; ++c) {
                    for (std::size_t r = 0; r < fr; ++r) {
                        // padded coordinate minus padding; out-of-range reads are zero
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * stride + r) -
                                                  static_cast<std::ptrdiff_t>(padding);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t k = 0; k < fc; ++k) {
                            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * stride + k) -
                                                      static_cast<std::ptrdiff_t>(padding);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                            acc += input.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) *
                                   kernel[((o * ci + c) * fr + r) * fc + k];
                        }
                    }
                }
                out.at(o, y, x) = acc + (bias.empty() ? 0.0 : bias[o]);
            }
        }
    }
    return out;
}

Tensor depthwise_conv(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    if (input.rank() != 3 || kernel.rank() != 3) {
        throw GeometryError("depthwise_conv expects (C, H, W) input and (C, F_r, F_c) kernel");
    }
    if (input.dim(0) != kernel.dim(0)) {
        throw GeometryError("depthwise_conv: input has " + std::to_string(input.dim(0)) + " channels, kernel has " +
                            std::to_string(kernel.dim(0)));
    }
    const std::size_t c = input.dim(0), fr = kernel.dim(1), fc = kernel.dim(2);
    const std::size_t oh = output_extent(input.dim(1), fr, padding, stride);
    const std::size_t ow = output_extent(input.dim(2), fc, padding, stride);
    Tensor out({c, oh, ow});
    for (std::size_t ch = 0; ch < c; ++ch) {
        Tensor k({1, 1, fr, fc}, std::vector<double>(kernel.data().begin() + static_cast<std::ptrdiff_t>(ch * fr * fc),
                                                     kernel.data().begin() + static_cast<std::ptrdiff_t>((ch + 1) * fr * fc)));
        const Tensor plane = conv2d(input.channel(ch), k, {}, stride, padding);
        std::copy(plane.data().begin(), plane.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(ch * oh * ow));
    }
    return out;
}

Tensor batchnorm(const Tensor& x, const BatchNormWeights& p) {
    if (!(p.eps > 0.0)) throw ParameterError("batchnorm eps must be positive");
    const std::size_t channels = x.rank() == 0 ? 0 : x.dim(0);
    if (p.mean.size() != channels || p.var.size() != channels || p.gamma.size() != channels ||
        p.beta.size() != channels) {
        throw GeometryError("batchnorm parameters do not match " + std::to_string(channels) + " channels");
    }
    const std::size_t plane = channels ? x.size() / channels : 0;
    Tensor y = x;
    for (std::size_t c = 0; c < channels; ++c) {
        if (p.var[c] < 0.0) throw ParameterError("batchnorm variance is negative in channel " + std::to_string(c));
        const double denom = std::sqrt(p.var[c] + p.eps);
        for (std::size_t k = 0; k < plane; ++k) {
            double& v = y[c * plane + k];
            v = (v - p.mean[c]) / denom * p.gamma[c] + p.beta[c];
        }
    }
    return y;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double hard_sigmoid(double x) { return std::clamp(x + 3.0, 0.0, 6.0) / 6.0; }

double hard_swish(double x) { return x * hard_sigmoid(x); }

double activation(double x, Activation kind) {
    switch (kind) {
        case Activation::relu: return relu(x);
        case Activation::hard_sigmoid: return hard_sigmoid(x);
        case Activation::hard_swish: return hard_swish(x);
    }
    return x;
}

Tensor activation(const Tensor& x, Activation kind) {
    Tensor y = x;
    for (auto& v : y.data()) v = activation(v, kind);
    return y;
}

Tensor gap(const Tensor& input) {
    if (input.rank() == 1) {
        if (input.size() == 0) throw GeometryError("gap of an empty vector");
        return input;
    }
    if (input.rank() != 3) throw GeometryError("gap expects (C, H, W), got " + shape_to_string(input.shape()));
    const std::size_t c = input.dim(0), n = input.dim(1) * input.dim(2);
    if (n == 0) throw GeometryError("gap over empty spatial dims");
    Tensor out({c});
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += input[ch * n + k];
        out[ch] = sum / static_cast<double>(n);
    }
    return out;
}

Tensor fc(const Tensor& x, const Tensor& weight, std::span<const double> bias) {
    if (weight.rank() != 2) throw GeometryError("fc weight must be a matrix, got " + shape_to_string(weight.shape()));
    const std::size_t rows = weight.dim(0), cols = weight.dim(1);
    if (cols != x.size()) {
        throw GeometryError("fc weight has " + std::to_string(cols) + " columns, input has " + std::to_string(x.size()) +
                            " values");
    }
    if (!bias.empty() && bias.size() != rows) {
        throw GeometryError("fc bias has " + std::to_string(bias.size()) + " entries, weight has " +
                            std::to_string(rows) + " rows");
    }
    Tensor y({rows});
    for (std::size_t j = 0; j < rows; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cols; ++k) acc += weight[j * cols + k] * x[k];
        y[j] = acc + (bias.empty() ? 0.0 : bias[j]);
    }
    return y;
}

Tensor se_block(const Tensor& input, const FcWeights& fc1, const FcWeights& fc2) {
    if (input.rank() != 3) throw GeometryError("se_block expects (C, H, W), got " + shape_to_string(input.shape()));
    const std::size_t c = input.dim(0);
    if (fc1.weight.rank() != 2 || fc1.weight.dim(1) != c || fc2.weight.rank() != 2 || fc2.weight.dim(0) != c) {
        throw GeometryError("se_block fc dims do not match " + std::to_string(c) + " channels");
    }
    const Tensor hidden = activation(fc(gap(input), fc1.weight, fc1.bias), Activation::relu);
    const Tensor gate = activation(fc(hidden, fc2.weight, fc2.bias), Activation::hard_sigmoid);
    Tensor out = input;
    const std::size_t plane = input.dim(1) * input.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t k = 0; k < plane; ++k) out[ch * plane + k] *= gate[ch];
    }
    return out;
}

Tensor forward(const BoundNetwork& net, const Tensor& image) {
    if (image.shape() != net.spec.input_shape) {
        throw GeometryError("image shape " + shape_to_string(image.shape()) + " differs from model input " +
                            shape_to_string(net.spec.input_shape));
    }
    std::vector<Tensor> layer_inputs;
    layer_inputs.reserve(net.spec.layers.size());
    Tensor x = image;
    for (std::size_t k = 0; k < net.spec.layers.size(); ++k) {
        const LayerSpec& l = net.spec.layers[k];
        const LayerParams& p = net.params[k];
        layer_inputs.push_back(x);
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::pointwise_conv: x = conv2d(x, p.kernel, p.bias, l.stride, l.padding); break;
            case LayerKind::depthwise_conv: x = depthwise_conv(x, p.kernel, l.stride, l.padding); break;
            case LayerKind::batchnorm: x = batchnorm(x, p.bn); break;
            case LayerKind::relu: x = activation(x, Activation::relu); break;
            case LayerKind::hard_sigmoid: x = activation(x, Activation::hard_sigmoid); break;
            case LayerKind::hard_swish: x = activation(x, Activation::hard_swish); break;
            case LayerKind::gap: x = gap(x); break;
            case LayerKind::fc: x = fc(x, p.fc.weight, p.fc.bias); break;
            case LayerKind::se_block: x = se_block(x, p.se_fc1, p.se_fc2); break;
            case LayerKind::residual_add: {
                const Tensor& skip = layer_inputs.at(l.from);
                if (skip.shape() != x.shape()) throw GeometryError("residual_add joins unequal shapes");
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += skip[i];
                break;
            }
        }
    }
    return x.reshaped({x.size()});
}

std::size_t argmax(std::span<const double> scores) {
    if (scores.empty()) throw InputError("argmax of empty score vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

}  // namespace xbar::ref
