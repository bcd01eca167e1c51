#include "xbar/analog_functional.hpp"

#include "xbar/error.hpp"

namespace xbar::analog {

double relu_circuit(double x) { return x > 0.0 ? x : 0.0; }

double hard_sigmoid_circuit(double x) {
    // The limiter sits on the adder output, ahead of the divider, so the clip
    // points are 0 and 6 volts-equivalent.
    const double summed = x + 3.0;
    const double limited = LimiterSpec{0.0, 6.0}(summed);
    return limited / 6.0;
}

double hard_swish_circuit(double x) { return x * hard_sigmoid_circuit(x); }

double activation_circuit(double x, Activation kind) {
    switch (kind) {
        case Activation::relu: return relu_circuit(x);
        case Activation::hard_sigmoid: return hard_sigmoid_circuit(x);
        case Activation::hard_swish: return hard_swish_circuit(x);
    }
    return x;
}

void apply_activation(std::span<double> values, Activation kind) {
    for (double& v : values) v = activation_circuit(v, kind);
}

std::vector<double> analog_add(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw GeometryError("analog_add of " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " values");
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Tensor analog_mul(const Tensor& x, std::span<const double> s) {
    if (x.rank() != 3 || x.dim(0) != s.size()) {
        throw GeometryError("analog_mul: " + std::to_string(s.size()) + " gains for tensor " + shape_to_string(x.shape()));
    }
    Tensor out = x;
    const std::size_t plane = x.dim(1) * x.dim(2);
    for (std::size_t c = 0; c < s.size(); ++c) {
        for (std::size_t k = 0; k < plane; ++k) out[c * plane + k] *= s[c];
    }
    return out;
}

}  // namespace xbar::analog
