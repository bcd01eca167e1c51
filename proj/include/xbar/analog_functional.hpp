#pragma once

#include <span>
#include <vector>

#include "xbar/network.hpp"
#include "xbar/tensor.hpp"

// Behavioral models of the non-crossbar blocks. Inputs and outputs are in
// decoded activation units.
namespace xbar::analog {

/// Diode limiter: passes values inside [lo, hi] and clips the rest.
struct LimiterSpec {
    double lo = 0.0;
    double hi = 1.0;

    double operator()(double v) const noexcept {
        if (v < lo) return lo;
        if (v > hi) return hi;
        return v;
    }
};

double relu_circuit(double x);
/// Adder (+3), divider (/6), then the [0, 1] limiter.
double hard_sigmoid_circuit(double x);
/// hard_sigmoid_circuit followed by a multiplier against the input.
double hard_swish_circuit(double x);
double activation_circuit(double x, Activation kind);
void apply_activation(std::span<double> values, Activation kind);

/// Residual junction. Throws GeometryError on length mismatch.
std::vector<double> analog_add(std::span<const double> a, std::span<const double> b);

/// SE channel multiplier: channel c of a (C, H, W) tensor scaled by s[c].
Tensor analog_mul(const Tensor& x, std::span<const double> s);

}  // namespace xbar::analog
