#pragma once

#include <array>
#include <span>

#include "xbar/crossbar.hpp"

namespace xbar {

/// Batch-norm statistics and affine parameters for one channel.
struct BNParams {
    double mean = 0.0;
    double var = 1.0;
    double gamma = 1.0;
    double beta = 0.0;
    double eps = 1e-5;

    /// Throws ParameterError for var < 0, eps <= 0 or non-finite values.
    void validate() const;
    bool operator==(const BNParams&) const = default;
};

/// Two cascaded single-column crossbars.
///
/// Stage 1 inputs are (x, E[x], -x, -E[x]); its weights are (1, 0, 0, 1) for
/// gamma >= 0 and (0, 1, 1, 0) for gamma < 0, so the TIA output is
/// -(x - E[x]) or -(E[x] - x). Stage 2 inputs are (stage-1 output, +V_b, -V_b)
/// with weights (k, tap+, tap-), k = |gamma| / sqrt(var + eps). A positive beta
/// is tapped from -V_b and a negative one from +V_b so that the inverting TIA
/// delivers +beta. Zero entries have no device.
struct BNCircuit {
    std::array<double, 4> stage1_weights{};
    std::array<double, 3> stage2_weights{};
    double scale = 0.0;  // k
    CrossbarProgram stage1;
    CrossbarProgram stage2;

    bool operator==(const BNCircuit&) const = default;
};

BNCircuit compile_bn(const BNParams& p, const DeviceParams& dp, const std::string& label = "bn");

/// Runs both stages for one activation value and returns activation units.
double evaluate_bn_circuit(const BNCircuit& c, double x, const BNParams& p, const DeviceParams& dp);

/// In-place over all values of one channel.
void evaluate_bn_circuit(const BNCircuit& c, std::span<double> values, const BNParams& p, const DeviceParams& dp);

}  // namespace xbar
