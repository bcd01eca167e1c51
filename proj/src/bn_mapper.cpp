#include "xbar/bn_mapper.hpp"

#include <cmath>
#include <vector>

#include "xbar/error.hpp"

namespace xbar {

void BNParams::validate() const {
    if (!std::isfinite(mean) || !std::isfinite(var) || !std::isfinite(gamma) || !std::isfinite(beta)) {
        throw ParameterError("batchnorm parameters must be finite");
    }
    if (var < 0.0) throw ParameterError("batchnorm variance must be non-negative");
    if (!(eps > 0.0)) throw ParameterError("batchnorm eps must be positive");
}

namespace {

template <std::size_t N>
CrossbarProgram single_column(const std::array<double, N>& weights, const DeviceParams& dp, std::string label) {
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < N; ++i) {
        if (weights[i] != 0.0) cells.push_back({i, 0, weight_to_resistance(weights[i], dp)});
    }
    return CrossbarProgram(std::move(label), N, 1, dp.feedback_resistance(), std::move(cells));
}

}  // namespace

BNCircuit compile_bn(const BNParams& p, const DeviceParams& dp, const std::string& label) {
    p.validate();
    BNCircuit c;
    c.scale = std::abs(p.gamma) / std::sqrt(p.var + p.eps);
    c.stage1_weights = p.gamma >= 0.0 ? std::array<double, 4>{1, 0, 0, 1} : std::array<double, 4>{0, 1, 1, 0};
    c.stage2_weights = {c.scale, 0.0, 0.0};
    if (p.beta > 0.0) c.stage2_weights[2] = p.beta;
    else if (p.beta < 0.0) c.stage2_weights[1] = -p.beta;
    c.stage1 = single_column(c.stage1_weights, dp, label + ".sub");
    c.stage2 = single_column(c.stage2_weights, dp, label + ".scale");
    return c;
}

double evaluate_bn_circuit(const BNCircuit& c, double x, const BNParams& p, const DeviceParams& dp) {
    double v = x;
    evaluate_bn_circuit(c, std::span<double>(&v, 1), p, dp);
    return v;
}

void evaluate_bn_circuit(const BNCircuit& c, std::span<double> values, const BNParams& p, const DeviceParams& dp) {
    const double vs = dp.v_scale;
    std::array<double, 4> in1{};
    std::array<double, 3> in2{0.0, vs, -vs};
    std::array<double, 1> out{};
    for (double& x : values) {
        in1 = {x * vs, p.mean * vs, -x * vs, -p.mean * vs};
        evaluate_crossbar(c.stage1, in1, out);
        in2[0] = out[0];
        evaluate_crossbar(c.stage2, in2, out);
        x = out[0] / vs;
    }
}

}  // namespace xbar
