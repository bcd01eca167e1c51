#include "xbar/synth.hpp"

#include <cmath>

namespace xbar::synth {

namespace {

Tensor uniform(const Shape& shape, double lo, double hi, std::mt19937_64& rng, double sparsity = 0.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::bernoulli_distribution zero(sparsity);
    Tensor t(shape);
    for (auto& v : t.data()) {
        const double x = u(rng);
        v = sparsity > 0.0 && zero(rng) ? 0.0 : x;
    }
    return t;
}

}  // namespace

WeightStore random_weights(const NetworkSpec& spec, std::mt19937_64& rng, const WeightOptions& opt) {
    WeightStore store;
    for (const auto& [name, shape] : required_tensors(spec)) {
        const auto dot = name.rfind('.');
        const std::string field = name.substr(dot + 1);
        Tensor t;
        if (field == "weight") {
            // fan-in = product of all dims but the first
            double fan_in = 1.0;
            for (std::size_t d = 1; d < shape.size(); ++d) fan_in *= static_cast<double>(shape[d]);
            if (shape.size() == 3) fan_in = static_cast<double>(shape[1] * shape[2]);  // depthwise
            const double a = std::sqrt(3.0 / fan_in);
            t = uniform(shape, -a, a, rng, opt.sparsity);
        } else if (field == "bias") {
            t = uniform(shape, -0.5, 0.5, rng, opt.sparsity);
        } else if (field == "mean" || field == "beta") {
            t = uniform(shape, -0.5, 0.5, rng);
        } else if (field == "var") {
            t = uniform(shape, 0.5, 1.5, rng);
        } else {  // gamma; includes negative scales so both circuit branches appear
            t = uniform(shape, -1.5, 1.5, rng);
        }
        store.insert(name, std::move(t));
    }
    return store;
}

Tensor random_image(const Shape& shape, std::mt19937_64& rng) { return uniform(shape, -1.0, 1.0, rng); }

}  // namespace xbar::synth
