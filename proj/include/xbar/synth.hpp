#pragma once

#include <cstdint>
#include <random>

#include "xbar/network.hpp"
#include "xbar/tensor.hpp"

// Seeded generators for demo weights and images. Not a training substitute:
// values are scaled so activations stay O(1) through deep stacks.
namespace xbar::synth {

struct WeightOptions {
    double sparsity = 0.0;  // probability that a conv / fc weight is exactly zero
};

WeightStore random_weights(const NetworkSpec& spec, std::mt19937_64& rng, const WeightOptions& opt = {});

/// Uniform in [-1, 1].
Tensor random_image(const Shape& shape, std::mt19937_64& rng);

}  // namespace xbar::synth
