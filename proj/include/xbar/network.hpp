#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xbar/tensor.hpp"

namespace xbar {

enum class LayerKind {
    conv,
    depthwise_conv,
    pointwise_conv,
    batchnorm,
    relu,
    hard_sigmoid,
    hard_swish,
    gap,
    fc,
    se_block,
    residual_add,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view s);

enum class Activation { relu, hard_sigmoid, hard_swish };

/// One entry of the model description. Only the fields relevant to `kind`
/// are read; the rest keep their defaults.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::string name;                 // weight-name prefix for parameterized layers
    std::size_t out_channels = 0;     // conv, pointwise_conv
    std::size_t kernel_rows = 1;
    std::size_t kernel_cols = 1;
    std::size_t stride = 1;
    std::size_t padding = 0;
    bool bias = false;                // conv, pointwise_conv, fc
    std::size_t out_features = 0;     // fc
    std::size_t reduced_channels = 0; // se_block squeeze width
    double eps = 1e-5;                // batchnorm
    std::size_t from = 0;             // residual_add: skip source is the input of layer `from`

    bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
    std::string name;
    Shape input_shape;  // (C, H, W)
    std::size_t class_count = 0;
    std::vector<LayerSpec> layers;

    bool operator==(const NetworkSpec&) const = default;
};

/// Per-layer input and output shapes. Throws GeometryError naming both layers
/// when the chain breaks, and when the final output volume differs from
/// class_count.
struct ShapeTrace {
    std::vector<Shape> inputs;
    std::vector<Shape> outputs;
};
ShapeTrace infer_shapes(const NetworkSpec& spec);

/// name -> tensor, ordered so iteration is deterministic.
class WeightStore {
public:
    void insert(std::string name, Tensor t);
    bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    /// Throws LookupError naming the tensor.
    const Tensor& get(const std::string& name) const;
    const std::map<std::string, Tensor>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    std::string source;  // manifest path, when imported

private:
    std::map<std::string, Tensor> entries_;
};

struct FcWeights {
    Tensor weight;  // (out, in)
    std::vector<double> bias;  // out; zeros when the layer has no bias
};

struct BatchNormWeights {
    std::vector<double> mean, var, gamma, beta;
    double eps = 1e-5;
};

/// Parameters of one layer after lookup and shape checking.
struct LayerParams {
    Tensor kernel;             // conv: (Co, Ci, Fr, Fc); depthwise: (C, Fr, Fc)
    std::vector<double> bias;  // conv / pointwise; empty means zero
    BatchNormWeights bn;
    FcWeights fc;              // fc
    FcWeights se_fc1, se_fc2;  // se_block
};

/// A NetworkSpec with every parameter resolved from a WeightStore.
struct BoundNetwork {
    NetworkSpec spec;
    ShapeTrace shapes;
    std::vector<LayerParams> params;
};

/// Resolve and shape-check all weights. Missing tensors raise LookupError
/// naming the tensor; wrong shapes raise GeometryError.
BoundNetwork bind(const NetworkSpec& spec, const WeightStore& weights);

/// Names and shapes of every tensor `bind` will ask for, in layer order.
std::vector<std::pair<std::string, Shape>> required_tensors(const NetworkSpec& spec);

}  // namespace xbar
