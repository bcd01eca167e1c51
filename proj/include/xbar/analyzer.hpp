#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xbar/crossbar.hpp"
#include "xbar/network.hpp"
#include "xbar/pipeline.hpp"

namespace xbar {

/// Op-amps per element for the behavioral blocks. Hard swish is the hard
/// sigmoid pair plus a multiplier stage.
struct OpampConstants {
    std::size_t relu = 1;
    std::size_t hard_sigmoid = 2;
    std::size_t hard_swish = 3;
    std::size_t adder = 1;
    std::size_t multiplier = 1;
};

struct StageResources {
    std::string label;
    LayerKind kind = LayerKind::relu;
    std::size_t memristors = 0;
    std::size_t opamps = 0;
    std::size_t opamps_baseline = 0;
    /// Conv / FC columns. Only these differ between the inverted mapping and
    /// the dual-array baseline.
    std::size_t split_columns = 0;
};

struct ResourceCounts {
    std::size_t memristors = 0;
    std::size_t opamps = 0;
    std::size_t opamps_baseline = 0;
    std::size_t split_opamps = 0;           // TIAs on conv / FC columns
    std::size_t split_opamps_baseline = 0;  // 2 per such column
    std::vector<StageResources> stages;
};

/// One TIA per column everywhere; functional blocks add OpampConstants per
/// element. The baseline doubles the amplifiers on conv and FC columns only.
ResourceCounts count_resources(const CompiledNetwork& net, const OpampConstants& k = {});

/// Counts for a single program treated as a conv / FC array.
ResourceCounts count_resources(const CrossbarProgram& prog);

struct PowerEstimate {
    double per_device_w = 0.0;
    double total_w = 0.0;
    std::size_t devices = 0;
};

/// Worst-case static power: every device sees v_max = v_scale across a
/// conductance of w_max * g_unit, so P = v^2 * w * g.
PowerEstimate estimate_power(std::size_t memristors, const DeviceParams& dp, double w_max = 0.2);

struct LatencyModel {
    double t_device = 1e-10;     // seconds per sequential analog stage
    std::size_t stage_count = 0; // 0 means derive from the compiled network
};

/// Sequential analog stages in the pipeline: one per crossbar or behavioral
/// layer, two for batch norm, six for squeeze-and-excitation.
std::size_t analog_depth(const CompiledNetwork& net);

double estimate_latency(std::size_t stage_count, double t_device);
double estimate_latency(const CompiledNetwork& net, const LatencyModel& m);

struct Histogram {
    std::vector<double> edges;          // counts.size() + 1 entries
    std::vector<std::size_t> counts;

    std::size_t total() const;
};

/// Uniform bins over [min, max], half-open except the last. All-equal input
/// collapses to a single closed bin; empty input gives an empty histogram.
Histogram weight_histogram(const std::vector<double>& values, std::size_t bins);
Histogram weight_histogram(const WeightStore& store, std::size_t bins);

std::string histogram_csv(const Histogram& h);

/// Reference figures the report prints next to the model output.
struct ReferenceFigures {
    static constexpr double device_power_w = 1.1e-6;
    static constexpr double cmos_power_w = 60e-6;
    static constexpr double latency_s = 1.24e-6;
    static constexpr double gpu_latency_s = 165.4e-6;
};

struct CostReport {
    ResourceCounts resources;
    PowerEstimate power;
    double w_max = 0.2;
    std::size_t stage_count = 0;
    double t_device = 0.0;
    double latency_s = 0.0;
    Histogram histogram;

    /// split_opamps / split_opamps_baseline, 0 when there are none.
    double split_opamp_ratio() const;
};

struct ReportOptions {
    double w_max = 0.2;
    LatencyModel latency;
    std::size_t bins = 20;
    OpampConstants opamps;
};

CostReport build_report(const CompiledNetwork& net, const WeightStore& weights, const ReportOptions& opt = {});

std::string report_text(const CostReport& r);
std::string report_json(const CostReport& r);

}  // namespace xbar
