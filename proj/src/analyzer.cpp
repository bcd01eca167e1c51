#include "xbar/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "xbar/error.hpp"
#include "xbar/netlist_io.hpp"

namespace xbar {

namespace {

void add_array(StageResources& s, const CrossbarProgram& p, bool split) {
    s.memristors += p.memristor_count();
    s.opamps += p.cols();
    s.opamps_baseline += split ? 2 * p.cols() : p.cols();
    if (split) s.split_columns += p.cols();
}

void add_blocks(StageResources& s, std::size_t elements, std::size_t per_element) {
    s.opamps += elements * per_element;
    s.opamps_baseline += elements * per_element;
}

}  // namespace

ResourceCounts count_resources(const CompiledNetwork& net, const OpampConstants& k) {
    ResourceCounts rc;
    for (const Stage& st : net.stages) {
        StageResources s;
        s.label = st.label;
        s.kind = st.kind;
        const std::size_t elems = shape_volume(st.output_shape);
        std::visit(
            [&](const auto& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, ConvStage>) {
                    for (const auto& c : body.programs) add_array(s, c.program, true);
                } else if constexpr (std::is_same_v<T, FcStage>) {
                    add_array(s, body.fc.program, true);
                } else if constexpr (std::is_same_v<T, GapStage>) {
                    add_array(s, body.gap.program, false);
                } else if constexpr (std::is_same_v<T, BnStage>) {
                    for (const auto& c : body.circuits) {
                        add_array(s, c.stage1, false);
                        add_array(s, c.stage2, false);
                    }
                } else if constexpr (std::is_same_v<T, SeStage>) {
                    add_array(s, body.squeeze.program, false);
                    add_array(s, body.fc1.program, true);
                    add_array(s, body.fc2.program, true);
                    add_blocks(s, body.fc1.outputs, k.relu);
                    add_blocks(s, body.fc2.outputs, k.hard_sigmoid);
                    add_blocks(s, elems, k.multiplier);
                } else if constexpr (std::is_same_v<T, ActivationStage>) {
                    switch (body.kind) {
                        case Activation::relu: add_blocks(s, elems, k.relu); break;
                        case Activation::hard_sigmoid: add_blocks(s, elems, k.hard_sigmoid); break;
                        case Activation::hard_swish: add_blocks(s, elems, k.hard_swish); break;
                    }
                } else if constexpr (std::is_same_v<T, ResidualStage>) {
                    add_blocks(s, elems, k.adder);
                }
            },
            st.body);
        rc.memristors += s.memristors;
        rc.opamps += s.opamps;
        rc.opamps_baseline += s.opamps_baseline;
        rc.split_opamps += s.split_columns;
        rc.split_opamps_baseline += 2 * s.split_columns;
        rc.stages.push_back(std::move(s));
    }
    return rc;
}

ResourceCounts count_resources(const CrossbarProgram& prog) {
    ResourceCounts rc;
    StageResources s;
    s.label = prog.label();
    add_array(s, prog, true);
    rc.memristors = s.memristors;
    rc.opamps = s.opamps;
    rc.opamps_baseline = s.opamps_baseline;
    rc.split_opamps = s.split_columns;
    rc.split_opamps_baseline = 2 * s.split_columns;
    rc.stages.push_back(std::move(s));
    return rc;
}

PowerEstimate estimate_power(std::size_t memristors, const DeviceParams& dp, double w_max) {
    if (w_max < 0.0) throw ParameterError("w_max must be non-negative");
    PowerEstimate p;
    p.per_device_w = dp.v_scale * dp.v_scale * w_max * dp.g_unit;
    p.devices = memristors;
    p.total_w = p.per_device_w * static_cast<double>(memristors);
    return p;
}

std::size_t analog_depth(const CompiledNetwork& net) {
    std::size_t depth = 0;
    for (const Stage& st : net.stages) {
        if (std::holds_alternative<BnStage>(st.body)) depth += 2;
        else if (std::holds_alternative<SeStage>(st.body)) depth += 6;
        else depth += 1;
    }
    return depth;
}

double estimate_latency(std::size_t stage_count, double t_device) {
    if (!(t_device > 0.0)) throw ParameterError("t_device must be positive");
    if (stage_count == 0) throw ParameterError("stage_count must be at least 1");
    return t_device * static_cast<double>(stage_count);
}

double estimate_latency(const CompiledNetwork& net, const LatencyModel& m) {
    return estimate_latency(m.stage_count ? m.stage_count : std::max<std::size_t>(1, analog_depth(net)), m.t_device);
}

std::size_t Histogram::total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

Histogram weight_histogram(const std::vector<double>& values, std::size_t bins) {
    if (bins == 0) throw ParameterError("histogram needs at least one bin");
    Histogram h;
    if (values.empty()) return h;
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn_it, hi = *mx_it;
    if (lo == hi) {
        h.edges = {lo, hi};
        h.counts = {values.size()};
        return h;
    }
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto idx = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
        idx = std::min(idx, bins - 1);
        // settle against the stored edges so the half-open rule is exact
        while (idx > 0 && v < h.edges[idx]) --idx;
        while (idx + 1 < bins && v >= h.edges[idx + 1]) ++idx;
        ++h.counts[idx];
    }
    return h;
}

Histogram weight_histogram(const WeightStore& store, std::size_t bins) {
    std::vector<double> all;
    for (const auto& [_, t] : store.entries()) all.insert(all.end(), t.data().begin(), t.data().end());
    return weight_histogram(all, bins);
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin,lo,hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += std::to_string(i) + "," + format_number(h.edges[i]) + "," + format_number(h.edges[i + 1]) + "," +
               std::to_string(h.counts[i]) + "\n";
    }
    return out;
}

double CostReport::split_opamp_ratio() const {
    if (resources.split_opamps_baseline == 0) return 0.0;
    return static_cast<double>(resources.split_opamps) / static_cast<double>(resources.split_opamps_baseline);
}

CostReport build_report(const CompiledNetwork& net, const WeightStore& weights, const ReportOptions& opt) {
    CostReport r;
    r.resources = count_resources(net, opt.opamps);
    r.w_max = opt.w_max;
    r.power = estimate_power(r.resources.memristors, net.dp, opt.w_max);
    r.stage_count = opt.latency.stage_count ? opt.latency.stage_count : std::max<std::size_t>(1, analog_depth(net));
    r.t_device = opt.latency.t_device;
    r.latency_s = estimate_latency(r.stage_count, r.t_device);
    r.histogram = weight_histogram(weights, opt.bins);
    return r;
}

std::string report_text(const CostReport& r) {
    std::ostringstream os;
    const auto& rc = r.resources;
    os << "memristors " << rc.memristors << "\n";
    os << "opamps " << rc.opamps << "\n";
    os << "opamps_baseline " << rc.opamps_baseline << "\n";
    os << "conv_fc_opamps " << rc.split_opamps << "\n";
    os << "conv_fc_opamps_baseline " << rc.split_opamps_baseline << "\n";
    os << "conv_fc_opamp_ratio " << format_number(r.split_opamp_ratio()) << "\n";
    os << "power_per_device_w " << format_number(r.power.per_device_w) << "\n";
    os << "power_total_w " << format_number(r.power.total_w) << "\n";
    os << "power_w_max " << format_number(r.w_max) << "\n";
    os << "reference_power_per_device_w " << format_number(ReferenceFigures::device_power_w) << "\n";
    os << "reference_power_ratio " << format_number(r.power.per_device_w / ReferenceFigures::device_power_w)
       << "  # modeled V^2*G vs reference device estimate\n";
    os << "reference_cmos_power_w " << format_number(ReferenceFigures::cmos_power_w) << "\n";
    os << "latency_stage_count " << r.stage_count << "\n";
    os << "latency_t_device_s " << format_number(r.t_device) << "\n";
    os << "latency_s " << format_number(r.latency_s) << "\n";
    os << "reference_latency_s " << format_number(ReferenceFigures::latency_s) << "\n";
    os << "reference_gpu_latency_s " << format_number(ReferenceFigures::gpu_latency_s) << "\n";
    os << "histogram_bins " << r.histogram.counts.size() << "\n";
    for (const auto& s : rc.stages) {
        os << "stage " << s.label << " " << to_string(s.kind) << " memristors " << s.memristors << " opamps " << s.opamps
           << " baseline " << s.opamps_baseline << "\n";
    }
    return os.str();
}

std::string report_json(const CostReport& r) {
    using nlohmann::json;
    const auto& rc = r.resources;
    json j;
    j["memristor_count"] = rc.memristors;
    j["opamp_count"] = rc.opamps;
    j["opamp_count_baseline"] = rc.opamps_baseline;
    j["conv_fc_opamp_count"] = rc.split_opamps;
    j["conv_fc_opamp_count_baseline"] = rc.split_opamps_baseline;
    j["conv_fc_opamp_ratio"] = r.split_opamp_ratio();
    j["max_power_w"] = r.power.total_w;
    j["max_power_per_device_w"] = r.power.per_device_w;
    j["w_max"] = r.w_max;
    j["latency_s"] = r.latency_s;
    j["stage_count"] = r.stage_count;
    j["t_device_s"] = r.t_device;
    j["weight_histogram"] = {{"edges", r.histogram.edges}, {"counts", r.histogram.counts}};
    j["reference"] = {{"power_per_device_w", ReferenceFigures::device_power_w},
                      {"cmos_power_w", ReferenceFigures::cmos_power_w},
                      {"latency_s", ReferenceFigures::latency_s},
                      {"gpu_latency_s", ReferenceFigures::gpu_latency_s}};
    json stages = json::array();
    for (const auto& s : rc.stages) {
        stages.push_back({{"label", s.label},
                          {"kind", std::string(to_string(s.kind))},
                          {"memristors", s.memristors},
                          {"opamps", s.opamps},
                          {"opamps_baseline", s.opamps_baseline}});
    }
    j["stages"] = std::move(stages);
    return j.dump(2) + "\n";
}

}  // namespace xbar
