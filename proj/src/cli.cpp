#include "xbar/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "xbar/analyzer.hpp"
#include "xbar/error.hpp"
#include "xbar/netlist_io.hpp"
#include "xbar/pipeline.hpp"
#include "xbar/reference_net.hpp"
#include "xbar/synth.hpp"

namespace xbar::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string model;
    std::string weights;
    std::vector<std::string> inputs;
    std::string out_dir;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    std::size_t random_images = 0;
    std::size_t count = 1;
    double sparsity = 0.0;
    double g_unit = 1.0;
    double v_scale = 2.5e-3;
    double t_device = 1e-10;
    std::size_t stage_count = 0;
    std::size_t bins = 20;
    double w_max = 0.2;

    DeviceParams device() const {
        DeviceParams dp;
        dp.g_unit = g_unit;
        dp.v_scale = v_scale;
        return dp;
    }
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("xbarc", sink);
    log->set_pattern("[%l] %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("XBAR_LOG")) log->set_level(spdlog::level::from_str(env));
    return log;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << text;
}

fs::path prepare_out_dir(const std::string& dir) {
    if (dir.empty()) throw InputError("--out is required");
    fs::create_directories(dir);
    return fs::path(dir);
}

struct Loaded {
    NetworkSpec spec;
    WeightStore weights;
    BoundNetwork bound;
    CompiledNetwork compiled;
};

Loaded load(const RunConfig& cfg, spdlog::logger& log) {
    Loaded l;
    l.spec = load_model_config(cfg.model);
    log.info("model '{}' with {} layers", l.spec.name, l.spec.layers.size());
    l.weights = import_weights(cfg.weights);
    log.info("imported {} tensors from {}", l.weights.size(), cfg.weights);
    l.bound = bind(l.spec, l.weights);
    l.compiled = compile_network(l.bound, cfg.device());
    return l;
}

struct ImageJob {
    std::string source;
    std::optional<Tensor> image;
    std::string error;
};

std::vector<ImageJob> gather_images(const RunConfig& cfg, const Shape& shape) {
    std::vector<ImageJob> jobs;
    for (const auto& path : cfg.inputs) {
        ImageJob j;
        j.source = path;
        try {
            j.image = read_image(path, shape);
        } catch (const Error& e) {
            j.error = e.what();
        }
        jobs.push_back(std::move(j));
    }
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = 0; i < cfg.random_images; ++i) {
        jobs.push_back({"random:" + std::to_string(i), synth::random_image(shape, rng), {}});
    }
    return jobs;
}

std::string join_scores(const Tensor& scores) {
    std::string s;
    for (std::size_t i = 0; i < scores.size(); ++i) s += (i ? " " : "") + format_number(scores[i]);
    return s;
}

int cmd_compile(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
    const Loaded l = load(cfg, log);
    const fs::path dir = prepare_out_dir(cfg.out_dir);
    std::size_t files = 0;
    for (std::size_t k = 0; k < l.compiled.stages.size(); ++k) {
        const Stage& st = l.compiled.stages[k];
        const auto progs = stage_programs(st);
        if (progs.empty()) continue;
        const std::string name = std::to_string(k) + "_" + st.label + ".xbar";
        write_file(dir / name, export_netlist_bundle(progs));
        log.debug("wrote {} ({} arrays)", name, progs.size());
        ++files;
    }
    const ResourceCounts rc = count_resources(l.compiled);
    std::ostringstream summary;
    summary << "model " << l.spec.name << "\n";
    summary << "netlist_files " << files << "\n";
    summary << "memristors " << rc.memristors << "\n";
    summary << "opamps " << rc.opamps << "\n";
    summary << "opamps_baseline " << rc.opamps_baseline << "\n";
    for (std::size_t k = 0; k < rc.stages.size(); ++k) {
        const auto& s = rc.stages[k];
        summary << "stage " << k << " " << s.label << " " << to_string(s.kind) << " memristors " << s.memristors
                << " opamps " << s.opamps << "\n";
    }
    write_file(dir / "summary.txt", summary.str());
    out << summary.str();
    return ok;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
    const Loaded l = load(cfg, log);
    std::ostringstream rec;
    std::size_t failed = 0;
    const auto jobs = gather_images(cfg, l.spec.input_shape);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& j = jobs[i];
        rec << "image " << i << " " << j.source;
        if (!j.image) {
            rec << " status failed error " << std::quoted(j.error) << "\n";
            ++failed;
            continue;
        }
        const Tensor scores = forward_analog(l.compiled, *j.image);
        rec << " status ok label " << ref::argmax(scores.data()) << " scores " << join_scores(scores) << "\n";
    }
    if (failed) log.warn("{} of {} images failed", failed, jobs.size());
    if (!cfg.out_dir.empty()) write_file(prepare_out_dir(cfg.out_dir) / "simulate.txt", rec.str());
    out << rec.str();
    return ok;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
    if (cfg.tolerance < 0.0) throw ParameterError("--tolerance must be non-negative");
    const Loaded l = load(cfg, log);
    std::ostringstream rec;
    double worst = 0.0;
    std::size_t compared = 0, agreed = 0, failed = 0;
    const auto jobs = gather_images(cfg, l.spec.input_shape);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& j = jobs[i];
        rec << "image " << i << " " << j.source;
        if (!j.image) {
            rec << " status failed error " << std::quoted(j.error) << "\n";
            ++failed;
            continue;
        }
        const Tensor analog = forward_analog(l.compiled, *j.image);
        const Tensor digital = ref::forward(l.bound, *j.image);
        const double diff = max_abs_diff(analog, digital);
        const bool agree = ref::argmax(analog.data()) == ref::argmax(digital.data());
        worst = std::max(worst, diff);
        ++compared;
        agreed += agree ? 1 : 0;
        rec << " status ok max_abs_diff " << format_number(diff) << " argmax_agree " << (agree ? "yes" : "no") << "\n";
    }
    // Vacuous pass with no images; failed records do not count against parity.
    const bool pass = worst <= cfg.tolerance && agreed == compared;
    rec << "summary images " << compared << " failed " << failed << " agree " << agreed << " max_abs_diff "
        << format_number(worst) << " tolerance " << format_number(cfg.tolerance) << " result "
        << (pass ? "pass" : "fail") << "\n";
    if (!cfg.out_dir.empty()) write_file(prepare_out_dir(cfg.out_dir) / "compare.txt", rec.str());
    out << rec.str();
    return pass ? ok : parity_failed;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, spdlog::logger& log) {
    const Loaded l = load(cfg, log);
    ReportOptions opt;
    opt.w_max = cfg.w_max;
    opt.latency.t_device = cfg.t_device;
    opt.latency.stage_count = cfg.stage_count;
    opt.bins = cfg.bins;
    const CostReport r = build_report(l.compiled, l.weights, opt);
    const std::string text = report_text(r);
    if (!cfg.out_dir.empty()) {
        const fs::path dir = prepare_out_dir(cfg.out_dir);
        write_file(dir / "report.txt", text);
        write_file(dir / "report.json", report_json(r));
        write_file(dir / "histogram.csv", histogram_csv(r.histogram));
    }
    out << text;
    return ok;
}

int cmd_synth_weights(const RunConfig& cfg, std::ostream& out, spdlog::logger&) {
    const NetworkSpec spec = load_model_config(cfg.model);
    const fs::path dir = prepare_out_dir(cfg.out_dir);
    std::mt19937_64 rng(cfg.seed);
    const WeightStore w = synth::random_weights(spec, rng, {cfg.sparsity});
    export_weights(w, dir / "manifest.txt");
    out << "wrote " << w.size() << " tensors to " << (dir / "manifest.txt").string() << "\n";
    return ok;
}

int cmd_synth_images(const RunConfig& cfg, std::ostream& out, spdlog::logger&) {
    const NetworkSpec spec = load_model_config(cfg.model);
    const fs::path dir = prepare_out_dir(cfg.out_dir);
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = 0; i < cfg.count; ++i) {
        std::ostringstream name;
        name << "image_" << std::setw(4) << std::setfill('0') << i << ".f32";
        write_image(dir / name.str(), synth::random_image(spec.input_shape, rng));
        out << (dir / name.str()).string() << "\n";
    }
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Compile CNN models onto memristor crossbars, simulate and cost them", "xbarc"};
    app.require_subcommand(1);

    auto model_opts = [&](CLI::App* sub, bool weights) {
        sub->add_option("--model", cfg.model, "model config (JSON)")->required()->check(CLI::ExistingFile);
        if (weights) sub->add_option("--weights", cfg.weights, "weight manifest")->required()->check(CLI::ExistingFile);
        sub->add_option("--g-unit", cfg.g_unit, "siemens per unit weight");
        sub->add_option("--v-scale", cfg.v_scale, "volts per unit activation");
    };
    auto image_opts = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.inputs, "raw f32 image files");
        sub->add_option("--random-images", cfg.random_images, "append N seeded random images");
        sub->add_option("--seed", cfg.seed, "seed for generated images");
        sub->add_option("--out", cfg.out_dir, "also write records under this directory");
    };

    auto* compile = app.add_subcommand("compile", "emit one netlist per crossbar stage plus summary.txt");
    model_opts(compile, true);
    compile->add_option("--out", cfg.out_dir)->required();

    auto* simulate = app.add_subcommand("simulate", "analog inference: scores and labels per image");
    model_opts(simulate, true);
    image_opts(simulate);

    auto* compare = app.add_subcommand("compare", "analog vs digital reference parity");
    model_opts(compare, true);
    image_opts(compare);
    compare->add_option("--tolerance", cfg.tolerance, "max allowed |analog - digital|");

    auto* report = app.add_subcommand("report", "resource, power, latency and weight histogram");
    model_opts(report, true);
    report->add_option("--out", cfg.out_dir);
    report->add_option("--t-device", cfg.t_device, "seconds per analog stage");
    report->add_option("--stage-count", cfg.stage_count, "override sequential stage count");
    report->add_option("--bins", cfg.bins, "histogram bins");
    report->add_option("--w-max", cfg.w_max, "weight magnitude for the worst-case power model");

    auto* synth_w = app.add_subcommand("synth-weights", "write seeded random weights for a model");
    model_opts(synth_w, false);
    synth_w->add_option("--out", cfg.out_dir)->required();
    synth_w->add_option("--seed", cfg.seed);
    synth_w->add_option("--sparsity", cfg.sparsity, "fraction of conv/fc weights forced to zero");

    auto* synth_i = app.add_subcommand("synth-images", "write seeded random f32 images for a model");
    model_opts(synth_i, false);
    synth_i->add_option("--out", cfg.out_dir)->required();
    synth_i->add_option("--seed", cfg.seed);
    synth_i->add_option("--count", cfg.count);

    auto log = make_logger(err);
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : user_error;
    }

    try {
        if (compile->parsed()) return cmd_compile(cfg, out, *log);
        if (simulate->parsed()) return cmd_simulate(cfg, out, *log);
        if (compare->parsed()) return cmd_compare(cfg, out, *log);
        if (report->parsed()) return cmd_report(cfg, out, *log);
        if (synth_w->parsed()) return cmd_synth_weights(cfg, out, *log);
        if (synth_i->parsed()) return cmd_synth_images(cfg, out, *log);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return user_error;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return user_error;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return internal_error;
    }
    return internal_error;
}

}  // namespace xbar::cli
