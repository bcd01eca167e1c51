#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "xbar/cli.hpp"
#include "xbar/netlist_io.hpp"

using namespace xbar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("xbar_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

// Input (2,1,1) flattened through a single identity FC.
struct IdentityModel {
    TempDir dir;
    std::string model, weights;
    IdentityModel() {
        model = (dir.path / "model.json").string();
        weights = (dir.path / "w" / "manifest.txt").string();
        write_text(model, R"({"name": "ident", "input_shape": [2, 1, 1], "class_count": 2,
            "layers": [{"kind": "fc", "name": "fc", "out_features": 2, "bias": false}]})");
        fs::create_directories(dir.path / "w");
        WeightStore w;
        w.insert("fc.weight", Tensor::matrix({{1, 0}, {0, 1}}));
        export_weights(w, weights);
    }
    std::string image(const std::string& name, std::vector<double> v) const {
        const fs::path p = dir.path / name;
        const std::size_t n = v.size();
        write_image(p, Tensor({n}, std::move(v)));
        return p.string();
    }
};

std::size_t count_lines(const std::string& s, const std::string& prefix) {
    std::istringstream in(s);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
    return n;
}

std::set<std::string> listing(const fs::path& root) {
    std::set<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) out.insert(fs::relative(e.path(), root).string());
    return out;
}

const fs::path example_model = fs::path(XBAR_SOURCE_DIR) / "configs" / "mobilenetv3_cifar10.json";

}  // namespace

TEST_CASE("compile: identity fc") {
    IdentityModel m;
    const std::string out = (m.dir.path / "out").string();
    const Result r = run({"compile", "--model", m.model, "--weights", m.weights, "--out", out});
    CHECK(r.code == 0);
    std::size_t xbar_files = 0;
    for (const auto& e : fs::directory_iterator(out)) xbar_files += e.path().extension() == ".xbar";
    CHECK(xbar_files == 1);
    CHECK(fs::exists(fs::path(out) / "0_fc.xbar"));
    const std::string summary = slurp(fs::path(out) / "summary.txt");
    CHECK(summary.find("memristors 2\n") != std::string::npos);
    CHECK(summary.find("opamps 2\n") != std::string::npos);
    CHECK(summary.find("opamps_baseline 4\n") != std::string::npos);
    CHECK(parse_netlist_bundle(slurp(fs::path(out) / "0_fc.xbar")).size() == 1);
}

TEST_CASE("compile: user errors") {
    IdentityModel m;
    write_text(m.dir.path / "w" / "manifest.txt", "VERSION 1\n");
    Result r = run({"compile", "--model", m.model, "--weights", m.weights, "--out", (m.dir.path / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("fc.weight") != std::string::npos);

    write_text(m.model, R"({"input_shape": [2, 1, 1], "class_count": 2, "layers": []})");
    r = run({"compile", "--model", m.model, "--weights", m.weights, "--out", (m.dir.path / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("no layers") != std::string::npos);

    CHECK(run({"compile", "--model", (m.dir.path / "nope.json").string(), "--weights", m.weights, "--out", "x"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("simulate") {
    IdentityModel m;
    const Result r = run({"simulate", "--model", m.model, "--weights", m.weights, "--input", m.image("a.f32", {0.5, -1}),
                          "--input", m.image("b.f32", {1, 2, 3}), "--input", m.image("c.f32", {-2, 0.25})});
    CHECK(r.code == 0);
    CHECK(count_lines(r.out, "image ") == 3);
    std::istringstream in(r.out);
    std::string l0, l1, l2;
    std::getline(in, l0);
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l0.rfind("image 0 ", 0) == 0);
    CHECK(l0.find("status ok label 0 scores 0.5 -1") != std::string::npos);
    CHECK(l1.find("status failed") != std::string::npos);
    CHECK(l2.find("status ok label 1 scores -2 0.25") != std::string::npos);
}

TEST_CASE("compare") {
    TempDir dir;
    const std::string w = (dir.path / "w").string();
    REQUIRE(run({"synth-weights", "--model", example_model.string(), "--out", w, "--seed", "3"}).code == 0);
    const std::string manifest = (fs::path(w) / "manifest.txt").string();

    Result r = run({"compare", "--model", example_model.string(), "--weights", manifest, "--random-images", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("result pass") != std::string::npos);
    CHECK(count_lines(r.out, "image ") == 3);

    r = run({"compare", "--model", example_model.string(), "--weights", manifest, "--random-images", "3", "--tolerance",
             "0"});
    CHECK(r.code == 1);
    CHECK(r.out.find("result fail") != std::string::npos);

    r = run({"compare", "--model", example_model.string(), "--weights", manifest});
    CHECK(r.code == 0);
    CHECK(r.out.find("summary images 0") != std::string::npos);
    CHECK(r.out.find("result pass") != std::string::npos);
}

TEST_CASE("report") {
    TempDir dir;
    const std::string w = (dir.path / "w").string();
    REQUIRE(run({"synth-weights", "--model", example_model.string(), "--out", w}).code == 0);
    const std::string out = (dir.path / "rep").string();
    const Result r = run({"report", "--model", example_model.string(), "--weights", (fs::path(w) / "manifest.txt").string(),
                          "--out", out, "--bins", "7", "--stage-count", "12400"});
    CHECK(r.code == 0);
    CHECK(r.out.find("conv_fc_opamp_ratio 0.5\n") != std::string::npos);
    CHECK(r.out.find("latency_s 1.24e-06\n") != std::string::npos);
    for (const char* key : {"reference_power_per_device_w 1.1e-06", "reference_cmos_power_w 6e-05",
                            "reference_latency_s 1.24e-06", "reference_gpu_latency_s 0.0001654"}) {
        CHECK_MESSAGE(r.out.find(key) != std::string::npos, key);
    }
    CHECK(count_lines(slurp(fs::path(out) / "histogram.csv"), "") == 8);
    CHECK(fs::exists(fs::path(out) / "report.json"));
    CHECK(slurp(fs::path(out) / "report.txt") == r.out);
}

TEST_CASE("runs are reproducible and stay under --out") {
    TempDir dir;
    const std::string w = (dir.path / "w").string();
    REQUIRE(run({"synth-weights", "--model", example_model.string(), "--out", w, "--seed", "9"}).code == 0);
    const std::string manifest = (fs::path(w) / "manifest.txt").string();
    REQUIRE(run({"synth-images", "--model", example_model.string(), "--out", (dir.path / "img").string(), "--count",
                 "2"})
                .code == 0);
    const std::string img = (dir.path / "img" / "image_0001.f32").string();
    const auto before = listing(dir.path);

    std::vector<std::string> outs;
    for (int i = 0; i < 2; ++i) {
        const std::string out = (dir.path / ("run" + std::to_string(i))).string();
        CHECK(run({"compile", "--model", example_model.string(), "--weights", manifest, "--out", out}).code == 0);
        CHECK(run({"report", "--model", example_model.string(), "--weights", manifest, "--out", out}).code == 0);
        CHECK(run({"simulate", "--model", example_model.string(), "--weights", manifest, "--input", img,
                   "--random-images", "2", "--seed", "4", "--out", out})
                  .code == 0);
        outs.push_back(out);
    }
    const auto a = listing(outs[0]), b = listing(outs[1]);
    CHECK(a == b);
    CHECK(a.size() > 3);
    for (const auto& f : a) {
        if (fs::is_regular_file(fs::path(outs[0]) / f)) CHECK(slurp(fs::path(outs[0]) / f) == slurp(fs::path(outs[1]) / f));
    }
    auto after = listing(dir.path);
    for (const auto& f : after) {
        const bool under_out = f.rfind("run0", 0) == 0 || f.rfind("run1", 0) == 0;
        if (!under_out) CHECK_MESSAGE(before.count(f) == 1, f);
    }
}
