#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "xbar/error.hpp"
#include "xbar/netlist_io.hpp"
#include "xbar/synth.hpp"

using namespace xbar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("xbar_io_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
}

void write_f32(const fs::path& p, const std::vector<float>& vals) {
    std::ofstream out(p, std::ios::binary);
    for (float v : vals) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
}

CrossbarProgram random_program(std::mt19937_64& rng, int id) {
    const std::size_t rows = test::pick(rng, 0, 12), cols = test::pick(rng, 0, 6);
    std::uniform_real_distribution<double> logr(-6.0, 9.0);
    std::bernoulli_distribution present(0.4);
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (present(rng)) cells.push_back({r, c, std::pow(10.0, logr(rng))});
        }
    }
    return CrossbarProgram("p" + std::to_string(id), rows, cols, std::pow(10.0, logr(rng)), std::move(cells));
}

int parse_error_line(std::string_view doc) {
    try {
        parse_netlist(doc);
    } catch (const ParseError& e) {
        return static_cast<int>(e.line());
    }
    return -1;
}

std::string parse_error_text(std::string_view doc) {
    try {
        parse_netlist(doc);
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("export: single cell program") {
    const CrossbarProgram p("l", 4, 1, 1000, {{0, 0, 1000}});
    const std::string doc = export_netlist(p);
    CHECK(doc == "XBAR l ROWS 4 COLS 1 RF 1000\nCELL 0 0 1000\nEND\n");
    CHECK(parse_netlist(doc) == p);
}

TEST_CASE("export: empty program") {
    const CrossbarProgram p("e", 3, 2, 1, {});
    CHECK(export_netlist(p) == "XBAR e ROWS 3 COLS 2 RF 1\nEND\n");
    CHECK(parse_netlist(export_netlist(p)) == p);
}

TEST_CASE("export: cells are sorted and numbers round-trip") {
    const CrossbarProgram p("s", 3, 3, 0.1, {{2, 1, 1.0 / 3.0}, {0, 2, 5}, {0, 1, 1e-7}});
    const std::string doc = export_netlist(p);
    CHECK(doc == "XBAR s ROWS 3 COLS 3 RF 0.1\nCELL 0 1 1e-07\nCELL 0 2 5\nCELL 2 1 0.3333333333333333\nEND\n");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
}

TEST_CASE("round trip on random programs") {
    std::mt19937_64 rng(97);
    for (int i = 0; i < 1000; ++i) {
        const CrossbarProgram p = random_program(rng, i);
        const std::string doc = export_netlist(p);
        const CrossbarProgram q = parse_netlist(doc);
        CHECK(q == p);
        CHECK(export_netlist(q) == doc);
    }
}

TEST_CASE("parse accepts an optional version line") {
    const CrossbarProgram p = parse_netlist("VERSION 1\nXBAR l ROWS 4 COLS 1 RF 1000\nCELL 0 0 1000\nEND\n");
    CHECK(p.memristor_count() == 1);
}

TEST_CASE("parse errors carry the line") {
    CHECK(parse_error_line("XBAR l ROWS 4 COLS 1 RF 1000\nCELL 0 0 -5\nEND\n") == 2);
    CHECK(parse_error_text("XBAR l ROWS 4 COLS 1 RF 1000\nCELL 0 0 -5\nEND\n").find("-5") != std::string::npos);
    CHECK(parse_error_text("XBAR l ROWS 4 COLS 1 RF 1000\nCELL 0 0 1000\n").find("missing END") != std::string::npos);
    CHECK(parse_error_line("XBAR l ROWS 4 COLS 1 RF 1000\nCELL 0 0 1\nCELL 0 0 2\nEND\n") == 3);
    CHECK(parse_error_line("XBAR l ROWS 4 COLS 1 RF 1000\nCELL 4 0 1\nEND\n") == 2);
    CHECK(parse_error_line("XBAR l ROWS 4 COLS 1 RF 0\nEND\n") == 1);
    CHECK(parse_error_line("XBAR l ROWS x COLS 1 RF 1\nEND\n") == 1);
    CHECK(parse_error_line("XBAR l ROWS 4 COLS 1 RF 1\nWIRE 0 0 1\nEND\n") == 2);
    CHECK(parse_error_line("XBAR l ROWS 4 COLS 1 RF 1\nEND\nCELL 0 0 1\n") == 3);
    CHECK(parse_error_line("") == 1);
}

TEST_CASE("bundles") {
    std::mt19937_64 rng(101);
    std::vector<CrossbarProgram> progs;
    for (int i = 0; i < 5; ++i) progs.push_back(random_program(rng, i));
    std::vector<const CrossbarProgram*> ptrs;
    for (const auto& p : progs) ptrs.push_back(&p);
    const std::string doc = export_netlist_bundle(ptrs);
    CHECK(doc.rfind("VERSION 1\n", 0) == 0);
    CHECK(parse_netlist_bundle(doc) == progs);
    CHECK(parse_netlist_bundle("VERSION 1\n").empty());
    CHECK_THROWS_AS(parse_netlist_bundle("XBAR l ROWS 1 COLS 1 RF 1\nEND\n"), ParseError);
}

TEST_CASE("serialization is deterministic") {
    std::mt19937_64 a(103), b(103);
    for (int i = 0; i < 50; ++i) CHECK(export_netlist(random_program(a, i)) == export_netlist(random_program(b, i)));
}

TEST_CASE("manifest: decode a 2x2 tensor") {
    TempDir dir;
    write_f32(dir.path / "w.bin", {1, 2, 3, 4});
    write_text(dir.path / "m.txt", "VERSION 1\ntensor name=t shape=2,2 dtype=f32 file=w.bin offset=0\n");
    const WeightStore s = import_weights(dir.path / "m.txt");
    CHECK(s.size() == 1);
    CHECK(s.get("t") == Tensor({2, 2}, {1, 2, 3, 4}));
    CHECK(s.source == (dir.path / "m.txt").string());
}

TEST_CASE("manifest: empty manifest gives an empty store") {
    TempDir dir;
    write_text(dir.path / "m.txt", "VERSION 1\n");
    CHECK(import_weights(dir.path / "m.txt").empty());
    write_text(dir.path / "blank.txt", "");
    CHECK(import_weights(dir.path / "blank.txt").empty());
}

TEST_CASE("manifest: reads only the declared range") {
    TempDir dir;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    write_f32(dir.path / "w.bin", {nan, nan, 0.5f, -1.25f, 3.0f, nan, nan});
    write_text(dir.path / "m.txt", "VERSION 1\ntensor name=t shape=3 dtype=f32 file=w.bin offset=8\n");
    CHECK(import_weights(dir.path / "m.txt").get("t") == Tensor::vector({0.5, -1.25, 3.0}));
}

TEST_CASE("manifest: diagnostics") {
    TempDir dir;
    write_f32(dir.path / "w.bin", {1, 2, 3, 4});
    auto kind_of = [&](const std::string& body) {
        write_text(dir.path / "m.txt", "VERSION 1\n" + body);
        try {
            import_weights(dir.path / "m.txt");
        } catch (const ManifestError& e) {
            return std::pair{e.kind(), std::string(e.what())};
        }
        FAIL("expected ManifestError");
        return std::pair{ManifestError::Kind::syntax, std::string()};
    };
    using K = ManifestError::Kind;
    auto [k1, m1] = kind_of("tensor name=late shape=2 dtype=f32 file=w.bin offset=12\n");
    CHECK(k1 == K::overrun);
    CHECK(m1.find("late") != std::string::npos);
    CHECK(kind_of("tensor name=t shape=4 dtype=f32 file=w.bin offset=100\n").first == K::overrun);
    CHECK(kind_of("tensor name=t shape=2 dtype=f16 file=w.bin offset=0\n").first == K::bad_dtype);
    CHECK(kind_of("tensor name=t shape=1 dtype=f32 file=w.bin offset=0\n"
                  "tensor name=t shape=1 dtype=f32 file=w.bin offset=4\n")
              .first == K::duplicate_name);
    CHECK(kind_of("tensor name=t shape=1 dtype=f32 file=nope.bin offset=0\n").first == K::missing_file);
    CHECK(kind_of("tensor name=t shape=1 dtype=f32 file=w.bin\n").first == K::syntax);
    CHECK_THROWS_AS(import_weights(dir.path / "absent.txt"), ManifestError);
}

TEST_CASE("manifest: export and import round trip") {
    TempDir dir;
    std::mt19937_64 rng(107);
    const NetworkSpec spec = test::random_spec(rng);
    const WeightStore w = synth::random_weights(spec, rng);
    export_weights(w, dir.path / "manifest.txt");
    const WeightStore r = import_weights(dir.path / "manifest.txt");
    CHECK(r.size() == w.size());
    for (const auto& [name, t] : w.entries()) {
        const Tensor& u = r.get(name);
        CHECK(u.shape() == t.shape());
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(u[i] == static_cast<double>(static_cast<float>(t[i])));
    }
}

TEST_CASE("model config") {
    const std::string doc = R"({
      "name": "tiny",
      "input_shape": [1, 4, 4],
      "class_count": 2,
      "layers": [
        {"kind": "conv", "name": "c", "out_channels": 2, "kernel": 3, "padding": 1},
        {"kind": "batchnorm", "name": "bn"},
        {"kind": "hard_swish"},
        {"kind": "depthwise_conv", "name": "dw", "kernel": [3, 3], "padding": 1, "stride": 2},
        {"kind": "residual_add", "from": 3},
        {"kind": "gap"},
        {"kind": "fc", "name": "fc", "out_features": 2}
      ]
    })";
    CHECK_THROWS_AS(parse_model_config(doc), GeometryError);  // residual across a stride

    const std::string ok = R"({
      "name": "tiny",
      "input_shape": [1, 4, 4],
      "class_count": 2,
      "layers": [
        {"kind": "conv", "name": "c", "out_channels": 2, "kernel": 3, "padding": 1},
        {"kind": "batchnorm", "name": "bn"},
        {"kind": "hard_swish"},
        {"kind": "depthwise_conv", "name": "dw", "kernel": [3, 3], "padding": 1},
        {"kind": "residual_add", "from": 3},
        {"kind": "gap"},
        {"kind": "fc", "name": "fc", "out_features": 2}
      ]
    })";
    const NetworkSpec s = parse_model_config(ok);
    CHECK(s.layers.size() == 7);
    CHECK(s.layers[0].kernel_rows == 3);
    CHECK(s.layers[0].bias == false);
    CHECK(s.layers[6].bias == true);
    CHECK(s.layers[4].from == 3);
    CHECK(parse_model_config(dump_model_config(s)) == s);

    std::mt19937_64 rng(109);
    for (int i = 0; i < 20; ++i) {
        const NetworkSpec r = test::random_spec(rng);
        CHECK(parse_model_config(dump_model_config(r)) == r);
    }

    CHECK_THROWS_WITH_AS(parse_model_config(R"({"input_shape": [1, 2, 2], "class_count": 1, "layers": []})"),
                         doctest::Contains("no layers"), ParameterError);
    CHECK_THROWS_AS(parse_model_config("{"), ParameterError);
    CHECK_THROWS_AS(parse_model_config(R"({"input_shape": [1, 2, 2], "class_count": 4,
        "layers": [{"kind": "relu", "colour": 1}]})"),
                    ParameterError);
    CHECK_THROWS_AS(parse_model_config(R"({"input_shape": [1, 2, 2], "class_count": 4,
        "layers": [{"kind": "conv", "out_channels": 1, "kernel": 1}]})"),
                    ParameterError);
    CHECK_THROWS_AS(parse_model_config(R"({"input_shape": [1, 2, 2], "class_count": 4,
        "layers": [{"kind": "softmax"}]})"),
                    Error);
}

TEST_CASE("images") {
    TempDir dir;
    const Tensor img({1, 2, 2}, {0.5, -1, 2, 0});
    write_image(dir.path / "i.f32", img);
    CHECK(fs::file_size(dir.path / "i.f32") == 16);
    CHECK(read_image(dir.path / "i.f32", {1, 2, 2}) == img);
    CHECK_THROWS_AS(read_image(dir.path / "i.f32", {1, 3, 3}), InputError);
    CHECK_THROWS_AS(read_image(dir.path / "none.f32", {1, 2, 2}), InputError);
}
