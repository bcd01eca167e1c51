#include "xbar/netlist_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace xbar {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view doc) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < doc.size()) {
        std::size_t nl = doc.find('\n', start);
        if (nl == std::string_view::npos) nl = doc.size();
        out.push_back(doc.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
    const char* first = tok.data();
    const char* last = first + tok.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

float f32_from_le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | p[i];
    return std::bit_cast<float>(bits);
}

void f32_to_le(float v, unsigned char* p) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        p[i] = static_cast<unsigned char>(bits & 0xffu);
        bits >>= 8;
    }
}

std::vector<double> read_f32_range(const fs::path& file, std::uintmax_t offset, std::size_t count) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot open " + file.string());
    std::vector<unsigned char> bytes(count * 4);
    in.seekg(static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw InputError("short read from " + file.string());
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(f32_from_le(&bytes[4 * i]));
    return out;
}

}  // namespace

// --- weights ---------------------------------------------------------------

WeightStore import_weights(const fs::path& manifest_path) {
    using K = ManifestError::Kind;
    std::ifstream in(manifest_path);
    if (!in) throw ManifestError(K::missing_file, "cannot open manifest " + manifest_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string doc = ss.str();

    WeightStore store;
    store.source = manifest_path.string();
    const fs::path base = manifest_path.parent_path();
    bool seen_version = false;
    std::size_t lineno = 0;
    for (std::string_view line : split_lines(doc)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0].front() == '#') continue;
        auto syntax = [&](const std::string& what) {
            return ManifestError(K::syntax, manifest_path.string() + ":" + std::to_string(lineno) + ": " + what);
        };
        if (!seen_version) {
            if (toks.size() != 2 || toks[0] != "VERSION" || toks[1] != "1") throw syntax("expected 'VERSION 1'");
            seen_version = true;
            continue;
        }
        if (toks[0] != "tensor") throw syntax("unknown statement '" + std::string(toks[0]) + "'");
        std::map<std::string, std::string, std::less<>> kv;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            const auto eq = toks[i].find('=');
            if (eq == std::string_view::npos) throw syntax("expected key=value, got '" + std::string(toks[i]) + "'");
            kv.emplace(std::string(toks[i].substr(0, eq)), std::string(toks[i].substr(eq + 1)));
        }
        for (const char* key : {"name", "shape", "dtype", "file", "offset"}) {
            if (!kv.count(key)) throw syntax(std::string("missing '") + key + "'");
        }
        const std::string& name = kv["name"];
        if (kv["dtype"] != "f32") {
            throw ManifestError(K::bad_dtype, "tensor '" + name + "' has dtype '" + kv["dtype"] + "', only f32 is supported");
        }
        Shape shape;
        {
            std::string_view s = kv["shape"];
            while (!s.empty()) {
                const auto comma = s.find(',');
                std::size_t d = 0;
                if (!parse_number(s.substr(0, comma), d)) throw syntax("bad shape '" + kv["shape"] + "'");
                shape.push_back(d);
                s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
            }
            if (shape.empty()) throw syntax("empty shape for '" + name + "'");
        }
        std::uintmax_t offset = 0;
        if (!parse_number(std::string_view(kv["offset"]), offset)) throw syntax("bad offset '" + kv["offset"] + "'");
        if (store.contains(name)) throw ManifestError(K::duplicate_name, "tensor '" + name + "' declared twice");

        const fs::path blob = base / kv["file"];
        std::error_code ec;
        const auto size = fs::file_size(blob, ec);
        if (ec) throw ManifestError(K::missing_file, "tensor '" + name + "': blob " + blob.string() + " not found");
        const std::size_t count = shape_volume(shape);
        if (offset > size || size - offset < count * 4ull) {
            throw ManifestError(K::overrun, "tensor '" + name + "': " + std::to_string(count * 4) + " bytes at offset " +
                                                std::to_string(offset) + " overrun " + blob.string() + " (" +
                                                std::to_string(size) + " bytes)");
        }
        store.insert(name, Tensor(shape, read_f32_range(blob, offset, count)));
    }
    if (!seen_version && !doc.empty() && !split_ws(doc).empty()) {
        throw ManifestError(K::syntax, manifest_path.string() + ": expected 'VERSION 1'");
    }
    return store;
}

void export_weights(const WeightStore& store, const fs::path& manifest_path, const std::string& blob_name) {
    const fs::path blob = manifest_path.parent_path() / blob_name;
    std::ofstream bin(blob, std::ios::binary);
    if (!bin) throw InputError("cannot write " + blob.string());
    std::ostringstream man;
    man << "VERSION 1\n";
    std::size_t offset = 0;
    for (const auto& [name, t] : store.entries()) {
        std::vector<unsigned char> bytes(t.size() * 4);
        for (std::size_t i = 0; i < t.size(); ++i) f32_to_le(static_cast<float>(t[i]), &bytes[4 * i]);
        bin.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        man << "tensor name=" << name << " shape=";
        for (std::size_t d = 0; d < t.rank(); ++d) man << (d ? "," : "") << t.dim(d);
        man << " dtype=f32 file=" << blob_name << " offset=" << offset << '\n';
        offset += bytes.size();
    }
    std::ofstream out(manifest_path);
    if (!out) throw InputError("cannot write " + manifest_path.string());
    out << man.str();
}

// --- netlist ---------------------------------------------------------------

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

namespace {

void append_block(std::string& out, const CrossbarProgram& p) {
    std::string label = p.label().empty() ? std::string("xbar") : p.label();
    std::replace_if(label.begin(), label.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }, '_');
    out += "XBAR " + label + " ROWS " + std::to_string(p.rows()) + " COLS " + std::to_string(p.cols()) + " RF " +
           format_number(p.rf()) + "\n";
    for (const auto& c : p.cells()) {
        out += "CELL " + std::to_string(c.row) + " " + std::to_string(c.col) + " " + format_number(c.resistance) + "\n";
    }
    out += "END\n";
}

class NetlistParser {
public:
    explicit NetlistParser(std::string_view doc) : lines_(split_lines(doc)) {}

    // Skips blank lines; returns false at end of input.
    bool next(std::vector<std::string_view>& toks) {
        while (pos_ < lines_.size()) {
            toks = split_ws(lines_[pos_++]);
            if (!toks.empty()) return true;
        }
        return false;
    }
    std::size_t line() const { return pos_; }

    [[noreturn]] void fail(const std::string& what, std::string_view tok) const {
        throw ParseError(line(), what + (tok.empty() ? "" : " at token '" + std::string(tok) + "'"));
    }

    CrossbarProgram block(const std::vector<std::string_view>& head) {
        if (head.size() != 8 || head[0] != "XBAR" || head[2] != "ROWS" || head[4] != "COLS" || head[6] != "RF") {
            fail("expected 'XBAR <label> ROWS <r> COLS <c> RF <ohms>'", head[0]);
        }
        std::size_t rows = 0, cols = 0;
        double rf = 0.0;
        if (!parse_number(head[3], rows)) fail("bad row count", head[3]);
        if (!parse_number(head[5], cols)) fail("bad column count", head[5]);
        if (!parse_number(head[7], rf)) fail("bad feedback resistance", head[7]);
        if (!(rf > 0.0) || !std::isfinite(rf)) fail("feedback resistance must be positive", head[7]);

        std::vector<Cell> cells;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        std::vector<std::string_view> toks;
        while (next(toks)) {
            if (toks[0] == "END") {
                if (toks.size() != 1) fail("unexpected token after END", toks[1]);
                return CrossbarProgram::unchecked(std::string(head[1]), rows, cols, rf, std::move(cells));
            }
            if (toks[0] != "CELL") fail("expected CELL or END", toks[0]);
            if (toks.size() != 4) fail("CELL takes <row> <col> <ohms>", toks[0]);
            Cell c;
            if (!parse_number(toks[1], c.row)) fail("bad row", toks[1]);
            if (!parse_number(toks[2], c.col)) fail("bad column", toks[2]);
            if (!parse_number(toks[3], c.resistance)) fail("bad resistance", toks[3]);
            if (!(c.resistance > 0.0) || !std::isfinite(c.resistance)) fail("resistance must be positive", toks[3]);
            if (c.row >= rows) fail("row outside crossbar", toks[1]);
            if (c.col >= cols) fail("column outside crossbar", toks[2]);
            if (!seen.emplace(c.row, c.col).second) fail("duplicate cell", toks[1]);
            cells.push_back(c);
        }
        throw ParseError(line(), "truncated netlist: missing END");
    }

private:
    std::vector<std::string_view> lines_;
    std::size_t pos_ = 0;
};

bool is_version(const std::vector<std::string_view>& toks) { return !toks.empty() && toks[0] == "VERSION"; }

void check_version(const NetlistParser& p, const std::vector<std::string_view>& toks) {
    if (toks.size() != 2 || toks[1] != "1") p.fail("unsupported version", toks.size() > 1 ? toks[1] : toks[0]);
}

}  // namespace

std::string export_netlist(const CrossbarProgram& prog) {
    std::string out;
    append_block(out, prog);
    return out;
}

CrossbarProgram parse_netlist(std::string_view doc) {
    NetlistParser p(doc);
    std::vector<std::string_view> toks;
    if (!p.next(toks)) throw ParseError(1, "empty netlist");
    if (is_version(toks)) {
        check_version(p, toks);
        if (!p.next(toks)) throw ParseError(p.line(), "truncated netlist: missing XBAR");
    }
    CrossbarProgram prog = p.block(toks);
    if (p.next(toks)) p.fail("content after END", toks[0]);
    return prog;
}

std::string export_netlist_bundle(const std::vector<const CrossbarProgram*>& progs) {
    std::string out = "VERSION 1\n";
    for (const auto* prog : progs) append_block(out, *prog);
    return out;
}

std::vector<CrossbarProgram> parse_netlist_bundle(std::string_view doc) {
    NetlistParser p(doc);
    std::vector<std::string_view> toks;
    if (!p.next(toks) || !is_version(toks)) throw ParseError(p.line(), "netlist bundle must start with VERSION 1");
    check_version(p, toks);
    std::vector<CrossbarProgram> out;
    while (p.next(toks)) out.push_back(p.block(toks));
    return out;
}

// --- model config ----------------------------------------------------------

namespace {

using nlohmann::json;

std::size_t get_size(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned()) throw ParameterError(std::string("'") + key + "' must be a non-negative integer");
    return j[key].get<std::size_t>();
}

void read_kernel(const json& j, LayerSpec& l) {
    if (!j.contains("kernel")) return;
    const json& k = j["kernel"];
    if (k.is_number_unsigned()) {
        l.kernel_rows = l.kernel_cols = k.get<std::size_t>();
    } else if (k.is_array() && k.size() == 2 && k[0].is_number_unsigned() && k[1].is_number_unsigned()) {
        l.kernel_rows = k[0].get<std::size_t>();
        l.kernel_cols = k[1].get<std::size_t>();
    } else {
        throw ParameterError("'kernel' must be an integer or [rows, cols]");
    }
}

LayerSpec layer_from_json(const json& j, std::size_t index) {
    static const std::set<std::string> kAllowed{"kind", "name", "out_channels", "kernel", "stride", "padding",
                                                "bias", "out_features", "reduced_channels", "eps", "from"};
    if (!j.is_object()) throw ParameterError("layer " + std::to_string(index) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!kAllowed.count(key)) throw ParameterError("layer " + std::to_string(index) + ": unknown key '" + key + "'");
    }
    if (!j.contains("kind") || !j["kind"].is_string()) throw ParameterError("layer " + std::to_string(index) + " needs 'kind'");
    LayerSpec l;
    l.kind = layer_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("name")) l.name = j["name"].get<std::string>();
    if (l.name.find_first_of(" \t\r\n") != std::string::npos) {
        throw ParameterError("layer name '" + l.name + "' must not contain whitespace");
    }
    const bool parameterized = l.kind == LayerKind::conv || l.kind == LayerKind::depthwise_conv ||
                               l.kind == LayerKind::pointwise_conv || l.kind == LayerKind::batchnorm ||
                               l.kind == LayerKind::fc || l.kind == LayerKind::se_block;
    if (parameterized && l.name.empty()) {
        throw ParameterError("layer " + std::to_string(index) + " (" + std::string(to_string(l.kind)) + ") needs a 'name'");
    }
    l.out_channels = get_size(j, "out_channels", 0);
    read_kernel(j, l);
    l.stride = get_size(j, "stride", 1);
    l.padding = get_size(j, "padding", 0);
    l.bias = j.value("bias", l.kind == LayerKind::fc);
    if (l.bias && l.kind == LayerKind::depthwise_conv) throw ParameterError("depthwise_conv layers carry no bias");
    l.out_features = get_size(j, "out_features", 0);
    l.reduced_channels = get_size(j, "reduced_channels", 0);
    l.eps = j.value("eps", 1e-5);
    l.from = get_size(j, "from", 0);
    if (l.kind == LayerKind::residual_add && !j.contains("from")) {
        throw ParameterError("layer " + std::to_string(index) + " (residual_add) needs 'from'");
    }
    if (l.kernel_rows == 0 || l.kernel_cols == 0 || l.stride == 0) {
        throw GeometryError("layer " + std::to_string(index) + ": kernel and stride must be >= 1");
    }
    return l;
}

}  // namespace

NetworkSpec parse_model_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("model config is not valid JSON: ") + e.what());
    }
    try {
        if (!j.is_object()) throw ParameterError("model config must be a JSON object");
        if (j.value("version", 1) != 1) throw ParameterError("unsupported model config version");
        NetworkSpec spec;
        spec.name = j.value("name", std::string("model"));
        if (!j.contains("input_shape")) throw ParameterError("model config needs 'input_shape'");
        spec.input_shape = j["input_shape"].get<Shape>();
        spec.class_count = get_size(j, "class_count", 0);
        if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty()) {
            throw ParameterError("model config has no layers");
        }
        for (std::size_t i = 0; i < j["layers"].size(); ++i) spec.layers.push_back(layer_from_json(j["layers"][i], i));
        infer_shapes(spec);
        return spec;
    } catch (const json::exception& e) {
        throw ParameterError(std::string("model config: ") + e.what());
    }
}

NetworkSpec load_model_config(const fs::path& path) { return parse_model_config(read_text_file(path)); }

std::string dump_model_config(const NetworkSpec& spec) {
    json j;
    j["version"] = 1;
    j["name"] = spec.name;
    j["input_shape"] = spec.input_shape;
    j["class_count"] = spec.class_count;
    j["layers"] = json::array();
    for (const auto& l : spec.layers) {
        json o;
        o["kind"] = std::string(to_string(l.kind));
        if (!l.name.empty()) o["name"] = l.name;
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::pointwise_conv:
                o["out_channels"] = l.out_channels;
                o["bias"] = l.bias;
                [[fallthrough]];
            case LayerKind::depthwise_conv:
                o["kernel"] = {l.kernel_rows, l.kernel_cols};
                o["stride"] = l.stride;
                o["padding"] = l.padding;
                break;
            case LayerKind::batchnorm: o["eps"] = l.eps; break;
            case LayerKind::fc:
                o["out_features"] = l.out_features;
                o["bias"] = l.bias;
                break;
            case LayerKind::se_block: o["reduced_channels"] = l.reduced_channels; break;
            case LayerKind::residual_add: o["from"] = l.from; break;
            default: break;
        }
        j["layers"].push_back(std::move(o));
    }
    return j.dump(2) + "\n";
}

// --- images ----------------------------------------------------------------

Tensor read_image(const fs::path& path, const Shape& shape) {
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw InputError("cannot read image " + path.string());
    const std::size_t count = shape_volume(shape);
    if (size != count * 4) {
        throw InputError("image " + path.string() + " has " + std::to_string(size) + " bytes, expected " +
                         std::to_string(count * 4) + " for shape " + shape_to_string(shape));
    }
    return Tensor(shape, read_f32_range(path, 0, count));
}

void write_image(const fs::path& path, const Tensor& image) {
    std::vector<unsigned char> bytes(image.size() * 4);
    for (std::size_t i = 0; i < image.size(); ++i) f32_to_le(static_cast<float>(image[i]), &bytes[4 * i]);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace xbar
