#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "xbar/crossbar.hpp"
#include "xbar/error.hpp"
#include "xbar/network.hpp"
#include "xbar/tensor.hpp"

namespace xbar {

// ---------------------------------------------------------------------------
// Weight manifest
//
//   VERSION 1
//   tensor name=<name> shape=<d0>,<d1>,... dtype=f32 file=<path> offset=<bytes>
//
// `file` is relative to the manifest's directory. Blobs hold little-endian
// IEEE-754 binary32 values, row-major. Blank lines and '#' comments are
// ignored.
// ---------------------------------------------------------------------------

class ManifestError : public Error {
public:
    enum class Kind { syntax, missing_file, overrun, bad_dtype, duplicate_name };

    ManifestError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Reads exactly the declared byte range of each tensor and widens to f64.
WeightStore import_weights(const std::filesystem::path& manifest_path);

/// Writes every tensor of `store` as f32 into `<dir>/<blob_name>` and a
/// matching manifest at `manifest_path`.
void export_weights(const WeightStore& store, const std::filesystem::path& manifest_path,
                    const std::string& blob_name = "weights.bin");

// ---------------------------------------------------------------------------
// Crossbar netlist
//
//   XBAR <label> ROWS <r> COLS <c> RF <ohms>
//   CELL <row> <col> <ohms>        (sorted by row, then col)
//   END
//
// Numbers use the shortest decimal that round-trips; lines end with LF.
// Multi-program files start with `VERSION 1` followed by several blocks.
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal for a double.
std::string format_number(double v);

std::string export_netlist(const CrossbarProgram& prog);

/// One XBAR block, optionally preceded by `VERSION 1`. Throws ParseError with
/// the offending line number and token.
CrossbarProgram parse_netlist(std::string_view doc);

/// `VERSION 1` header followed by zero or more blocks.
std::string export_netlist_bundle(const std::vector<const CrossbarProgram*>& progs);
std::vector<CrossbarProgram> parse_netlist_bundle(std::string_view doc);

// ---------------------------------------------------------------------------
// Model config (JSON). Mirrors NetworkSpec field for field; see README.
// ---------------------------------------------------------------------------

NetworkSpec parse_model_config(std::string_view json_text);
NetworkSpec load_model_config(const std::filesystem::path& path);
std::string dump_model_config(const NetworkSpec& spec);

// ---------------------------------------------------------------------------
// Raw images: `shape_volume(shape)` little-endian f32 values, row-major.
// ---------------------------------------------------------------------------

/// Throws InputError when the file size does not match the shape.
Tensor read_image(const std::filesystem::path& path, const Shape& shape);
void write_image(const std::filesystem::path& path, const Tensor& image);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace xbar
