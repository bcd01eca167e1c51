#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace xbar {

/// Device window and signal scaling shared by every mapper.
struct DeviceParams {
    double r_min = 1e-9;      // ohms
    double r_max = 1e15;      // ohms
    double g_unit = 1.0;      // siemens per unit weight
    double v_scale = 2.5e-3;  // volts per unit activation

    /// TIA feedback resistance that makes R_f / R equal the logical weight.
    double feedback_resistance() const noexcept { return 1.0 / g_unit; }

    /// Throws ParameterError when the window or scales are not positive.
    void validate() const;

    bool operator==(const DeviceParams&) const = default;
};

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    double resistance = 0.0;  // ohms

    bool operator==(const Cell&) const = default;
};

/// A programmed crossbar: sparse memristor cells plus one inverting TIA per
/// column, all sharing the same feedback resistance. Absent cells carry no
/// current. Immutable once built.
class CrossbarProgram {
public:
    CrossbarProgram() = default;
    /// Throws InvariantError if the program violates any structural rule;
    /// use validate_program for diagnostics on untrusted input.
    CrossbarProgram(std::string label, std::size_t rows, std::size_t cols, double rf, std::vector<Cell> cells);

    /// Builds without checking. Only for parsers and tests that need to hold
    /// deliberately broken programs.
    static CrossbarProgram unchecked(std::string label, std::size_t rows, std::size_t cols, double rf,
                                     std::vector<Cell> cells);

    const std::string& label() const noexcept { return label_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double rf() const noexcept { return rf_; }
    /// Sorted by (row, col).
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    std::size_t memristor_count() const noexcept { return cells_.size(); }

    bool operator==(const CrossbarProgram&) const = default;

private:
    std::string label_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    double rf_ = 1.0;
    std::vector<Cell> cells_;
};

/// V_j = -R_f * sum_i V_i / R_ij over the cells present in column j.
/// Throws InputError when the voltage count differs from the row count.
std::vector<double> evaluate_crossbar(const CrossbarProgram& prog, std::span<const double> voltages);

/// Same, writing into `out` (cols() long) without allocating.
void evaluate_crossbar(const CrossbarProgram& prog, std::span<const double> voltages, std::span<double> out);

/// R = 1 / (|w| g_unit). w == 0 is rejected: zero weights get no device.
/// Throws ProgrammabilityError naming the weight when R leaves [r_min, r_max].
double weight_to_resistance(double w, const DeviceParams& dp);

/// |w| = 1 / (R g_unit). Throws ParameterError for R <= 0.
double resistance_to_weight(double resistance, const DeviceParams& dp);

/// Empty when the program is well formed; otherwise one message per problem.
std::vector<std::string> validate_program(const CrossbarProgram& prog);

}  // namespace xbar
