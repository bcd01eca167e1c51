#include "xbar/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "xbar/error.hpp"

namespace xbar {

void DeviceParams::validate() const {
    if (!(r_min > 0.0) || !(r_max >= r_min) || !std::isfinite(r_max)) {
        throw ParameterError("device window requires 0 < r_min <= r_max < inf");
    }
    if (!(g_unit > 0.0) || !std::isfinite(g_unit)) throw ParameterError("g_unit must be positive");
    if (!(v_scale > 0.0) || !std::isfinite(v_scale)) throw ParameterError("v_scale must be positive");
}

namespace {

void sort_cells(std::vector<Cell>& cells) {
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
}

}  // namespace

CrossbarProgram::CrossbarProgram(std::string label, std::size_t rows, std::size_t cols, double rf,
                                 std::vector<Cell> cells)
    : CrossbarProgram(unchecked(std::move(label), rows, cols, rf, std::move(cells))) {
    auto problems = validate_program(*this);
    if (!problems.empty()) {
        throw InvariantError("crossbar '" + label_ + "': " + problems.front());
    }
}

CrossbarProgram CrossbarProgram::unchecked(std::string label, std::size_t rows, std::size_t cols, double rf,
                                           std::vector<Cell> cells) {
    CrossbarProgram p;
    p.label_ = std::move(label);
    p.rows_ = rows;
    p.cols_ = cols;
    p.rf_ = rf;
    p.cells_ = std::move(cells);
    sort_cells(p.cells_);
    return p;
}

std::vector<double> evaluate_crossbar(const CrossbarProgram& prog, std::span<const double> voltages) {
    std::vector<double> out(prog.cols());
    evaluate_crossbar(prog, voltages, out);
    return out;
}

void evaluate_crossbar(const CrossbarProgram& prog, std::span<const double> voltages, std::span<double> out) {
    if (voltages.size() != prog.rows()) {
        throw InputError("crossbar '" + prog.label() + "' expects " + std::to_string(prog.rows()) +
                         " input voltages, got " + std::to_string(voltages.size()));
    }
    if (out.size() != prog.cols()) throw InputError("crossbar '" + prog.label() + "' output span has wrong length");
    // Column currents by Kirchhoff summation of Ohm's-law branch currents.
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& c : prog.cells()) out[c.col] += voltages[c.row] / c.resistance;
    for (auto& i : out) i = -prog.rf() * i;
}

double weight_to_resistance(double w, const DeviceParams& dp) {
    if (w == 0.0) throw ProgrammabilityError("zero weight has no memristor; omit the cell");
    if (!std::isfinite(w)) throw ProgrammabilityError("non-finite weight cannot be programmed");
    const double r = 1.0 / (std::abs(w) * dp.g_unit);
    if (r < dp.r_min || r > dp.r_max) {
        std::ostringstream os;
        os.precision(17);
        os << "weight " << w << " needs " << r << " ohm, outside [" << dp.r_min << ", " << dp.r_max << "]";
        throw ProgrammabilityError(os.str());
    }
    return r;
}

double resistance_to_weight(double resistance, const DeviceParams& dp) {
    if (!(resistance > 0.0)) throw ParameterError("resistance must be positive");
    return 1.0 / (resistance * dp.g_unit);
}

std::vector<std::string> validate_program(const CrossbarProgram& prog) {
    std::vector<std::string> out;
    if (!(prog.rf() > 0.0) || !std::isfinite(prog.rf())) out.push_back("feedback resistance must be positive");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& c : prog.cells()) {
        const std::string at = "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
        if (c.row >= prog.rows() || c.col >= prog.cols()) out.push_back("cell " + at + " outside crossbar");
        if (!(c.resistance > 0.0) || !std::isfinite(c.resistance)) {
            out.push_back("cell " + at + " resistance must be positive and finite");
        }
        if (!seen.emplace(c.row, c.col).second) out.push_back("duplicate cell " + at);
    }
    return out;
}

}  // namespace xbar
