#pragma once

#include "macrowig/core.hpp"
#include "macrowig/quadrature.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Cartesian parameter sweeps over the model, with deterministic row order and
// CSV/JSON/SVG emission.  Figure presets reproduce the datasets behind the
// standard four panels (particle-number, kick-strength, temperature and
// dephasing sweeps).
namespace macrowig {

inline constexpr const char* artifact_version = "1.0.0";

// Sweepable parameters: n_particles, gamma, nbar, temperature_ratio
// (hbar*omega / kB*T, converted to nbar via thermal_occupation), d_factor.
// Exactly one of nbar / temperature_ratio must appear across axes + fixed.
struct AxisSpec {
    std::string name;
    std::vector<double> values;
};

enum class Method { closed_form, quadrature, both };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct SweepSpec {
    std::vector<AxisSpec> axes;          // first axis slowest, last fastest
    std::map<std::string, double> fixed; // remaining parameters
    Method method = Method::closed_form;
    QuadratureSpec quadrature;           // used when method != closed_form
};

struct SweepRow {
    int row_index = 0;
    int n_particles = 0;
    double gamma = 0.0;
    double nbar = 0.0;
    double d_factor = 0.0;
    double i_raw = 0.0;
    double i_value = 0.0;
    double n_ph = 0.0;
    double z_norm = 0.0;
    std::string method;
};

enum class OutputFormat { csv, json, svg_plot };

OutputFormat format_from_name(const std::string& name);

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluates the cartesian product in lexicographic axes order (last axis
// fastest).  method both emits two rows per point, closed form first.
// Per-point failures abort the sweep with the offending point named.
// threads sizes the point-level worker pool; row order never depends on it.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 1);

// Preset sweeps: fig2 (N 1..8 at gamma=10, nbar in {0,10}), fig3 (N 1..8 at
// nbar=0, gamma in {1,10}), fig4 (nbar sweep at N=5, gamma in {1,10}),
// fig5 (d 0..1.5 step 0.05 at N=5, nbar=0, gamma in {1,2,10}).
SweepSpec figure_spec(const std::string& fig_id);
std::vector<SweepRow> figure_dataset(const std::string& fig_id);

// Serialization.  CSV column order is fixed and uses 17 significant digits so
// values round-trip bit-exactly; JSON wraps rows in {meta, rows}; SVG renders
// i_value (solid) and n_ph (dashed) versus the first axis, one series per
// second-axis value.
std::string format_csv(const std::vector<SweepRow>& rows);
std::string format_json(const std::vector<SweepRow>& rows, const std::string& note = "");
std::string format_svg(const std::vector<SweepRow>& rows);

std::vector<SweepRow> rows_from_csv(const std::string& text);
std::vector<SweepRow> rows_from_json(const std::string& text);

// Config-file form of SweepSpec: {"axes": [{"name":..., "values":[...]}],
// "fixed": {...}, "method": "...", "quadrature": {...}} (quadrature optional).
SweepSpec sweep_spec_from_json(const std::string& text);

void emit(const std::vector<SweepRow>& rows, OutputFormat format,
          const std::string& path, const std::string& note = "");

// Entry point behind the macrowig binary; exposed for in-process testing.
// Exit codes: 0 success, 1 domain/usage error, 2 I/O error.
int cli_main(int argc, const char* const* argv);

} // namespace macrowig
