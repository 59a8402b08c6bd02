#include "macrowig/sweep.hpp"

#include "macrowig/macroscopicity.hpp"
#include "macrowig/wigner.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace macrowig {

namespace {

struct GlobalOpts {
    std::string format = "csv";
    std::string out;
    int threads = 1;
    bool quiet = false;
};

void add_global(CLI::App* sub, GlobalOpts& g) {
    sub->add_option("--format", g.format, "Output format: csv, json or svg")
        ->capture_default_str();
    sub->add_option("--out", g.out, "Output file path (default: stdout)");
    sub->add_option("--threads", g.threads, "Worker pool size")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    sub->add_flag("--quiet", g.quiet, "Suppress progress diagnostics");
}

void add_quadrature(CLI::App* sub, QuadratureSpec& q) {
    sub->add_option("--points", q.points_per_axis, "Grid points per axis (odd)")
        ->capture_default_str();
    sub->add_option("--extent-sigma", q.extent_sigma, "Grid margin in Gaussian widths")
        ->capture_default_str();
    sub->add_option("--fd-step", q.fd_step, "Finite-difference step (0 = auto)")
        ->capture_default_str();
    sub->add_option("--fd-order", q.fd_order, "Finite-difference order (2 or 4)")
        ->capture_default_str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads >= 1) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

void output_rows(const std::vector<SweepRow>& rows, const GlobalOpts& g,
                 const std::string& note) {
    OutputFormat f = format_from_name(g.format);
    if (g.out.empty()) {
        if (f == OutputFormat::svg_plot)
            throw std::domain_error("svg output requires --out");
        std::cout << (f == OutputFormat::csv ? format_csv(rows)
                                             : format_json(rows, note));
        return;
    }
    emit(rows, f, g.out, note);
}

std::vector<double> parse_number_list(const std::string& name,
                                      const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string tok = text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (tok.empty())
            throw std::domain_error("empty value in list for " + name);
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw std::domain_error("cannot parse value '" + tok + "' for " + name);
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

SweepSpec spec_from_flags(const std::vector<std::string>& axis_tokens,
                          const std::vector<std::string>& fixed_tokens,
                          const std::string& method) {
    SweepSpec spec;
    for (const std::string& tok : axis_tokens) {
        std::size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::domain_error("--axis expects name=v1,v2,...: " + tok);
        AxisSpec ax;
        ax.name = tok.substr(0, eq);
        ax.values = parse_number_list(ax.name, tok.substr(eq + 1));
        spec.axes.push_back(std::move(ax));
    }
    for (const std::string& tok : fixed_tokens) {
        std::size_t eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::domain_error("--fixed expects name=value: " + tok);
        std::string name = tok.substr(0, eq);
        std::vector<double> v = parse_number_list(name, tok.substr(eq + 1));
        if (v.size() != 1)
            throw std::domain_error("--fixed expects a single value: " + tok);
        spec.fixed[name] = v[0];
    }
    spec.method = method_from_name(method);
    return spec;
}

// Compact axis description for output metadata: arithmetic grids are
// abbreviated lo:step:hi.
std::string describe_spec(const SweepSpec& spec) {
    std::ostringstream os;
    os << "axes:";
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
        const AxisSpec& ax = spec.axes[a];
        os << (a ? " x " : " ") << ax.name << " ";
        bool arithmetic = ax.values.size() > 4;
        double step = arithmetic ? ax.values[1] - ax.values[0] : 0.0;
        for (std::size_t i = 2; arithmetic && i < ax.values.size(); ++i)
            if (std::abs(ax.values[i] - ax.values[i - 1] - step) > 1e-12)
                arithmetic = false;
        if (arithmetic) {
            os << ax.values.front() << ":" << step << ":" << ax.values.back();
        } else {
            os << "{";
            for (std::size_t i = 0; i < ax.values.size(); ++i)
                os << (i ? "," : "") << ax.values[i];
            os << "}";
        }
    }
    os << "; fixed:";
    bool first = true;
    for (const auto& [name, value] : spec.fixed) {
        os << (first ? " " : ", ") << name << "=" << value;
        first = false;
    }
    os << "; method=" << method_name(spec.method);
    return os.str();
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Macroscopicity of a two-mirror mechanical superposition: "
                 "closed-form measure, quadrature oracle and figure sweeps"};
    app.name("macrowig");
    app.require_subcommand(1);

    GlobalOpts g;

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a single parameter point");
    int ev_n = 1;
    double ev_gamma = 0.0, ev_nbar = 0.0, ev_tr = 0.0, ev_d = 0.0;
    eval->add_option("--n-particles", ev_n, "Number of mirror units")->required();
    eval->add_option("--gamma", ev_gamma, "Kick strength")->required();
    auto* ev_nbar_opt = eval->add_option("--nbar", ev_nbar, "Thermal occupation");
    eval->add_option("--temperature-ratio", ev_tr,
                     "hbar*omega / kB*T (alternative to --nbar)")
        ->excludes(ev_nbar_opt);
    eval->add_option("--d", ev_d, "Dephasing factor");
    add_global(eval, g);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a cartesian parameter sweep");
    std::string sw_config;
    std::vector<std::string> sw_axes, sw_fixed;
    std::string sw_method = "closed_form";
    QuadratureSpec sw_quad;
    auto* sw_config_opt =
        sweep->add_option("--config", sw_config, "JSON sweep config file");
    sweep->add_option("--axis", sw_axes, "Sweep axis as name=v1,v2,... (ordered)")
        ->excludes(sw_config_opt);
    sweep->add_option("--fixed", sw_fixed, "Fixed parameter as name=value")
        ->excludes(sw_config_opt);
    sweep->add_option("--method", sw_method, "closed_form, quadrature or both")
        ->capture_default_str();
    add_quadrature(sweep, sw_quad);
    add_global(sweep, g);

    // figure
    auto* figure = app.add_subcommand("figure", "Emit a preset figure dataset");
    std::string fig_id;
    figure->add_option("id", fig_id, "fig2, fig3, fig4 or fig5")->required();
    add_global(figure, g);

    // oracle
    auto* oracle = app.add_subcommand(
        "oracle", "Cross-check the closed form against the quadrature oracle");
    std::vector<int> or_n = {1, 2};
    std::vector<double> or_gamma = {0.5, 1.0, 1.5};
    std::vector<double> or_nbar = {0.0, 0.5};
    std::vector<double> or_d = {0.0, 0.3};
    QuadratureSpec or_quad;
    oracle->add_option("--n-particles", or_n, "Grid values for n_particles")
        ->capture_default_str();
    oracle->add_option("--gamma", or_gamma, "Grid values for gamma")
        ->capture_default_str();
    oracle->add_option("--nbar", or_nbar, "Grid values for nbar")
        ->capture_default_str();
    oracle->add_option("--d", or_d, "Grid values for d_factor")
        ->capture_default_str();
    add_quadrature(oracle, or_quad);
    add_global(oracle, g);

    // calibrate
    auto* calibrate = app.add_subcommand(
        "calibrate", "Single-mode cat-state check of the measure convention");
    double cal_alpha = 2.0;
    QuadratureSpec cal_quad;
    calibrate->add_option("--alpha", cal_alpha, "Cat amplitude, 0.5..3")
        ->capture_default_str();
    add_quadrature(calibrate, cal_quad);
    add_global(calibrate, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        apply_threads(g.threads);

        if (app.got_subcommand(eval)) {
            double nbar = eval->count("--temperature-ratio")
                              ? thermal_occupation(ev_tr)
                              : ev_nbar;
            ModelParams p = make_params(ev_n, ev_gamma, nbar, ev_d);
            MacroResult m = macroscopicity(p);
            SweepRow r;
            r.n_particles = p.n_particles;
            r.gamma = p.gamma;
            r.nbar = p.nbar;
            r.d_factor = p.d_factor;
            r.i_raw = m.raw_value;
            r.i_value = m.value;
            r.n_ph = phonon_number(p);
            r.z_norm = normalization(p);
            r.method = "closed_form";
            if (!g.out.empty()) {
                output_rows({r}, g, "");
            } else {
                std::cout << "i_raw = " << fmt(r.i_raw) << "\n"
                          << "i_value = " << fmt(r.i_value) << "\n"
                          << "n_ph = " << fmt(r.n_ph) << "\n"
                          << "z_norm = " << fmt(r.z_norm) << "\n";
            }
            return 0;
        }

        if (app.got_subcommand(sweep)) {
            SweepSpec spec;
            if (!sw_config.empty()) {
                std::ifstream in(sw_config);
                if (!in) throw io_error("cannot read config file: " + sw_config);
                std::ostringstream buf;
                buf << in.rdbuf();
                spec = sweep_spec_from_json(buf.str());
            } else {
                spec = spec_from_flags(sw_axes, sw_fixed, sw_method);
                spec.quadrature = sw_quad;
            }
            std::vector<SweepRow> rows = run_sweep(spec, g.threads);
            output_rows(rows, g, describe_spec(spec));
            return 0;
        }

        if (app.got_subcommand(figure)) {
            SweepSpec spec = figure_spec(fig_id);
            std::vector<SweepRow> rows = run_sweep(spec, g.threads);
            output_rows(rows, g, fig_id + "; " + describe_spec(spec));
            return 0;
        }

        if (app.got_subcommand(oracle)) {
            std::vector<ModelParams> grid;
            for (int n : or_n)
                for (double gamma : or_gamma)
                    for (double nbar : or_nbar)
                        for (double d : or_d)
                            grid.push_back(make_params(n, gamma, nbar, d));
            if (!g.quiet)
                std::cerr << "oracle: " << grid.size() << " points, "
                          << or_quad.points_per_axis << " points per axis\n";
            ConsistencyReport rep = consistency_report(grid, or_quad);
            std::ostringstream os;
            for (const ConsistencyRow& row : rep.rows) {
                os << "n=" << row.params.n_particles
                   << " gamma=" << row.params.gamma << " nbar=" << row.params.nbar
                   << " d=" << row.params.d_factor
                   << " i_closed=" << fmt(row.i_closed)
                   << " i_quad=" << fmt(row.i_quad) << " ratio=" << fmt(row.ratio)
                   << " nph_closed=" << fmt(row.nph_closed)
                   << " nph_quad=" << fmt(row.nph_quad)
                   << " norm_closed=" << fmt(row.norm_closed)
                   << " norm_quad=" << fmt(row.norm_quad)
                   << (row.indeterminate ? " indeterminate" : "") << "\n";
            }
            os << "summary: included=" << rep.n_included
               << " indeterminate=" << rep.n_indeterminate;
            if (rep.summary_defined)
                os << " mean_ratio=" << fmt(rep.mean_ratio) << " cv=" << fmt(rep.cv)
                   << " constant_ratio=" << (rep.constant_ratio ? "yes" : "no");
            else
                os << " (summary undefined)";
            os << "\n";
            if (!g.out.empty()) {
                std::ofstream out(g.out, std::ios::binary);
                if (!out) throw io_error("cannot open output file: " + g.out);
                out << os.str();
                if (!out.good()) throw io_error("write failed: " + g.out);
            } else {
                std::cout << os.str();
            }
            return (rep.summary_defined && rep.cv > 1e-4) ? 1 : 0;
        }

        if (app.got_subcommand(calibrate)) {
            CatCalibration cal = single_mode_cat_calibration(cal_alpha, cal_quad);
            double rel = std::abs(cal.i_one_mode / cal.mean_excitation - 1.0);
            std::cout << "i_one_mode = " << fmt(cal.i_one_mode) << "\n"
                      << "mean_excitation = " << fmt(cal.mean_excitation) << "\n"
                      << "relative_difference = " << fmt(rel) << "\n";
            return rel <= 0.01 ? 0 : 1;
        }
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace macrowig
