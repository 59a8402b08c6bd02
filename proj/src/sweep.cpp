#include "macrowig/sweep.hpp"

#include "macrowig/macroscopicity.hpp"
#include "macrowig/wigner.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace macrowig {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::set<std::string> sweep_names = {"n_particles", "gamma", "nbar",
                                           "temperature_ratio", "d_factor"};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void check_values(const std::string& name, const std::vector<double>& values) {
    if (values.empty())
        throw std::domain_error("sweep parameter " + name + " has an empty value list");
    for (double v : values) {
        if (!std::isfinite(v))
            throw std::domain_error("sweep parameter " + name + " has a non-finite value");
        if (name == "n_particles") {
            if (std::abs(v - std::round(v)) > 1e-9 || v < 1.0 ||
                v > static_cast<double>(max_particles))
                throw std::domain_error(
                    "n_particles values must be integers in [1, " +
                    std::to_string(max_particles) + "]");
        } else if (name == "temperature_ratio") {
            if (!(v > 0.0))
                throw std::domain_error("temperature_ratio values must be > 0");
        } else if (!(v >= 0.0)) {
            throw std::domain_error(name + " values must be >= 0");
        }
    }
}

struct ResolvedSweep {
    std::vector<AxisSpec> axes; // in spec order
    std::map<std::string, double> fixed;
    bool thermal_is_ratio = false;
};

ResolvedSweep validate_sweep(const SweepSpec& spec) {
    ResolvedSweep rs;
    std::map<std::string, std::vector<double>> seen;
    for (const AxisSpec& ax : spec.axes) {
        if (!sweep_names.count(ax.name))
            throw std::domain_error("unknown sweep parameter: " + ax.name);
        if (seen.count(ax.name))
            throw std::domain_error("sweep parameter " + ax.name + " appears twice");
        check_values(ax.name, ax.values);
        seen[ax.name] = ax.values;
    }
    for (const auto& [name, value] : spec.fixed) {
        if (!sweep_names.count(name))
            throw std::domain_error("unknown sweep parameter: " + name);
        if (seen.count(name))
            throw std::domain_error("sweep parameter " + name + " appears twice");
        check_values(name, {value});
        seen[name] = {value};
    }
    bool has_nbar = seen.count("nbar") > 0;
    bool has_ratio = seen.count("temperature_ratio") > 0;
    if (has_nbar == has_ratio)
        throw std::domain_error(
            "exactly one of nbar / temperature_ratio must be specified");
    for (const char* required : {"n_particles", "gamma", "d_factor"})
        if (!seen.count(required))
            throw std::domain_error(std::string("sweep parameter ") + required +
                                    " is missing");
    rs.thermal_is_ratio = has_ratio;
    rs.axes = spec.axes;
    rs.fixed = spec.fixed;

    if (spec.method != Method::closed_form) {
        auto max_of = [&](const std::string& name) {
            const std::vector<double>& v = seen.at(name);
            return *std::max_element(v.begin(), v.end());
        };
        double nbar_max;
        if (has_ratio) {
            const std::vector<double>& v = seen.at("temperature_ratio");
            nbar_max = thermal_occupation(*std::min_element(v.begin(), v.end()));
        } else {
            nbar_max = max_of("nbar");
        }
        if (max_of("n_particles") > 3.0 || max_of("gamma") > 3.0 || nbar_max > 2.0)
            throw std::domain_error(
                "quadrature method requires every point oracle-feasible "
                "(n_particles <= 3, gamma <= 3, nbar <= 2)");
    }
    return rs;
}

ModelParams params_at(const ResolvedSweep& rs, const std::vector<std::size_t>& idx) {
    std::map<std::string, double> v = rs.fixed;
    for (std::size_t a = 0; a < rs.axes.size(); ++a)
        v[rs.axes[a].name] = rs.axes[a].values[idx[a]];
    double nbar = rs.thermal_is_ratio ? thermal_occupation(v.at("temperature_ratio"))
                                      : v.at("nbar");
    return make_params(static_cast<int>(std::llround(v.at("n_particles"))),
                       v.at("gamma"), nbar, v.at("d_factor"));
}

void require_finite(const SweepRow& r) {
    if (!std::isfinite(r.i_raw) || !std::isfinite(r.i_value) ||
        !std::isfinite(r.n_ph) || !std::isfinite(r.z_norm))
        throw std::domain_error("non-finite result");
}

std::string point_label(const ModelParams& p) {
    std::ostringstream os;
    os << "(n_particles=" << p.n_particles << ", gamma=" << p.gamma
       << ", nbar=" << p.nbar << ", d_factor=" << p.d_factor << ")";
    return os.str();
}

std::string timestamp_utc() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::both: return "both";
    }
    throw std::domain_error("invalid method");
}

Method method_from_name(const std::string& name) {
    if (name == "closed_form") return Method::closed_form;
    if (name == "quadrature") return Method::quadrature;
    if (name == "both") return Method::both;
    throw std::domain_error("unknown method: " + name +
                            " (expected closed_form, quadrature or both)");
}

OutputFormat format_from_name(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    if (name == "svg" || name == "svg-plot") return OutputFormat::svg_plot;
    throw std::domain_error("unknown format: " + name +
                            " (expected csv, json or svg)");
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads) {
    ResolvedSweep rs = validate_sweep(spec);

    std::size_t n_points = 1;
    for (const AxisSpec& ax : rs.axes) n_points *= ax.values.size();
    const int rows_per_point = (spec.method == Method::both) ? 2 : 1;
    std::vector<SweepRow> rows(n_points * rows_per_point);
    std::vector<std::string> failures(n_points);

    if (threads < 1) threads = 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
#endif
    for (std::size_t t = 0; t < n_points; ++t) {
        // Decompose the linear index with the last axis fastest so rows land
        // in lexicographic axes order whatever the execution schedule.
        std::vector<std::size_t> idx(rs.axes.size(), 0);
        std::size_t rem = t;
        for (std::size_t a = rs.axes.size(); a-- > 0;) {
            idx[a] = rem % rs.axes[a].values.size();
            rem /= rs.axes[a].values.size();
        }
        try {
            ModelParams p = params_at(rs, idx);
            SweepRow base;
            base.n_particles = p.n_particles;
            base.gamma = p.gamma;
            base.nbar = p.nbar;
            base.d_factor = p.d_factor;
            std::size_t slot = t * static_cast<std::size_t>(rows_per_point);
            if (spec.method != Method::quadrature) {
                SweepRow r = base;
                MacroResult m = macroscopicity(p);
                r.i_raw = m.raw_value;
                r.i_value = m.value;
                r.n_ph = phonon_number(p);
                r.z_norm = normalization(p);
                r.method = "closed_form";
                require_finite(r);
                rows[slot++] = r;
            }
            if (spec.method != Method::closed_form) {
                SweepRow r = base;
                detail::QuadratureEval q =
                    detail::evaluate_by_quadrature(p, spec.quadrature);
                r.i_raw = q.raw;
                r.i_value = q.value;
                r.n_ph = q.n_ph;
                r.z_norm = q.norm;
                r.method = "quadrature";
                require_finite(r);
                rows[slot] = r;
            }
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "sweep point ";
            try {
                os << point_label(params_at(rs, idx));
            } catch (...) {
                os << "#" << t;
            }
            os << " failed: " << e.what();
            failures[t] = os.str();
        }
    }
    for (const std::string& f : failures)
        if (!f.empty()) throw std::domain_error(f);
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i].row_index = static_cast<int>(i);
    return rows;
}

SweepSpec figure_spec(const std::string& fig_id) {
    auto steps = [](double lo, double step_inv, int count) {
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) v.push_back(lo + i / step_inv);
        return v;
    };
    std::vector<double> n_axis;
    for (int n = 1; n <= 8; ++n) n_axis.push_back(n);

    SweepSpec spec;
    if (fig_id == "fig2") {
        spec.axes = {{"n_particles", n_axis}, {"nbar", {0.0, 10.0}}};
        spec.fixed = {{"gamma", 10.0}, {"d_factor", 0.0}};
    } else if (fig_id == "fig3") {
        spec.axes = {{"n_particles", n_axis}, {"gamma", {1.0, 10.0}}};
        spec.fixed = {{"nbar", 0.0}, {"d_factor", 0.0}};
    } else if (fig_id == "fig4") {
        spec.axes = {{"nbar", {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}},
                     {"gamma", {1.0, 10.0}}};
        spec.fixed = {{"n_particles", 5.0}, {"d_factor", 0.0}};
    } else if (fig_id == "fig5") {
        spec.axes = {{"d_factor", steps(0.0, 20.0, 31)},
                     {"gamma", {1.0, 2.0, 10.0}}};
        spec.fixed = {{"n_particles", 5.0}, {"nbar", 0.0}};
    } else {
        throw std::domain_error("unknown figure id: " + fig_id +
                                " (expected fig2, fig3, fig4 or fig5)");
    }
    spec.method = Method::closed_form;
    return spec;
}

std::vector<SweepRow> figure_dataset(const std::string& fig_id) {
    return run_sweep(figure_spec(fig_id));
}

std::string format_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "row_index,n_particles,gamma,nbar,d_factor,i_raw,i_value,n_ph,z_norm,method\n";
    for (const SweepRow& r : rows) {
        out += std::to_string(r.row_index);
        out += ',';
        out += std::to_string(r.n_particles);
        for (double v : {r.gamma, r.nbar, r.d_factor, r.i_raw, r.i_value, r.n_ph,
                         r.z_norm}) {
            out += ',';
            out += fmt17(v);
        }
        out += ',';
        out += r.method;
        out += '\n';
    }
    return out;
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line != "row_index,n_particles,gamma,nbar,d_factor,i_raw,i_value,n_ph,z_norm,method")
        throw std::domain_error("csv header mismatch");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 10)
            throw std::domain_error("csv row with wrong field count");
        SweepRow r;
        r.row_index = std::stoi(fields[0]);
        r.n_particles = std::stoi(fields[1]);
        r.gamma = std::strtod(fields[2].c_str(), nullptr);
        r.nbar = std::strtod(fields[3].c_str(), nullptr);
        r.d_factor = std::strtod(fields[4].c_str(), nullptr);
        r.i_raw = std::strtod(fields[5].c_str(), nullptr);
        r.i_value = std::strtod(fields[6].c_str(), nullptr);
        r.n_ph = std::strtod(fields[7].c_str(), nullptr);
        r.z_norm = std::strtod(fields[8].c_str(), nullptr);
        r.method = fields[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_json(const std::vector<SweepRow>& rows, const std::string& note) {
    ordered_json meta;
    meta["version"] = artifact_version;
    meta["dephasing_convention"] =
        "state-level: phi(r - r') = exp(-(d_factor * (r - r'))^2) multiplies "
        "each branch pair of the superposition";
    meta["generated_at"] = timestamp_utc();
    if (!note.empty()) meta["note"] = note;

    ordered_json jrows = ordered_json::array();
    for (const SweepRow& r : rows) {
        ordered_json j;
        j["row_index"] = r.row_index;
        j["n_particles"] = r.n_particles;
        j["gamma"] = r.gamma;
        j["nbar"] = r.nbar;
        j["d_factor"] = r.d_factor;
        j["i_raw"] = r.i_raw;
        j["i_value"] = r.i_value;
        j["n_ph"] = r.n_ph;
        j["z_norm"] = r.z_norm;
        j["method"] = r.method;
        jrows.push_back(std::move(j));
    }
    ordered_json top;
    top["meta"] = std::move(meta);
    top["rows"] = std::move(jrows);
    return top.dump(2) + "\n";
}

std::vector<SweepRow> rows_from_json(const std::string& text) {
    ordered_json top = ordered_json::parse(text);
    std::vector<SweepRow> rows;
    for (const ordered_json& j : top.at("rows")) {
        SweepRow r;
        r.row_index = j.at("row_index").get<int>();
        r.n_particles = j.at("n_particles").get<int>();
        r.gamma = j.at("gamma").get<double>();
        r.nbar = j.at("nbar").get<double>();
        r.d_factor = j.at("d_factor").get<double>();
        r.i_raw = j.at("i_raw").get<double>();
        r.i_value = j.at("i_value").get<double>();
        r.n_ph = j.at("n_ph").get<double>();
        r.z_norm = j.at("z_norm").get<double>();
        r.method = j.at("method").get<std::string>();
        rows.push_back(std::move(r));
    }
    return rows;
}

SweepSpec sweep_spec_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::domain_error(std::string("config parse error: ") + e.what());
    }
    SweepSpec spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "axes") {
            for (const ordered_json& ax : value) {
                AxisSpec a;
                a.name = ax.at("name").get<std::string>();
                for (const ordered_json& v : ax.at("values"))
                    a.values.push_back(v.get<double>());
                spec.axes.push_back(std::move(a));
            }
        } else if (key == "fixed") {
            for (const auto& [name, v] : value.items())
                spec.fixed[name] = v.get<double>();
        } else if (key == "method") {
            spec.method = method_from_name(value.get<std::string>());
        } else if (key == "quadrature") {
            for (const auto& [qk, qv] : value.items()) {
                if (qk == "points_per_axis")
                    spec.quadrature.points_per_axis = qv.get<int>();
                else if (qk == "extent_sigma")
                    spec.quadrature.extent_sigma = qv.get<double>();
                else if (qk == "fd_step")
                    spec.quadrature.fd_step = qv.get<double>();
                else if (qk == "fd_order")
                    spec.quadrature.fd_order = qv.get<int>();
                else
                    throw std::domain_error("unknown config key: quadrature." + qk);
            }
        } else {
            throw std::domain_error("unknown config key: " + key);
        }
    }
    return spec;
}

std::string format_svg(const std::vector<SweepRow>& rows) {
    if (rows.empty())
        throw std::domain_error("svg-plot requires at least one row");

    const std::array<const char*, 4> names = {"n_particles", "gamma", "nbar",
                                              "d_factor"};
    auto value_of = [](const SweepRow& r, int which) {
        switch (which) {
            case 0: return static_cast<double>(r.n_particles);
            case 1: return r.gamma;
            case 2: return r.nbar;
            default: return r.d_factor;
        }
    };
    std::vector<int> varying;
    for (int w = 0; w < 4; ++w) {
        std::set<double> distinct;
        for (const SweepRow& r : rows) distinct.insert(value_of(r, w));
        if (distinct.size() > 1) varying.push_back(w);
    }
    if (varying.size() > 2)
        throw std::domain_error("svg-plot supports at most 2 sweep axes");

    int x_param = varying.empty() ? 0 : varying[0];
    int series_param = -1;
    if (varying.size() == 2) {
        // The second (fast) axis changes first in row order; the slow one is x.
        int fast = -1;
        for (std::size_t k = 0; k + 1 < rows.size() && fast < 0; ++k)
            for (int w : varying)
                if (value_of(rows[k], w) != value_of(rows[k + 1], w)) {
                    fast = w;
                    break;
                }
        series_param = fast;
        x_param = (varying[0] == fast) ? varying[1] : varying[0];
    }

    // Series keyed by (series value, method) in order of first appearance.
    struct Series {
        double key_value;
        std::string method;
        std::vector<std::pair<double, double>> iv, nph;
    };
    std::vector<Series> series;
    for (const SweepRow& r : rows) {
        double key = (series_param >= 0) ? value_of(r, series_param) : 0.0;
        Series* s = nullptr;
        for (Series& cand : series)
            if (cand.key_value == key && cand.method == r.method) s = &cand;
        if (!s) {
            series.push_back({key, r.method, {}, {}});
            s = &series.back();
        }
        double x = value_of(r, x_param);
        s->iv.emplace_back(x, r.i_value);
        s->nph.emplace_back(x, r.n_ph);
    }

    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const SweepRow& r : rows) {
        double x = value_of(r, x_param);
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymax = std::max({ymax, r.i_value, r.n_ph});
        ymin = std::min({ymin, r.i_value, r.n_ph});
    }
    if (xmax == xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    ymin = std::min(0.0, ymin);
    if (ymax <= ymin) ymax = ymin + 1.0;
    ymax += 0.05 * (ymax - ymin);

    const double width = 960, height = 600;
    const double ml = 80, mr = 200, mt = 40, mb = 60;
    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
    };
    auto py = [&](double y) {
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };
    auto coord = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    const std::array<const char*, 6> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#8c564b", "#e377c2"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    svg << "<line x1=\"" << coord(ml) << "\" y1=\"" << coord(height - mb)
        << "\" x2=\"" << coord(width - mr) << "\" y2=\"" << coord(height - mb)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << coord(ml) << "\" y1=\"" << coord(mt) << "\" x2=\""
        << coord(ml) << "\" y2=\"" << coord(height - mb)
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        double xv = xmin + (xmax - xmin) * t / 5.0;
        double yv = ymin + (ymax - ymin) * t / 5.0;
        svg << "<line x1=\"" << coord(px(xv)) << "\" y1=\"" << coord(height - mb)
            << "\" x2=\"" << coord(px(xv)) << "\" y2=\""
            << coord(height - mb + 6) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << coord(px(xv)) << "\" y=\""
            << coord(height - mb + 22)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt_tick(xv)
            << "</text>\n";
        svg << "<line x1=\"" << coord(ml - 6) << "\" y1=\"" << coord(py(yv))
            << "\" x2=\"" << coord(ml) << "\" y2=\"" << coord(py(yv))
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << coord(ml - 10) << "\" y=\"" << coord(py(yv) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << fmt_tick(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << coord((ml + width - mr) / 2) << "\" y=\""
        << coord(height - 15) << "\" font-size=\"14\" text-anchor=\"middle\">"
        << names[static_cast<std::size_t>(x_param)] << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = palette[si % palette.size()];
        auto polyline = [&](const std::vector<std::pair<double, double>>& pts,
                            bool dashed) {
            svg << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2\"";
            if (dashed) svg << " stroke-dasharray=\"6,4\"";
            svg << " points=\"";
            for (const auto& [x, y] : pts)
                svg << coord(px(x)) << "," << coord(py(y)) << " ";
            svg << "\"/>\n";
        };
        polyline(s.iv, false);
        polyline(s.nph, true);

        std::string label;
        if (series_param >= 0)
            label = std::string(names[static_cast<std::size_t>(series_param)]) +
                    "=" + fmt_tick(s.key_value);
        if (series.size() > 1 &&
            std::any_of(series.begin(), series.end(), [&](const Series& o) {
                return o.method != s.method;
            }))
            label += (label.empty() ? "" : " ") + s.method;
        double ly = mt + 20 + 40 * static_cast<double>(si);
        svg << "<line x1=\"" << coord(width - mr + 10) << "\" y1=\"" << coord(ly)
            << "\" x2=\"" << coord(width - mr + 40) << "\" y2=\"" << coord(ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << coord(width - mr + 46) << "\" y=\""
            << coord(ly + 4) << "\" font-size=\"12\">" << label
            << " i_value</text>\n";
        svg << "<line x1=\"" << coord(width - mr + 10) << "\" y1=\""
            << coord(ly + 18) << "\" x2=\"" << coord(width - mr + 40)
            << "\" y2=\"" << coord(ly + 18) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
        svg << "<text x=\"" << coord(width - mr + 46) << "\" y=\""
            << coord(ly + 22) << "\" font-size=\"12\">" << label
            << " n_ph</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit(const std::vector<SweepRow>& rows, OutputFormat format,
          const std::string& path, const std::string& note) {
    std::string payload;
    switch (format) {
        case OutputFormat::csv: payload = format_csv(rows); break;
        case OutputFormat::json: payload = format_json(rows, note); break;
        case OutputFormat::svg_plot: payload = format_svg(rows); break;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open output file: " + path);
    out << payload;
    out.flush();
    if (!out.good()) throw io_error("write failed: " + path);
}

} // namespace macrowig
