#include "cellcycle/experiments.hpp"

#include "cellcycle/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace cellcycle {

namespace {

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
    if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ValidationError("unknown field '" + key + "' in " + what);
}

template <class T>
void read(const Json& j, const char* key, T& out)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("config field '") + key + "' has the wrong type");
    }
}

std::string number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

EigenOptions eigen_options(const ExperimentConfig& config)
{
    EigenOptions o;
    o.tol = config.eigen_tol;
    o.max_periods = config.max_periods;
    o.strict = config.strict;
    o.keep_eigenfunction = false;
    o.transport.strict = config.strict;
    return o;
}

void append(std::vector<std::string>& out, const std::vector<std::string>& in, const std::string& tag)
{
    for (const auto& w : in)
        if (std::find(out.begin(), out.end(), tag + w) == out.end()) out.push_back(tag + w);
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ExperimentConfig config_from_json(const Json& j)
{
    require_keys(j, {"model", "grid", "experiment", "output", "strict", "tolerances", "threads"},
                 "config");
    ExperimentConfig c;
    if (j.contains("model")) c.model = model_from_json(j.at("model"));
    if (j.contains("grid")) {
        const Json& g = j.at("grid");
        require_keys(g, {"cells_per_unit", "scale", "margin", "tail_decay"}, "grid");
        read(g, "cells_per_unit", c.grid.cells_per_unit);
        read(g, "scale", c.grid.scale);
        read(g, "margin", c.grid.margin);
        read(g, "tail_decay", c.grid.tail_decay);
        if (!(c.grid.cells_per_unit > 0.0) || !(c.grid.scale > 0.0) || !(c.grid.margin > 1.0) ||
            !(c.grid.tail_decay > 0.0))
            throw ValidationError("grid resolution, scale and tail must be positive, margin > 1");
    }
    if (j.contains("experiment")) {
        const Json& e = j.at("experiment");
        if (!e.is_object() || !e.contains("type"))
            throw ValidationError("experiment needs a 'type' field");
        const auto type = e.at("type").get<std::string>();
        if (type == "averaging") {
            require_keys(e, {"type"}, "experiment");
            c.experiment = ExperimentKind::Averaging;
        } else if (type == "phase_sweep") {
            require_keys(e, {"type", "samples", "shift_all"}, "experiment");
            c.experiment = ExperimentKind::PhaseSweep;
            read(e, "samples", c.phase_samples);
            read(e, "shift_all", c.shift_all);
            if (c.phase_samples < 2) throw ValidationError("phase sweep needs at least 2 samples");
        } else if (type == "convexity") {
            require_keys(e, {"type", "second_model", "second_shift", "theta_points", "certify"},
                         "experiment");
            c.experiment = ExperimentKind::Convexity;
            if (e.contains("second_model")) c.second_model = model_from_json(e.at("second_model"));
            read(e, "second_shift", c.second_shift);
            read(e, "theta_points", c.theta_points);
            read(e, "certify", c.certify);
            if (c.theta_points < 2) throw ValidationError("convexity sweep needs at least 2 thetas");
        } else if (type == "antiphase") {
            require_keys(e, {"type", "amplitude", "mitosis_fraction", "gap_total", "points"},
                         "experiment");
            c.experiment = ExperimentKind::Antiphase;
            read(e, "amplitude", c.amplitude);
            read(e, "mitosis_fraction", c.mitosis_fraction);
            read(e, "gap_total", c.gap_total);
            read(e, "points", c.antiphase_points);
            if (!(c.amplitude >= 0.0 && c.amplitude <= 1.0))
                throw ValidationError("antiphase amplitude must lie in [0, 1]");
            if (c.antiphase_points < 1) throw ValidationError("antiphase sweep needs a point");
        } else {
            throw ValidationError("unknown experiment type '" + type + "'");
        }
    }
    if (j.contains("output")) {
        require_keys(j.at("output"), {"dir"}, "output");
        read(j.at("output"), "dir", c.output_dir);
    }
    read(j, "strict", c.strict);
    if (j.contains("tolerances")) {
        const Json& t = j.at("tolerances");
        require_keys(t, {"slack", "eigen_tol", "max_periods"}, "tolerances");
        read(t, "slack", c.slack);
        read(t, "eigen_tol", c.eigen_tol);
        read(t, "max_periods", c.max_periods);
    }
    read(j, "threads", c.threads);
    return c;
}

ExperimentConfig preset_config(const std::string& name)
{
    if (name != "table3") throw ValidationError("unknown preset '" + name + "'");
    return ExperimentConfig{};
}

std::string AveragingReport::ordering() const
{
    if (lambda_f > lambda_p) return "lambda_F > lambda_P";
    if (lambda_f < lambda_p) return "lambda_F < lambda_P";
    return "lambda_F = lambda_P";
}

Json AveragingReport::to_json() const
{
    return Json{{"lambda_F", lambda_f},   {"lambda_P", lambda_p},   {"lambda_g", lambda_g},
                {"converged", converged}, {"g_below_F", g_below_f}, {"g_below_P", g_below_p},
                {"ordering", ordering()}, {"warnings", warnings}};
}

AveragingReport run_averaging_comparison(const ExperimentConfig& config)
{
    const GridSpec grid = grid_for(config.model, config.grid);
    const EigenOptions options = eigen_options(config);
    EigenResult results[3];
    const Pipeline pipelines[3] = {Pipeline::Floquet, Pipeline::Perron, Pipeline::Mixed};
    parallel_for(3, config.threads, [&](std::size_t i) {
        results[i] = eigenvalue(pipelines[i], config.model, grid, options);
    });
    AveragingReport r;
    r.lambda_f = results[0].lambda;
    r.lambda_p = results[1].lambda;
    r.lambda_g = results[2].lambda;
    r.converged = results[0].converged && results[1].converged && results[2].converged;
    r.g_below_f = r.lambda_g <= r.lambda_f + config.slack;
    r.g_below_p = r.lambda_g <= r.lambda_p + config.slack;
    append(r.warnings, results[0].warnings, "floquet: ");
    append(r.warnings, results[1].warnings, "perron: ");
    append(r.warnings, results[2].warnings, "mixed: ");
    return r;
}

std::string SweepResult::csv() const
{
    std::ostringstream os;
    os << parameter_name << ",lambda," << reference_name << ",converged\n";
    for (const auto& r : rows)
        os << number(r.parameter) << ',' << number(r.lambda) << ',' << number(r.reference) << ','
           << (r.converged ? 1 : 0) << '\n';
    return os.str();
}

SweepResult run_convexity_sweep(const ExperimentConfig& config)
{
    const PhaseModel& m1 = config.model;
    const PhaseModel m2 = config.second_model ? *config.second_model
                                              : shift_all(m1, config.second_shift * m1.period());
    const GridSpec grid = grid_for({&m1, &m2}, config.grid);
    EigenOptions options = eigen_options(config);
    const std::size_t count = config.theta_points;

    std::vector<EigenResult> results(count);
    std::vector<double> thetas(count);
    for (std::size_t k = 0; k < count; ++k)
        thetas[k] = static_cast<double>(k) / static_cast<double>(count - 1);
    parallel_for(2, config.threads, [&](std::size_t e) {
        const std::size_t k = e == 0 ? 0 : count - 1;
        results[k] = floquet_eigenvalue(blend_models(m1, m2, thetas[k]), grid, options);
    });
    parallel_for(count - 2, config.threads, [&](std::size_t i) {
        const std::size_t k = i + 1;
        EigenOptions warm = options;
        warm.initial = results[thetas[k] < 0.5 ? 0 : count - 1].state;
        results[k] = floquet_eigenvalue(blend_models(m1, m2, thetas[k]), grid, warm);
    });

    // theta = 1 and theta = 0 reproduce m1 and m2 exactly.
    const double l1 = results[count - 1].lambda;
    const double l2 = results[0].lambda;
    SweepResult s;
    s.parameter_name = "theta";
    s.reference_name = "chord";
    s.worst_margin = std::numeric_limits<double>::infinity();
    s.inequality_holds = true;
    for (std::size_t k = 0; k < count; ++k) {
        const double chord = thetas[k] * l1 + (1.0 - thetas[k]) * l2;
        s.rows.push_back({thetas[k], results[k].lambda, chord, results[k].converged});
        if (!results[k].converged) continue;
        s.worst_margin = std::min(s.worst_margin, chord - results[k].lambda);
        append(s.warnings, results[k].warnings, "theta " + number(thetas[k]) + ": ");
    }
    s.inequality_holds = s.worst_margin >= -config.slack;
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& r : s.rows)
        if (r.converged) sum += r.lambda, ++used;
    s.mean_lambda = used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    if (config.certify) s.certificate = check_lemma_blend(m1, m2, 0.5, grid);
    return s;
}

SweepResult run_phase_sweep(const ExperimentConfig& config)
{
    const PhaseModel& model = config.model;
    const GridSpec grid = grid_for(model, config.grid);
    EigenOptions options = eigen_options(config);
    const EigenResult uniform =
        floquet_eigenvalue(deaths_averaged(model, static_cast<int>(grid.steps_per_period)), grid,
                           options);
    options.initial = uniform.state;

    const std::size_t count = config.phase_samples;
    std::vector<EigenResult> results(count);
    std::vector<double> phis(count);
    for (std::size_t k = 0; k < count; ++k)
        phis[k] = model.period() * static_cast<double>(k) / static_cast<double>(count);
    parallel_for(count, config.threads, [&](std::size_t k) {
        const PhaseModel shifted =
            config.shift_all ? shift_all(model, phis[k]) : shift_deaths(model, phis[k]);
        results[k] = floquet_eigenvalue(shifted, grid, options);
    });

    SweepResult s;
    s.parameter_name = "phi";
    s.reference_name = "lambda_u";
    s.lambda_u = uniform.lambda;
    append(s.warnings, uniform.warnings, "uniform: ");
    double sum = 0.0;
    std::size_t used = 0, above = 0;
    bool below_seen = false, above_seen = false;
    const double noise = 10.0 * config.eigen_tol;
    for (std::size_t k = 0; k < count; ++k) {
        const auto& r = results[k];
        s.rows.push_back({phis[k], r.lambda, s.lambda_u, r.converged});
        if (!r.converged) {
            s.warnings.push_back("phi " + number(phis[k]) + ": not converged");
            continue;
        }
        append(s.warnings, r.warnings, "phi " + number(phis[k]) + ": ");
        sum += r.lambda;
        ++used;
        if (r.lambda >= s.lambda_u) ++above;
        below_seen = below_seen || r.lambda < s.lambda_u - noise;
        above_seen = above_seen || r.lambda > s.lambda_u + noise;
    }
    if (used == 0) throw ConvergenceError("no phase-sweep row converged");
    s.mean_lambda = sum / static_cast<double>(used);
    s.fraction_at_or_above = static_cast<double>(above) / static_cast<double>(used);
    s.inequality_holds = s.lambda_u <= s.mean_lambda + config.slack;
    s.dichotomy_holds = !below_seen || above_seen;
    return s;
}

std::string AntiphaseReport::csv() const
{
    std::ostringstream os;
    os << "a1,a2,a3,lambda_F,lambda_P,difference,sign,converged\n";
    for (const auto& r : rows) {
        const double diff = r.lambda_f - r.lambda_p;
        os << number(r.a1) << ',' << number(r.a2) << ',' << number(r.a3) << ','
           << number(r.lambda_f) << ',' << number(r.lambda_p) << ',' << number(diff) << ','
           << (diff > 0.0 ? "+" : diff < 0.0 ? "-" : "0") << ',' << (r.converged ? 1 : 0) << '\n';
    }
    return os.str();
}

AntiphaseReport run_antiphase_experiment(const ExperimentConfig& config)
{
    const std::size_t count = config.antiphase_points;
    const double a3 = config.mitosis_fraction * 1.0;
    std::vector<double> a1(count);
    for (std::size_t k = 0; k < count; ++k)
        a1[k] = count == 1 ? 0.5 * config.gap_total
                           : config.gap_total * (0.1 + 0.8 * static_cast<double>(k) /
                                                           static_cast<double>(count - 1));
    const EigenOptions options = eigen_options(config);
    std::vector<AntiphaseRow> rows(count);
    std::vector<std::vector<std::string>> warnings(count);
    parallel_for(count, config.threads, [&](std::size_t k) {
        const PhaseModel m = presets::antiphase(config.amplitude, a1[k], config.gap_total - a1[k], a3);
        const GridSpec grid = grid_for(m, config.grid);
        const EigenResult f = floquet_eigenvalue(m, grid, options);
        const EigenResult p = perron_eigenvalue(m, grid, options);
        rows[k] = {a1[k], config.gap_total - a1[k], a3, f.lambda, p.lambda, f.converged && p.converged};
        append(warnings[k], f.warnings, "floquet: ");
        append(warnings[k], p.warnings, "perron: ");
    });
    AntiphaseReport report;
    report.rows = std::move(rows);
    for (const auto& w : warnings) append(report.warnings, w, "");
    return report;
}

namespace {

struct Series {
    std::string x_name, y_name, ref_name;
    std::vector<double> x, y, ref;
};

Series parse_sweep_csv(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw ValidationError("sweep CSV is empty");
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        for (std::string cell; std::getline(h, cell, ',');) header.push_back(cell);
    }
    auto column = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto y_col = column("lambda");
    const auto c_col = column("converged");
    if (header.size() < 2 || y_col < 0) throw ValidationError("sweep CSV needs a 'lambda' column");
    std::ptrdiff_t r_col = -1;
    for (const char* name : {"lambda_u", "chord", "lambda_P"})
        if (r_col < 0) r_col = column(name);

    Series s;
    s.x_name = header[0];
    s.y_name = "lambda";
    if (r_col >= 0) s.ref_name = header[static_cast<std::size_t>(r_col)];
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (cells.size() != header.size()) throw ValidationError("ragged sweep CSV row: " + line);
        if (c_col >= 0 && cells[static_cast<std::size_t>(c_col)] != "1") continue;
        try {
            s.x.push_back(std::stod(cells[0]));
            s.y.push_back(std::stod(cells[static_cast<std::size_t>(y_col)]));
            if (r_col >= 0) s.ref.push_back(std::stod(cells[static_cast<std::size_t>(r_col)]));
        } catch (const std::exception&) {
            throw ValidationError("non-numeric sweep CSV row: " + line);
        }
    }
    if (s.x.size() < 2) throw ValidationError("sweep CSV needs at least two converged rows");
    return s;
}

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string axis_label(const std::string& name)
{
    if (name == "phi") return "&#966;";
    if (name == "theta") return "&#952;";
    if (name == "lambda") return "&#955;";
    if (name == "lambda_u") return "&#955;_u";
    return name;
}

}  // namespace

std::string render_svg(const std::string& csv)
{
    const Series s = parse_sweep_csv(csv);
    const double width = 640, height = 400, left = 80, right = 24, top = 24, bottom = 56;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    auto [xmin_it, xmax_it] = std::minmax_element(s.x.begin(), s.x.end());
    double xmin = *xmin_it, xmax = *xmax_it;
    double ymin = *std::min_element(s.y.begin(), s.y.end());
    double ymax = *std::max_element(s.y.begin(), s.y.end());
    for (double r : s.ref) ymin = std::min(ymin, r), ymax = std::max(ymax, r);
    if (xmax == xmin) xmax = xmin + 1.0;
    const double pad = ymax > ymin ? 0.05 * (ymax - ymin) : std::max(1e-3, 0.05 * std::abs(ymax));
    ymin -= pad;
    ymax += pad;

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
    auto points = [&](const std::vector<double>& ys) {
        std::string out;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (k) out += ' ';
            out += fmt("%.2f", px(s.x[k])) + ',' + fmt("%.2f", py(ys[k]));
        }
        return out;
    };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0;
        const double yv = ymin + (ymax - ymin) * k / 4.0;
        o << "<text x=\"" << fmt("%.2f", px(xv)) << "\" y=\"" << fmt("%.2f", top + ph + 18)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt("%.4g", xv) << "</text>\n";
        o << "<text x=\"" << fmt("%.2f", left - 6) << "\" y=\"" << fmt("%.2f", py(yv) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << fmt("%.5g", yv) << "</text>\n";
    }
    o << "<text x=\"" << fmt("%.2f", left + pw / 2) << "\" y=\"" << fmt("%.2f", height - 12)
      << "\" font-size=\"14\" text-anchor=\"middle\">" << axis_label(s.x_name) << "</text>\n";
    o << "<text x=\"18\" y=\"" << fmt("%.2f", top + ph / 2) << "\" font-size=\"14\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 18 " << fmt("%.2f", top + ph / 2) << ")\">"
      << axis_label(s.y_name) << "</text>\n";
    if (!s.ref.empty())
        o << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
          << "stroke-dasharray=\"6 4\" points=\"" << points(s.ref) << "\"/>\n";
    o << "<polyline fill=\"none\" stroke=\"#1f4e9a\" stroke-width=\"2\" points=\"" << points(s.y)
      << "\"/>\n";
    if (!s.ref.empty())
        o << "<text x=\"" << fmt("%.2f", left + pw - 4) << "\" y=\"" << fmt("%.2f", top + 14)
          << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#c0392b\">- - "
          << axis_label(s.ref_name) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace cellcycle
