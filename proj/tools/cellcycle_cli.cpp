#include "cellcycle/error.hpp"
#include "cellcycle/experiments.hpp"
#include "cellcycle/matrix_oracle.hpp"
#include "cellcycle/random_models.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace cellcycle;

namespace {

struct CommonFlags {
    std::string config;
    std::string preset;
    std::string out;
    double grid_scale = 1.0;
    bool strict = false;
    std::uint64_t seed = 1;
};

ExperimentConfig load(const CommonFlags& flags)
{
    ExperimentConfig c;
    if (!flags.config.empty()) {
        std::ifstream in(flags.config);
        if (!in) throw ValidationError("cannot open config " + flags.config);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("config " + flags.config + " is not valid JSON: " + e.what());
        }
        c = config_from_json(j);
    } else {
        c = preset_config(flags.preset.empty() ? "table3" : flags.preset);
    }
    c.grid.scale *= flags.grid_scale;
    c.strict = c.strict || flags.strict;
    if (!flags.out.empty()) c.output_dir = flags.out;
    return c;
}

void write_file(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int verdict(bool ok, const ExperimentConfig& c) { return ok || !c.strict ? 0 : 1; }

int averaging(const CommonFlags& flags)
{
    const ExperimentConfig c = load(flags);
    const AveragingReport r = run_averaging_comparison(c);
    print_warnings(r.warnings);
    std::printf("lambda_F = %.10f\nlambda_P = %.10f\nlambda_g = %.10f\n", r.lambda_f, r.lambda_p,
                r.lambda_g);
    std::printf("lambda_g <= lambda_F + %g: %s\n", c.slack, r.g_below_f ? "yes" : "NO");
    std::printf("lambda_g <= lambda_P + %g: %s\n", c.slack, r.g_below_p ? "yes" : "NO");
    std::printf("%s\n", r.ordering().c_str());
    write_file(fs::path(c.output_dir) / "averaging.json", r.to_json().dump(2) + "\n");
    return verdict(r.pass() && r.converged, c);
}

int convexity(const CommonFlags& flags)
{
    const ExperimentConfig c = load(flags);
    const SweepResult s = run_convexity_sweep(c);
    print_warnings(s.warnings);
    const std::string csv = s.csv();
    const std::string svg = render_svg(csv);
    write_file(fs::path(c.output_dir) / "convexity.csv", csv);
    write_file(fs::path(c.output_dir) / "convexity.svg", svg);
    std::printf("worst margin (chord - lambda) = %.3e, convexity %s\n", s.worst_margin,
                s.inequality_holds ? "holds" : "VIOLATED");
    bool ok = s.inequality_holds;
    if (s.certificate) {
        std::printf("lemma certificate at theta = 0.5: residual %.3e, %s\n",
                    s.certificate->max_violation, s.certificate->pass ? "pass" : "FAIL");
        write_file(fs::path(c.output_dir) / "lemma.json", s.certificate->to_json() + "\n");
        ok = ok && s.certificate->pass;
    }
    return verdict(ok, c);
}

int phase_sweep(const CommonFlags& flags)
{
    const ExperimentConfig c = load(flags);
    const SweepResult s = run_phase_sweep(c);
    print_warnings(s.warnings);
    const std::string csv = s.csv();
    const std::string svg = render_svg(csv);
    write_file(fs::path(c.output_dir) / "phase_sweep.csv", csv);
    write_file(fs::path(c.output_dir) / "phase_sweep.svg", svg);
    std::printf("lambda_u = %.10f\nmean lambda(phi) = %.10f\n", s.lambda_u, s.mean_lambda);
    std::printf("share of phases with lambda(phi) >= lambda_u: %.4f\n", s.fraction_at_or_above);
    std::printf("lambda_u <= mean + %g: %s\n", c.slack, s.inequality_holds ? "yes" : "NO");
    std::printf("dichotomy: %s\n", s.dichotomy_holds ? "holds" : "VIOLATED");
    return verdict(s.inequality_holds && s.dichotomy_holds, c);
}

int antiphase(const CommonFlags& flags)
{
    const ExperimentConfig c = load(flags);
    const AntiphaseReport r = run_antiphase_experiment(c);
    print_warnings(r.warnings);
    const std::string csv = r.csv();
    write_file(fs::path(c.output_dir) / "antiphase.csv", csv);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int oracle_check(const CommonFlags& flags)
{
    const ExperimentConfig c = load(flags);
    bool ok = true;
    auto line = [&ok](bool pass, const std::string& text) {
        ok = ok && pass;
        std::printf("%s %s\n", pass ? "PASS" : "FAIL", text.c_str());
    };
    char buf[256];

    const ConstantCycle one{{1.0}, {0.0}, {0.0}};
    GridOptions g = c.grid;
    const EigenResult r1 = floquet_eigenvalue(one.model(), grid_for(one.model(), g));
    std::snprintf(buf, sizeof buf, "one-phase K=1: lambda_F = %.10f (exact 1)", r1.lambda);
    line(std::abs(r1.lambda - 1.0) <= 1e-3, buf);

    std::mt19937_64 rng(flags.seed);
    const ConstantCycle cycle = random_constant_cycle(rng);
    const double root = characteristic_equation_root(cycle);
    const ExtrapolatedEigenvalue ex = extrapolated_eigenvalue(Pipeline::Floquet, cycle.model(), g);
    std::snprintf(buf, sizeof buf, "characteristic root %.10f vs extrapolated PDE %.10f", root,
                  ex.lambda);
    line(std::abs(root - ex.lambda) <= 2e-3, buf);

    GridOptions coarse = c.grid;
    coarse.cells_per_unit = 128;
    const GridSpec cg = grid_for(c.model, coarse);
    EigenOptions tight;
    tight.tol = 1e-12;
    const double via_matrix = std::log(perron_root(assemble_monodromy(c.model, cg))) / cg.period;
    const double via_power = floquet_eigenvalue(c.model, cg, tight).lambda;
    std::snprintf(buf, sizeof buf, "monodromy log rho/T %.12f vs power iteration %.12f", via_matrix,
                  via_power);
    line(std::abs(via_matrix - via_power) <= 1e-9, buf);

    std::uniform_real_distribution<double> entry(0.0, 1.0);
    for (auto mode : {KingmanMode::EntrywiseGeometric, KingmanMode::DiagArithOffdiagGeom}) {
        int violations = 0;
        double worst = -INFINITY;
        for (int trial = 0; trial < 1000; ++trial) {
            Eigen::MatrixXd a(4, 4), b(4, 4);
            for (Eigen::Index k = 0; k < 16; ++k) a.data()[k] = 1e-3 + entry(rng);
            for (Eigen::Index k = 0; k < 16; ++k) b.data()[k] = 1e-3 + entry(rng);
            const auto rep = kingman_blend_check(NonnegMatrix(a), NonnegMatrix(b), entry(rng), mode);
            violations += rep.pass ? 0 : 1;
            worst = std::max(worst, rep.max_violation);
        }
        std::snprintf(buf, sizeof buf, "Kingman %s: %d violations in 1000 pairs (worst %.3e)",
                      mode == KingmanMode::EntrywiseGeometric ? "entrywise geometric"
                                                              : "diagonal arithmetic",
                      violations, worst);
        line(violations == 0, buf);
    }
    return verdict(ok, c);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Growth eigenvalues of periodic age-structured cell-cycle models"};
    app.require_subcommand(1);
    CommonFlags flags;
    auto add_common = [&flags](CLI::App* sub) {
        auto* config = sub->add_option("--config", flags.config, "experiment config (JSON)");
        sub->add_option("--preset", flags.preset, "built-in model preset (table3)")
            ->excludes(config);
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--grid-scale", flags.grid_scale, "multiplies both grid resolutions")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--strict", flags.strict, "fail on non-convergence, spill and failed checks");
        sub->add_option("--seed", flags.seed, "seed for randomized checks");
    };
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const CommonFlags&);
    };
    const Command commands[] = {
        {"averaging", "compare lambda_F, lambda_P and lambda_g", averaging},
        {"convexity", "lambda_F along the theta-blend of two models", convexity},
        {"phase-sweep", "lambda(phi) for phase-shifted death rates against lambda_u", phase_sweep},
        {"antiphase", "periodic versus averaged antiphase gating", antiphase},
        {"oracle-check", "analytic, characteristic-equation, matrix and Kingman oracles",
         oracle_check},
    };
    int code = 0;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        add_common(sub);
        sub->callback([&code, &flags, run = cmd.run] {
            try {
                code = run(flags);
            } catch (const cellcycle::Error& e) {
                std::cerr << "error: " << e.what() << '\n';
                code = 2;
            }
        });
    }
    CLI11_PARSE(app, argc, argv);
    return code;
}
