// gravtop command-line front end: run, sweep, validate, export.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/os.h>

#include "gravtop/config.hpp"
#include "gravtop/error.hpp"
#include "gravtop/field_io.hpp"
#include "gravtop/optimizer.hpp"

namespace fs = std::filesystem;
using namespace gravtop;

namespace {

struct ProblemFlags {
    std::string config_path;
    std::string problem;
    std::vector<std::string> sets;
    std::optional<int> iters;
    std::optional<std::string> out;
    std::optional<int> every;
    bool serial = false;
    bool no_g2 = false;
    std::optional<double> kappa;
    std::optional<double> vf;
    std::optional<double> eta_gamma;
    std::optional<double> beta_gamma;
    std::optional<double> filter_mult;
    std::optional<double> threshold;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON run configuration (see docs/config.md)");
        app->add_option("--problem", problem, "builtin problem name");
        app->add_option("--set", sets, "override, key=value with a dotted key (repeatable)");
        app->add_option("--iters", iters, "number of MMA iterations");
        app->add_option("--out", out, "output directory");
        app->add_option("--every", every, "write density_###.field every k iterations (0 = never)");
        app->add_flag("--serial", serial, "disable parallel assembly");
        app->add_flag("--no-g2", no_g2, "drop the mass constraint g2");
        app->add_option("--kappa", kappa, "external load factor");
        app->add_option("--vf", vf, "permitted volume fraction");
        app->add_option("--eta-gamma", eta_gamma, "mass density threshold eta_gamma");
        app->add_option("--beta-gamma", beta_gamma, "mass density steepness beta_gamma");
        app->add_option("--filter-mult", filter_mult, "filter radius in units of the largest element edge");
        app->add_option("--threshold", threshold, "solid threshold for volumetric output");
    }

    RunConfig resolve() const {
        if (!config_path.empty() && !problem.empty()) throw ConfigError("give either --config or --problem, not both");
        RunConfig cfg = !config_path.empty() ? load_config(config_path)
                                             : default_config(problem.empty() ? "arch2d_coarse" : problem);
        std::vector<std::string> all = sets;
        auto num = [](double v) { return fmt::format("{}", v); };
        if (iters) all.push_back(fmt::format("run.n_iter={}", *iters));
        if (out) all.push_back(fmt::format("output.dir=\"{}\"", *out));
        if (every) all.push_back(fmt::format("output.every={}", *every));
        if (serial) all.push_back("run.parallel=false");
        if (no_g2) all.push_back("g2_enabled=false");
        if (kappa) all.push_back("kappa=" + num(*kappa));
        if (vf) all.push_back("vf_star=" + num(*vf));
        if (eta_gamma) all.push_back("mass.eta_g=" + num(*eta_gamma));
        if (beta_gamma) all.push_back("mass.beta_g=" + num(*beta_gamma));
        if (filter_mult) all.push_back("filter_mult=" + num(*filter_mult));
        if (threshold) all.push_back("output.threshold=" + num(*threshold));
        return all.empty() ? cfg : apply_overrides(cfg, all);
    }
};

void ensure_writable_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = fs::path(dir) / ".gravtop_write_probe";
    std::ofstream f(probe);
    if (ec || !f) throw ConfigError(fmt::format("output directory '{}' is not writable", dir));
    f.close();
    fs::remove(probe, ec);
}

void write_history(const std::string& path, const std::vector<IterationRecord>& history) {
    auto out = fmt::output_file(path);
    out.print("iter,f0_Nm,vol_frac,g1,g2,beta,max_change\n");
    for (const auto& r : history)
        out.print("{},{},{},{},{},{},{}\n", r.iter, r.f0, r.vol_frac, r.g1, r.g2, r.beta, r.max_change);
}

void write_image(const std::string& dir, const DensityField& field, double threshold) {
    if (field.dim == 2)
        write_png((fs::path(dir) / "final.png").string(), field);
    else
        write_vtk((fs::path(dir) / "final.vtk").string(), field, threshold);
}

struct RunSummary {
    double f0 = 0.0;
    double vol_frac = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double grey_fraction = 0.0;
    int iterations = 0;
};

RunSummary execute(const RunConfig& cfg, bool verbose) {
    ensure_writable_dir(cfg.output_dir);
    {
        std::ofstream f(fs::path(cfg.output_dir) / "config.json");
        f << dump_config(cfg);
    }
    for (const auto& w : warnings(cfg.problem)) std::cerr << "warning: " << w << '\n';

    const Mesh mesh = build_mesh(cfg.problem.mesh);
    auto callback = [&](const IterationRecord& r, const FieldChain& chain) {
        if (verbose)
            fmt::print("it {:4d}  f0 {:.6e}  vf {:.4f}  g1 {:+.3e}  g2 {:+.3e}  beta {:g}  change {:.4f}\n", r.iter, r.f0,
                       r.vol_frac, r.g1, r.g2, r.beta, r.max_change);
        if (cfg.every > 0 && r.iter % cfg.every == 0) {
            const auto path = fs::path(cfg.output_dir) / fmt::format("density_{:03d}.field", r.iter);
            write_field(path.string(), DensityField::from_mesh(mesh, chain.x_bar()));
        }
    };
    const RunResult res = run(cfg.problem, cfg.options, callback);

    write_history((fs::path(cfg.output_dir) / "history.csv").string(), res.history);
    const DensityField field = DensityField::from_mesh(mesh, res.x_bar);
    write_field((fs::path(cfg.output_dir) / "final_density.field").string(), field);
    write_image(cfg.output_dir, field, cfg.threshold);

    RunSummary s;
    const auto& last = res.history.back();
    s.f0 = last.f0;
    s.vol_frac = last.vol_frac;
    s.g1 = last.g1;
    s.g2 = last.g2;
    s.iterations = static_cast<int>(res.history.size());
    s.grey_fraction =
        static_cast<double>(std::count_if(res.x_bar.begin(), res.x_bar.end(), [](double v) { return v > 0.05 && v < 0.95; })) /
        static_cast<double>(res.x_bar.size());
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, sep);)
        if (!t.empty()) out.push_back(t);
    return out;
}

int cmd_run(const ProblemFlags& flags, bool dump_only) {
    const RunConfig cfg = flags.resolve();
    if (dump_only) {
        std::cout << dump_config(cfg);
        return 0;
    }
    const RunSummary s = execute(cfg, true);
    fmt::print("done: f0 {:.6e} N m, vol_frac {:.4f}, g1 {:+.3e}, g2 {:+.3e}, grey {:.4f}, output in {}\n", s.f0,
               s.vol_frac, s.g1, s.g2, s.grey_fraction, cfg.output_dir);
    return 0;
}

int cmd_sweep(const ProblemFlags& flags, const std::string& param, const std::string& values, int jobs) {
    const RunConfig base = flags.resolve();
    const auto items = split(values, ',');
    if (items.empty()) throw ConfigError("--values is empty");

    struct Point {
        std::string label;
        RunConfig cfg;
        RunSummary summary;
        std::string error;
    };
    std::vector<Point> points;
    for (const auto& item : items) {
        std::vector<std::string> sets;
        if (param == "vf") {
            sets.push_back("vf_star=" + item);
        } else if (param == "kappa") {
            sets.push_back("kappa=" + item);
        } else if (param == "mass") {
            const auto pair = split(item, ':');
            if (pair.size() != 2) throw ConfigError(fmt::format("mass sweep value '{}' must be eta:beta", item));
            sets.push_back("mass.eta_g=" + pair[0]);
            sets.push_back("mass.beta_g=" + pair[1]);
        } else {
            throw ConfigError(fmt::format("unknown sweep parameter '{}' (vf, kappa, mass)", param));
        }
        const std::string label = fmt::format("{}_{}", param, item);
        sets.push_back(fmt::format("output.dir=\"{}\"", (fs::path(base.output_dir) / label).string()));
        if (jobs > 1) sets.push_back("run.parallel=false");
        points.push_back({label, apply_overrides(base, sets), {}, {}});
    }
    ensure_writable_dir(base.output_dir);

    std::atomic<std::size_t> next{0};
    std::mutex print_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                points[i].summary = execute(points[i].cfg, false);
            } catch (const Error& e) {
                points[i].error = fmt::format("kind={} {}", e.kind(), e.what());
            }
            std::lock_guard lock(print_mutex);
            fmt::print("finished {}{}\n", points[i].label, points[i].error.empty() ? "" : " (failed)");
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    auto csv = fmt::output_file((fs::path(base.output_dir) / "summary.csv").string());
    csv.print("point,f0_Nm,vol_frac,g1,g2,grey_fraction,status\n");
    fmt::print("{:<22} {:>14} {:>9} {:>11} {:>11} {:>7}\n", "point", "f0 [N m]", "vol_frac", "g1", "g2", "grey");
    int failures = 0;
    for (const auto& p : points) {
        const auto& s = p.summary;
        if (!p.error.empty()) {
            ++failures;
            fmt::print("{:<22} error: {}\n", p.label, p.error);
            csv.print("{},,,,,,error\n", p.label);
            continue;
        }
        fmt::print("{:<22} {:>14.6e} {:>9.4f} {:>+11.3e} {:>+11.3e} {:>7.4f}\n", p.label, s.f0, s.vol_frac, s.g1, s.g2,
                   s.grey_fraction);
        csv.print("{},{},{},{},{},{},ok\n", p.label, s.f0, s.vol_frac, s.g1, s.g2, s.grey_fraction);
    }
    if (failures > 0) throw AnalysisError(fmt::format("{} of {} sweep points failed", failures, points.size()));
    return 0;
}

// Finite-difference gradient check and basic property checks on a
// downscaled copy of the problem.
int cmd_validate(const ProblemFlags& flags, int samples, unsigned seed) {
    RunConfig cfg = flags.resolve();
    ProblemSpec spec = cfg.problem;
    spec.mesh.nel = spec.mesh.dim == 2 ? std::array<int, 3>{6, 4, 1} : std::array<int, 3>{4, 4, 4};
    spec.mesh.void_boxes.clear();
    spec.mesh.solid_boxes.clear();
    Model model(spec, cfg.options.solver, false);
    const Mesh& mesh = model.mesh();

    bool ok = true;
    auto report = [&](const std::string& name, bool pass, const std::string& detail) {
        ok = ok && pass;
        fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
    };

    double row_err = 0.0;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_elements());
    row_err = (model.filter().apply(ones) - ones).cwiseAbs().maxCoeff();
    report("filter rows sum to one", row_err <= 1e-12, fmt::format("max deviation {:.3e}", row_err));

    const Eigen::VectorXd solid = Eigen::VectorXd::Ones(mesh.num_elements());
    const double total = model.fe().gravity_load(spec.mass, solid).sum();
    const double expect = mesh.volume() * spec.mass.density(1.0) * kGravity;
    report("gravity load total", std::abs(total - expect) <= 1e-9 * std::abs(expect),
           fmt::format("{:.6f} N (expected {:.6f} N)", total, expect));

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    const double beta = 2.0;
    const double h = 1e-6;
    double worst[3] = {0.0, 0.0, 0.0};
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd x(mesh.num_elements());
        for (auto& v : x) v = dist(rng);
        const Evaluation ev = model.evaluate(x, beta);
        Eigen::VectorXd fd[3] = {Eigen::VectorXd(x.size()), Eigen::VectorXd(x.size()), Eigen::VectorXd(x.size())};
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const Evaluation a = model.evaluate(xp, beta);
            const Evaluation b = model.evaluate(xm, beta);
            fd[0][i] = (a.f0 - b.f0) / (2 * h);
            fd[1][i] = (a.g1 - b.g1) / (2 * h);
            fd[2][i] = (a.g2 - b.g2) / (2 * h);
        }
        const Eigen::VectorXd* an[3] = {&ev.grad.d_f0_dx, &ev.grad.d_g1_dx, &ev.grad.d_g2_dx};
        for (int k = 0; k < 3; ++k) {
            const double scale = an[k]->cwiseAbs().maxCoeff();
            worst[k] = std::max(worst[k], (fd[k] - *an[k]).cwiseAbs().maxCoeff() / std::max(scale, 1e-300));
        }
    }
    const char* names[3] = {"f0", "g1", "g2"};
    for (int k = 0; k < 3; ++k)
        report(fmt::format("gradient of {} vs central differences", names[k]), worst[k] <= 1e-4,
               fmt::format("max relative error {:.3e} over {} designs", worst[k], samples));
    if (!ok) throw AnalysisError("validation failed");
    return 0;
}

int cmd_export(const std::string& input, const std::string& png, const std::string& vtk, double threshold) {
    const DensityField field = read_field(input);
    if (png.empty() && vtk.empty()) throw ConfigError("export needs --png and/or --vtk");
    if (!png.empty()) write_png(png, field);
    if (!vtk.empty()) write_vtk(vtk, field, threshold);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gravtop: topology optimization under self-weight"};
    app.require_subcommand(1);

    ProblemFlags run_flags, sweep_flags, validate_flags;
    bool dump_only = false;
    auto* run_cmd = app.add_subcommand("run", "run one optimization");
    run_flags.attach(run_cmd);
    run_cmd->add_flag("--dump-config", dump_only, "print the resolved configuration and exit");

    std::string param = "vf", values;
    int jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid and print a summary table");
    sweep_flags.attach(sweep_cmd);
    sweep_cmd->add_option("--param", param, "vf, kappa or mass")->check(CLI::IsMember({"vf", "kappa", "mass"}));
    sweep_cmd->add_option("--values", values, "comma separated values; eta:beta pairs for mass")->required();
    sweep_cmd->add_option("--jobs", jobs, "grid points run concurrently")->check(CLI::PositiveNumber);

    int samples = 5;
    unsigned seed = 7;
    auto* validate_cmd = app.add_subcommand("validate", "finite-difference gradient and property checks");
    validate_flags.attach(validate_cmd);
    validate_cmd->add_option("--samples", samples, "random designs for the gradient check");
    validate_cmd->add_option("--seed", seed, "random seed");

    std::string input, png, vtk;
    double threshold = 0.90;
    auto* export_cmd = app.add_subcommand("export", "convert a density field to PNG or VTK");
    export_cmd->add_option("--input", input, "density .field file")->required();
    export_cmd->add_option("--png", png, "PNG output path (2D fields)");
    export_cmd->add_option("--vtk", vtk, "legacy VTK output path");
    export_cmd->add_option("--threshold", threshold, "solid threshold for the VTK mask");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: kind=usage " << e.what() << '\n';
        return 2;
    }

    try {
        if (*run_cmd) return cmd_run(run_flags, dump_only);
        if (*sweep_cmd) return cmd_sweep(sweep_flags, param, values, jobs);
        if (*validate_cmd) return cmd_validate(validate_flags, samples, seed);
        if (*export_cmd) return cmd_export(input, png, vtk, threshold);
    } catch (const Error& e) {
        std::cerr << "error: kind=" << e.kind() << ' ' << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: kind=io " << e.what() << '\n';
        return 1;
    }
    return 0;
}
