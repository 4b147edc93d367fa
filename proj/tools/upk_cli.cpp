// upk: run, sweep and verify ultra-parabolic problems described by a config file.
//
// Exit codes: 0 success, 1 invalid config or arguments, 2 NaN abort, 3 failed check.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "upk/errors.hpp"
#include "upk/io.hpp"
#include "upk/solver.hpp"
#include "upk/verify.hpp"

namespace fs = std::filesystem;
using namespace upk;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitNaN = 2;
constexpr int kExitCheckFailed = 3;

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw ValidationError("bad value '" + item + "' in --values");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("--values is empty");
    return out;
}

Trajectory run_mode(const Config& cfg, const std::string& mode) {
    const ProblemSpec& p = cfg.spec;
    if (mode == "regularized") return solve_regularized(p, cfg.grid, cfg.epsilon, p.delay_width, cfg.run);
    if (mode == "entropy") return solve_entropy(p, cfg.grid, p.delay_width, cfg.run);
    return solve_impulsive(p, cfg.grid, cfg.run);
}

std::string default_mode(const Config& cfg) {
    if (cfg.epsilon > 0.0) return "regularized";
    if (cfg.spec.is_impulsive()) return "impulsive";
    return "entropy";
}

void print_report(const VerificationReport& r) {
    std::printf("%-22s %-4s measured %.6e  bound %.6e  margin %+.3e", r.name.c_str(), r.pass ? "pass" : "FAIL",
                r.measured, r.bound, r.margin());
    if (!r.note.empty()) std::printf("  (%s)", r.note.c_str());
    std::printf("\n");
}

int cmd_run(const std::string& config, std::string mode, const std::string& out) {
    const Config cfg = load_config(config);
    if (mode.empty()) mode = default_mode(cfg);
    const Trajectory traj = run_mode(cfg, mode);
    const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    write_trajectory(dir, traj);
    std::printf("mode %s  flux %s  dt %.6e  steps %d  M %.6f\n", mode.c_str(), to_string(traj.flux).c_str(),
                traj.grid.dt, traj.grid.nt, traj.bound);
    std::printf("%8s %12s %14s %14s\n", "step", "t", "sup|u|", "energy");
    for (const Snapshot& s : traj.snapshots) {
        const double e = s.field.l2_norm_sq() + s.grad_x_sq + traj.epsilon * s.grad_s_sq;
        std::printf("%8d %12.6f %14.6e %14.6e\n", s.step, s.field.t, s.field.sup_norm(), e);
    }
    std::printf("wrote %zu snapshots to %s\n", traj.snapshots.size(), dir.string().c_str());
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& param, const std::string& values, const std::string& out,
              int jobs) {
    const Config cfg = load_config(config);
    const std::vector<double> vals = parse_values(values);
    RunOptions opts = cfg.run;
    opts.jobs = std::max(1, jobs);
    const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    fs::create_directories(dir);

    VerificationReport report;
    std::ofstream csv(dir / "sweep.csv");
    if (param == "gamma") {
        const GammaLimitResult res = check_gamma_limit(cfg.spec, cfg.grid, vals, opts);
        csv << "gamma,error\n";
        for (std::size_t i = 0; i < res.gammas.size(); ++i) csv << res.gammas[i] << "," << res.errors[i] << "\n";
        std::printf("%12s %14s\n", "gamma", "e_gamma");
        for (std::size_t i = 0; i < res.gammas.size(); ++i) std::printf("%12.6g %14.6e\n", res.gammas[i], res.errors[i]);
        report = res.report;
    } else {
        const ViscosityLimitResult res = check_viscosity_limit(cfg.spec, cfg.grid, vals, opts);
        csv << "epsilon,to_entropy,to_next\n";
        std::printf("%12s %14s %14s\n", "epsilon", "|u_e - u_0|", "|u_next - u_e|");
        for (std::size_t i = 0; i < res.epsilons.size(); ++i) {
            const bool has_next = i < res.successive.size();
            csv << res.epsilons[i] << "," << res.to_entropy[i] << ",";
            if (has_next) csv << res.successive[i];
            csv << "\n";
            std::printf("%12.6g %14.6e ", res.epsilons[i], res.to_entropy[i]);
            if (has_next) std::printf("%14.6e", res.successive[i]);
            std::printf("\n");
        }
        report = res.report;
    }
    write_report_csv(dir / "report.csv", {report});
    print_report(report);
    return report.pass ? 0 : kExitCheckFailed;
}

int cmd_verify(const std::string& config, const std::string& traj_dir, const std::string& traj2_dir) {
    const Config cfg = load_config(config);
    const Trajectory traj = read_trajectory(traj_dir);
    if (!traj.grid.same_mesh(cfg.grid)) throw GridMismatch("trajectory mesh differs from the config grid");

    std::vector<VerificationReport> reports;
    reports.push_back(check_max_principle(traj, cfg.spec));
    if (traj.mode != SolveMode::Regularized) {
        const auto ks = kruzhkov_bank(traj, cfg.spec);
        reports.push_back(check_entropy_residual(traj, cfg.spec, ks));
        reports.push_back(check_bln(traj, cfg.spec, ks));
    }
    if (traj.mode == SolveMode::Impulsive && traj.crosses_tau())
        for (auto& r : check_jump(traj, cfg.spec)) reports.push_back(std::move(r));
    if (!traj2_dir.empty()) {
        const Trajectory other = read_trajectory(traj2_dir);
        reports.push_back(check_stability(traj, other, cfg.spec, cfg.spec));
    }

    for (const auto& r : reports) print_report(r);
    write_report_csv(cfg.report_path, reports);
    std::printf("report written to %s\n", cfg.report_path.c_str());
    const bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
    return ok ? 0 : kExitCheckFailed;
}

int cmd_validate_flux(const std::string& config) {
    const Config cfg = load_config(config);
    const double half_width = std::max(1.0, predicted_sup_bound(cfg.spec));
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    const GenuineNonlinearityResult res = validate_genuine_nonlinearity(cfg.spec.s_flux, half_width, 256, deltas);
    std::printf("a = %s on [-%.4f, %.4f]\n", cfg.spec.s_flux.print().c_str(), half_width, half_width);
    std::printf("%10s %12s %12s %12s %12s %12s\n", "delta", "min", "q25", "median", "q75", "max");
    for (std::size_t i = 0; i < res.deltas.size(); ++i) {
        std::vector<double> mu = res.mu[i];
        std::sort(mu.begin(), mu.end());
        const auto q = [&](double f) { return mu[std::size_t(f * double(mu.size() - 1))]; };
        std::printf("%10.1e %12.4e %12.4e %12.4e %12.4e %12.4e\n", res.deltas[i], q(0.0), q(0.25), q(0.5), q(0.75),
                    q(1.0));
    }
    print_report(res.report);
    return res.report.pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verifier for ultra-parabolic equations with an impulsive source"};
    app.require_subcommand(1);

    std::string config;
    std::string mode;
    std::string out;
    std::string param;
    std::string values;
    std::string traj;
    std::string traj2;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "solve one problem and write its trajectory");
    run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "regularized | entropy | impulsive")
        ->check(CLI::IsMember({"regularized", "entropy", "impulsive"}));
    run->add_option("--out", out, "trajectory directory");

    auto* sweep = app.add_subcommand("sweep", "gamma or epsilon family with the singular-limit check");
    sweep->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", param, "gamma | epsilon")->required()->check(CLI::IsMember({"gamma", "epsilon"}));
    sweep->add_option("--values", values, "comma-separated, strictly decreasing")->required();
    sweep->add_option("--out", out, "output directory");
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "check a stored trajectory against the estimates");
    verify->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
    verify->add_option("--traj", traj, "trajectory directory")->required()->check(CLI::ExistingDirectory);
    verify->add_option("--traj2", traj2, "second trajectory for the stability check")->check(CLI::ExistingDirectory);

    auto* vflux = app.add_subcommand("validate-flux", "genuine nonlinearity of a(lambda)");
    vflux->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*run) return cmd_run(config, mode, out);
        if (*sweep) return cmd_sweep(config, param, values, out, jobs);
        if (*verify) return cmd_verify(config, traj, traj2);
        return cmd_validate_flux(config);
    } catch (const NaNDetected& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNaN;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}
