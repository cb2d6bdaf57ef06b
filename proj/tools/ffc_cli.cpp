// Command-line front end: run, sweep, fit, explain, mplp.

#include <CLI11.hpp>

#include <algorithm>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "ffc/coi.hpp"
#include "ffc/mpc.hpp"
#include "ffc/mplp.hpp"
#include "ffc/reduced.hpp"
#include "ffc/scenario.hpp"
#include "ffc/sysid.hpp"

namespace fs = std::filesystem;
using namespace ffc;

namespace {

struct Overrides {
    std::string controller, fidelity, output;
    std::uint64_t seed = 0;
    bool has_seed = false;
};

void apply(Scenario& sc, const Overrides& o) {
    if (!o.controller.empty()) sc.controller = o.controller;
    if (!o.fidelity.empty()) {
        if (o.fidelity == "detailed-vsc" && sc.fidelity != o.fidelity && sc.dt > 1e-3) {
            sc.dt = 1e-4;
            if (sc.record_dt <= 0.0) sc.record_dt = 0.005;
        }
        sc.fidelity = o.fidelity;
    }
    if (o.has_seed) sc.seed = o.seed;
}

std::string resolve_out(const std::string& explicit_dir, const std::string& name) {
    if (!explicit_dir.empty()) return explicit_dir;
    return (fs::path(output_root()) / name).string();
}

void print_summary(const ScenarioResult& r) {
    const auto& s = r.summary;
    std::printf("%s  controller=%s  fidelity=%s\n", r.name.c_str(), r.controller.c_str(), r.fidelity.c_str());
    std::printf("  nadir %.4f Hz  zenith %.4f Hz  max |RoCoF| %.4f Hz/s  effort %.4f p.u.  load shed %s\n", s.nadir,
                s.zenith, s.max_rocof, s.effort, s.shed ? "yes" : "no");
    for (std::size_t i = 0; i < r.estimate_mw.size(); ++i)
        std::printf("  vsc%zu disturbance estimate %.1f MW\n", i + 1, r.estimate_mw[i]);
    std::printf("  %zu controller events, %.2f s wall time\n", r.events.size(), r.runtime_s);
}

int cmd_run(const std::string& path, const Overrides& o) {
    Scenario sc = load_scenario(path);
    apply(sc, o);
    const ScenarioResult r = run(sc);
    const std::string dir = resolve_out(o.output, sc.output_dir);
    export_result(r, dir);
    print_summary(r);
    std::printf("  outputs in %s\n", dir.c_str());
    return 0;
}

int cmd_sweep(const std::string& tmpl_path, const std::string& sweep_path, const Overrides& o) {
    Scenario tmpl = load_scenario(tmpl_path);
    apply(tmpl, o);
    SweepSpec spec = load_sweep(sweep_path);
    if (!o.controller.empty()) spec.controllers = {o.controller};
    const GridCase grid = load_case(tmpl.case_path.empty() ? bundled_case_path() : tmpl.case_path);
    const std::string dir = resolve_out(o.output, "sweep");
    const auto rows = run_matrix(tmpl, spec, grid, dir);
    write_sweep_csv(rows, (fs::path(dir) / "sweep.csv").string());
    int failed = 0;
    for (const auto& r : rows) {
        if (!r.ok) {
            ++failed;
            std::printf("bus %2d %-24s failed: %s\n", r.bus, r.controller.c_str(), r.error.c_str());
            continue;
        }
        std::printf("bus %2d %-24s nadir %.4f Hz  max |RoCoF| %.4f Hz/s  shed %s", r.bus, r.controller.c_str(),
                    r.summary.nadir, r.summary.max_rocof, r.summary.shed ? "yes" : "no");
        if (!r.estimate_mw.empty()) {
            std::printf("  estimates");
            for (double e : r.estimate_mw) std::printf(" %.0f", e);
            std::printf(" MW");
        }
        std::printf("\n");
    }
    std::printf("sweep table in %s\n", (fs::path(dir) / "sweep.csv").string().c_str());
    return failed ? 1 : 0;
}

IdParams default_init() {
    const GridCase g = load_case(bundled_case_path());
    const CoiParams c = coi_for_case(g);
    IdParams p;
    p.wn = c.omega_n();
    p.zeta = c.zeta();
    p.g = 1.0 / (c.M * c.T);
    p.h = 1.0 / c.M;
    return p;
}

int cmd_fit(const std::string& path, const std::vector<double>& init, bool no_gain, double noise, const Overrides& o) {
    IdDataset d = read_dataset_csv(path);
    if (noise > 0.0) {
        double peak = 0.0;
        for (double v : d.df) peak = std::max(peak, std::abs(v));
        std::mt19937_64 rng(o.seed);
        std::normal_distribution<double> n(0.0, noise * peak);
        for (double& v : d.df) v += n(rng);
    }
    IdParams p0 = default_init();
    if (!init.empty()) {
        if (init.size() != 4) throw std::invalid_argument("--init expects wn,zeta,g,h");
        p0.wn = init[0];
        p0.zeta = init[1];
        p0.g = init[2];
        p0.h = init[3];
    }
    FitOptions fo;
    fo.fit_gain = !no_gain;
    const FitReport r = pem_fit(d, p0, {}, fo);
    std::printf("samples %zu  Ts %.4g s\n", d.df.size(), d.Ts);
    std::printf("wn %.6g rad/s  zeta %.6g  g %.6g  h %.6g  K [%.4g, %.4g]\n", r.params.wn, r.params.zeta, r.params.g,
                r.params.h, r.params.K(0), r.params.K(1));
    std::printf("implied M %.5g s  T %.5g s  D+R_g %.5g\n", 1.0 / r.params.h, r.params.h / r.params.g,
                r.params.wn * r.params.wn / r.params.g);
    std::printf("prediction RMSE %.3f %% of peak  simulation RMSE %.3f %%  iterations %d  predictor radius %.6f\n",
                r.rmse_pct, simulation_rmse_pct(r.params, d), r.iterations, r.predictor_radius);
    std::printf("%s\n", r.message.c_str());
    return r.stable ? 0 : 1;
}

int cmd_explain(const std::string& path) {
    const GridCase g = load_case(path.empty() ? bundled_case_path() : path);
    const MultiMachineSS m = assemble(g);
    std::printf("buses %d  branches %d  converters %d  synchronous machines %d\n", m.n_n, m.n_b, m.n_c, m.n_g);
    std::printf("states %d  inputs %d  outputs %d\n", m.ss.nx(), m.ss.nu(), m.ss.ny());
    const CoiParams c = coi_for_case(g);
    std::printf("aggregate model: M %.5g  D %.5g  R_g %.5g  T %.4g  power base %.4g p.u.  wn %.5g rad/s  zeta %.5g\n",
                c.M, c.D, c.R_g, c.T, c.power_base, c.omega_n(), c.zeta());
    Eigen::EigenSolver<Mat> es(m.ss.A);
    std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() > b.real() || (a.real() == b.real() && a.imag() > b.imag()); });
    std::printf("eigenvalues:\n");
    for (const auto& e : ev) std::printf("  % .6e %+.6e j\n", e.real(), e.imag());
    return 0;
}

int cmd_mplp(const std::string& path, const std::string& out, int vsc_index, const Overrides& o) {
    Scenario sc = load_scenario(path);
    apply(sc, o);
    const GridCase g = load_case(sc.case_path.empty() ? bundled_case_path() : sc.case_path);
    if (vsc_index < 1 || vsc_index > static_cast<int>(g.vscs.size()))
        throw std::invalid_argument("--vsc must be between 1 and " + std::to_string(g.vscs.size()));
    const auto& v = g.vscs[vsc_index - 1];
    const CoiParams coi = coi_for_case(g);
    const LinearSS cd = discretize_zoh(coi_state_space(coi), sc.mpc.Ts);
    const LpStandard lp = build_decentralized(cd, coi, v, sc.mpc, g.S_base);
    Vec lo, hi;
    dec_param_box(coi, v, lo, hi);
    MplpReport rep;
    const PwaLaw law = solve_mplp(lp, dec_first_move_map(sc.mpc), lo, hi, {}, &rep);
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    save_law(law, out);
    std::printf("regions %d  LP solves %d  degenerate skips %d  %.2f s%s\n", rep.regions, rep.lp_solves,
                rep.degenerate_skips, rep.seconds, rep.budget_exhausted ? "  (budget exhausted)" : "");
    std::printf("law written to %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fast frequency control simulator"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--controller", o.controller, "none, decentralized, decentralized-explicit or centralized")
            ->check(CLI::IsMember({"none", "decentralized", "decentralized-explicit", "centralized"}));
        s->add_option("--fidelity", o.fidelity, "reduced or detailed-vsc")
            ->check(CLI::IsMember({"reduced", "detailed-vsc"}));
        s->add_option("--output", o.output, "output directory (default: $FFC_OUTPUT_ROOT/<name>)");
        s->add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.has_seed = true; });
    };

    std::string scenario_path, sweep_path, dataset_path, case_path, law_out;
    std::vector<double> init;
    bool no_gain = false;
    double noise = 0.0;
    int vsc_index = 1;

    auto* run_cmd = app.add_subcommand("run", "run one scenario");
    run_cmd->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    add_common(run_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "run a disturbance-location sweep");
    sweep_cmd->add_option("template", scenario_path)->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("sweep", sweep_path)->required()->check(CLI::ExistingFile);
    add_common(sweep_cmd);

    auto* fit_cmd = app.add_subcommand("fit", "identify the aggregate frequency model from a dataset");
    fit_cmd->add_option("dataset", dataset_path, "CSV with columns t, df_hz, dp_pu")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--init", init, "initial wn,zeta,g,h")->delimiter(',');
    fit_cmd->add_flag("--no-gain", no_gain, "keep the predictor gain at zero");
    fit_cmd->add_option("--noise", noise, "add Gaussian noise, fraction of peak |df|")->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--seed", o.seed, "noise seed");

    auto* explain_cmd = app.add_subcommand("explain", "print model dimensions and eigenvalues");
    explain_cmd->add_option("case", case_path, "case file (default: bundled 39-bus case)");

    auto* mplp_cmd = app.add_subcommand("mplp", "compute and save the explicit decentralized law");
    mplp_cmd->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    mplp_cmd->add_option("--emit-law", law_out, "output law file")->required();
    mplp_cmd->add_option("--vsc", vsc_index, "converter whose parameters define the law (1-based)");
    add_common(mplp_cmd);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return cmd_run(scenario_path, o);
        if (*sweep_cmd) return cmd_sweep(scenario_path, sweep_path, o);
        if (*fit_cmd) return cmd_fit(dataset_path, init, no_gain, noise, o);
        if (*explain_cmd) return cmd_explain(case_path);
        if (*mplp_cmd) return cmd_mplp(scenario_path, law_out, vsc_index, o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
