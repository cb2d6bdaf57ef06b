#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ffc/grid.hpp"
#include "ffc/mpc.hpp"
#include "ffc/mplp.hpp"
#include "ffc/textio.hpp"

namespace ffc {

struct Disturbance {
    double t = 1.0;         // s
    int bus = 0;            // 0-based
    double dp_mw = 0.0;     // positive = generation deficit
    std::string kind = "load-step";  // or gen-loss
};

struct Scenario {
    std::string name = "scenario";
    std::string case_path;           // empty = bundled case
    std::string fidelity = "reduced";  // reduced | detailed-vsc
    std::string controller = "none";   // none | decentralized | decentralized-explicit | centralized
    std::vector<Disturbance> disturbances;
    double t_end = 10.0;
    double dt = 0.005;
    double record_dt = 0.0;  // 0 = every plant step
    double rocof_window = 0.25;
    MpcConfig mpc;
    std::string law_path;    // explicit law for decentralized-explicit (generated when empty)
    std::string output_dir;  // relative to the output root unless absolute
    std::uint64_t seed = 0;
    bool reference_run = false;  // also simulate without FFC for the figure data

    void validate(const GridCase& grid) const;  // throws std::invalid_argument
};

Scenario scenario_from_document(const text::Document& doc, const std::string& base_dir = "");
Scenario load_scenario(const std::string& path);

struct Summary {
    double nadir = 50.0;      // Hz, lowest unit frequency
    double zenith = 50.0;     // Hz, highest unit frequency
    double max_rocof = 0.0;   // Hz/s, windowed
    bool shed = false;
    double effort = 0.0;      // p.u., sum of |setpoint moves|
    std::vector<double> unit_nadir;
};

struct ScenarioResult {
    std::string name, controller, fidelity;
    std::vector<std::string> unit_names;    // vsc1..., sg1...
    std::vector<std::string> branch_names;  // flow_a_b
    int n_c = 0;
    std::vector<double> t;
    std::vector<Vec> f, rocof, rocof_inst, p, q, soc, v_dc, i_dc, flows, dp;
    std::vector<double> f_min_reference;  // worst unit frequency without FFC, if computed
    std::vector<ControllerEvent> events;
    std::vector<double> estimate_mw;       // decentralized: first-activation estimate per converter (NaN if never triggered)
    std::vector<double> estimate_total_mw; // accumulated over re-activations
    Summary summary;
    double runtime_s = 0.0;
};

// Load-shed criterion: any frequency outside 50 +- 0.5 Hz or any windowed
// |RoCoF| above 1 Hz/s (1e-6 tolerance).
bool shed_flag(double nadir, double zenith, double max_rocof, double f0 = 50.0);
Summary summarize(const ScenarioResult& r);

ScenarioResult run(const Scenario& sc, const GridCase& grid);
ScenarioResult run(const Scenario& sc);  // loads the case

struct SweepSpec {
    std::vector<int> buses;  // 1-based, as in the case file
    std::vector<double> dp_mw;  // one per bus, or a single value for all
    std::vector<std::string> controllers;
};
SweepSpec load_sweep(const std::string& path);
SweepSpec sweep_from_document(const text::Document& doc);

struct SweepRow {
    int bus = 0;
    double dp_mw = 0.0;
    std::string controller;
    bool ok = false;
    std::string error;
    Summary summary;
    std::vector<double> estimate_mw;
};

std::vector<SweepRow> run_matrix(const Scenario& tmpl, const SweepSpec& spec, const GridCase& grid,
                                 const std::string& out_dir = "");
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Writes traces.csv, events.csv, summary.csv and fig_*.csv into dir.
void export_result(const ScenarioResult& r, const std::string& dir);
// Re-reads traces.csv written by export_result.
ScenarioResult import_traces(const std::string& path);

// Output root: $FFC_OUTPUT_ROOT or "./ffc_out".
std::string output_root();

// Reads a CSV with a header row into columns. Throws on ragged rows.
using text::CsvTable;
using text::read_csv;

}  // namespace ffc
