#include "ffc/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ffc/plant.hpp"
#include "ffc/reduced.hpp"
#include "ffc/textio.hpp"

namespace ffc {

namespace fs = std::filesystem;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        const auto a = cur.find_first_not_of(" \t");
        const auto b = cur.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cur.substr(a, b - a + 1));
    }
    return out;
}

bool valid_controller(const std::string& c) {
    return c == "none" || c == "decentralized" || c == "decentralized-explicit" || c == "centralized";
}

}  // namespace

void Scenario::validate(const GridCase& grid) const {
    if (fidelity != "reduced" && fidelity != "detailed-vsc")
        throw std::invalid_argument("scenario: fidelity must be reduced or detailed-vsc, got '" + fidelity + "'");
    if (!valid_controller(controller))
        throw std::invalid_argument("scenario: unknown controller '" + controller + "'");
    if (!(t_end > 0.0)) throw std::invalid_argument("scenario: t_end must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
    if (fidelity == "reduced" && dt > mpc.Ts / 10.0 + 1e-15)
        throw std::invalid_argument("scenario: plant step must be at most T_s/10 for the reduced plant");
    if (fidelity == "detailed-vsc" && dt > 1e-3 + 1e-15)
        throw std::invalid_argument("scenario: plant step must be at most 1 ms for the detailed plant");
    if (record_dt < 0.0) throw std::invalid_argument("scenario: record_dt must be non-negative");
    if (!(rocof_window > 0.0)) throw std::invalid_argument("scenario: rocof_window must be positive");
    mpc.validate();
    for (std::size_t i = 0; i < disturbances.size(); ++i) {
        const auto& d = disturbances[i];
        const std::string w = "disturbance " + std::to_string(i + 1) + ": ";
        if (d.bus < 0 || d.bus >= grid.network.n_n) throw std::invalid_argument(w + "bus does not exist");
        if (d.t < 0.0 || d.t > t_end) throw std::invalid_argument(w + "time outside the simulation horizon");
        if (d.kind != "load-step" && d.kind != "gen-loss")
            throw std::invalid_argument(w + "kind must be load-step or gen-loss");
        if (!std::isfinite(d.dp_mw)) throw std::invalid_argument(w + "magnitude must be finite");
    }
}

Scenario scenario_from_document(const text::Document& doc, const std::string& base_dir) {
    for (const auto& t : doc.tables) {
        const bool ok = (t.name.empty() && t.entries.empty()) || (!t.is_array_item && (t.name == "scenario" || t.name == "mpc")) ||
                        (t.is_array_item && t.name == "disturbance");
        if (!ok) throw std::invalid_argument("scenario: unknown section [" + t.name + "] at line " + std::to_string(t.line));
    }
    Scenario sc;
    const text::Table* s = doc.table("scenario");
    if (!s) throw std::invalid_argument("scenario: missing [scenario] section");
    s->require_known({"name", "case", "fidelity", "controller", "t_end", "dt", "record_dt", "rocof_window", "law",
                      "output", "seed", "reference_run"});
    sc.name = s->str_or("name", sc.name);
    const std::string cp = s->str_or("case", "");
    if (!cp.empty() && cp != "bundled") sc.case_path = fs::path(cp).is_absolute() || base_dir.empty() ? cp : (fs::path(base_dir) / cp).string();
    sc.fidelity = s->str_or("fidelity", sc.fidelity);
    sc.controller = s->str_or("controller", sc.controller);
    sc.t_end = s->num_or("t_end", sc.t_end);
    sc.dt = s->num_or("dt", sc.fidelity == "detailed-vsc" ? 1e-4 : sc.dt);
    sc.record_dt = s->num_or("record_dt", sc.fidelity == "detailed-vsc" ? 0.005 : 0.0);
    sc.rocof_window = s->num_or("rocof_window", sc.rocof_window);
    const std::string law = s->str_or("law", "");
    if (!law.empty()) sc.law_path = fs::path(law).is_absolute() || base_dir.empty() ? law : (fs::path(base_dir) / law).string();
    sc.output_dir = s->str_or("output", sc.name);
    const double seed = s->num_or("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed)) throw std::invalid_argument("scenario: seed must be a non-negative integer");
    sc.seed = static_cast<std::uint64_t>(seed);
    sc.reference_run = s->flag_or("reference_run", false);
    for (const text::Table* d : doc.array("disturbance")) {
        d->require_known({"t", "bus", "dp_mw", "kind"});
        Disturbance ds;
        ds.t = d->num_or("t", 1.0);
        ds.bus = d->integer("bus") - 1;
        ds.dp_mw = d->num("dp_mw");
        ds.kind = d->str_or("kind", "load-step");
        sc.disturbances.push_back(ds);
    }
    if (const text::Table* m = doc.table("mpc")) {
        m->require_known({"N", "Ts", "f_lo", "f_hi", "rocof_lo", "rocof_hi", "cp_base", "cp_growth", "C_H", "C_B", "deadband",
                          "trigger_window", "deact_window", "deact_margin", "cen_threshold", "literal_droop",
                          "flow_limits", "predictor"});
        auto& c = sc.mpc;
        if (m->has("N")) c.N = m->integer("N");
        c.Ts = m->num_or("Ts", c.Ts);
        c.f_lo = m->num_or("f_lo", c.f_lo);
        c.f_hi = m->num_or("f_hi", c.f_hi);
        c.r_lo = m->num_or("rocof_lo", c.r_lo);
        c.r_hi = m->num_or("rocof_hi", c.r_hi);
        c.cp_base = m->num_or("cp_base", c.cp_base);
        c.cp_growth = m->num_or("cp_growth", c.cp_growth);
        c.C_H = m->num_or("C_H", c.C_H);
        c.C_B = m->num_or("C_B", c.C_B);
        c.deadband = m->num_or("deadband", c.deadband);
        c.trigger_window = m->num_or("trigger_window", c.trigger_window);
        c.deact_window = m->num_or("deact_window", c.deact_window);
        c.deact_margin = m->num_or("deact_margin", c.deact_margin);
        c.cen_threshold = m->num_or("cen_threshold", c.cen_threshold);
        c.literal_droop = m->flag_or("literal_droop", c.literal_droop);
        c.flow_limits = m->flag_or("flow_limits", c.flow_limits);
        c.predictor = m->str_or("predictor", c.predictor);
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    return scenario_from_document(text::parse_file(path), fs::path(path).parent_path().string());
}

bool shed_flag(double nadir, double zenith, double max_rocof, double f0) {
    return nadir < f0 - 0.5 || zenith > f0 + 0.5 || max_rocof > 1.0 + 1e-6;
}

Summary summarize(const ScenarioResult& r) {
    Summary s;
    if (r.f.empty()) return s;
    const int nu = static_cast<int>(r.f.front().size());
    s.unit_nadir.assign(nu, std::numeric_limits<double>::infinity());
    s.nadir = std::numeric_limits<double>::infinity();
    s.zenith = -std::numeric_limits<double>::infinity();
    for (const auto& f : r.f) {
        for (int u = 0; u < nu; ++u) s.unit_nadir[u] = std::min(s.unit_nadir[u], f(u));
        s.nadir = std::min(s.nadir, f.minCoeff());
        s.zenith = std::max(s.zenith, f.maxCoeff());
    }
    for (const auto& ro : r.rocof) s.max_rocof = std::max(s.max_rocof, ro.cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < r.dp.size(); ++k) {
        const Vec prev = k == 0 ? Vec::Zero(r.dp[k].size()) : r.dp[k - 1];
        s.effort += (r.dp[k] - prev).cwiseAbs().sum();
    }
    s.shed = shed_flag(s.nadir, s.zenith, s.max_rocof);
    return s;
}

namespace {

ScenarioResult run_impl(const Scenario& sc, const GridCase& grid) {
    const auto t0 = std::chrono::steady_clock::now();
    sc.validate(grid);
    const int nc = static_cast<int>(grid.vscs.size());
    const int ng = static_cast<int>(grid.sgs.size());
    const int nu = nc + ng;
    const int nn = grid.network.n_n;
    const double dt = sc.dt;

    MultiMachineSS mm = assemble(grid);
    std::unique_ptr<Plant> plant = make_plant(sc.fidelity, grid, mm, dt);
    const CoiParams coi = coi_for_case(grid);

    ScenarioResult r;
    r.name = sc.name;
    r.controller = sc.controller;
    r.fidelity = sc.fidelity;
    r.n_c = nc;
    for (int i = 0; i < nc; ++i) r.unit_names.push_back("vsc" + std::to_string(i + 1));
    for (int j = 0; j < ng; ++j) r.unit_names.push_back("sg" + std::to_string(j + 1));
    for (const auto& b : grid.network.branches)
        r.branch_names.push_back("flow_" + std::to_string(b.from + 1) + "_" + std::to_string(b.to + 1));

    // Controllers
    std::vector<std::unique_ptr<DecentralizedController>> dec;
    std::vector<PwaLaw> laws;
    std::unique_ptr<CentralizedController> cen;
    MultiMachineSS mmT;
    if (sc.controller == "decentralized" || sc.controller == "decentralized-explicit") {
        const bool expl = sc.controller == "decentralized-explicit";
        if (expl) {
            laws.reserve(nc);
            if (!sc.law_path.empty()) {
                laws.push_back(load_law(sc.law_path));
            } else {
                // One law per distinct converter parameter set.
                std::map<std::vector<double>, int> cache;
                for (int i = 0; i < nc; ++i) {
                    const auto& v = grid.vscs[i];
                    std::vector<double> key = {v.Rp, v.k_p, v.p_c_star, v.p_lim_lo, v.p_lim_hi,
                                               v.soc_lo, v.soc_hi, v.E_b};
                    if (cache.count(key)) continue;
                    const LinearSS cd = discretize_zoh(coi_state_space(coi), sc.mpc.Ts);
                    const LpStandard lp = build_decentralized(cd, coi, v, sc.mpc, grid.S_base);
                    Vec lo, hi;
                    dec_param_box(coi, v, lo, hi);
                    laws.push_back(solve_mplp(lp, dec_first_move_map(sc.mpc), lo, hi));
                    cache[key] = static_cast<int>(laws.size()) - 1;
                }
            }
        }
        std::map<std::vector<double>, int> idx;
        int next = 0;
        for (int i = 0; i < nc; ++i) {
            const auto& v = grid.vscs[i];
            const PwaLaw* law = nullptr;
            if (expl) {
                if (!sc.law_path.empty()) law = &laws.front();
                else {
                    std::vector<double> key = {v.Rp, v.k_p, v.p_c_star, v.p_lim_lo, v.p_lim_hi, v.soc_lo, v.soc_hi, v.E_b};
                    if (!idx.count(key)) idx[key] = next++;
                    law = &laws[idx[key]];
                }
            }
            dec.push_back(std::make_unique<DecentralizedController>(i, v, coi, sc.mpc, grid.S_base, dt, law));
        }
    } else if (sc.controller == "centralized") {
        mmT = mm;
        mmT.ss = discretize_zoh(mm.ss, sc.mpc.Ts);
        cen = std::make_unique<CentralizedController>(mmT, grid, sc.mpc, dt);
    }

    const int steps = static_cast<int>(std::lround(sc.t_end / dt));
    const int rec = sc.record_dt > 0.0 ? std::max(1, static_cast<int>(std::lround(sc.record_dt / dt))) : 1;
    const int w_rocof = std::max(1, static_cast<int>(std::lround(sc.rocof_window / dt)));
    const int w_deact = std::max(1, static_cast<int>(std::lround(sc.mpc.deact_window / dt)));
    const int hist_len = std::max(w_rocof, w_deact) + 1;
    std::vector<Vec> hist;  // ring of recent frequencies
    hist.reserve(hist_len);
    int hist_pos = 0;
    Vec f_start;
    auto past = [&](int k, int lag) -> Vec {
        if (k - lag < 0) return f_start;
        const int n = static_cast<int>(hist.size());
        return hist[((hist_pos - 1 - lag) % n + n) % n];
    };

    Vec uc = Vec::Zero(nc);
    Vec f_last;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        Vec p_l = Vec::Zero(nn);
        for (const auto& d : sc.disturbances)
            if (t >= d.t - 1e-9) p_l(d.bus) -= d.dp_mw / grid.S_base;

        PlantMeasurement m = plant->measure(uc, p_l);
        bool moved = false;
        if (!dec.empty()) {
            for (int i = 0; i < nc; ++i) {
                const double du = dec[i]->step(k, t, m.rocof_int(i), m.f(i), m.soc(i), r.events);
                if (du != 0.0) {
                    uc(i) += du;
                    moved = true;
                }
            }
        } else if (cen) {
            Vec ravg = Vec::Zero(nu);
            if (k > 0) ravg = (m.f - past(k, w_deact - 1)) / sc.mpc.deact_window;
            const Vec du = cen->step(k, t, m.x_reduced, p_l, m.f, m.soc, ravg, r.events);
            if (du.cwiseAbs().maxCoeff() > 0.0) {
                uc += du;
                moved = true;
            }
        }
        if (moved) m = plant->measure(uc, p_l);
        if (k == 0) f_start = m.f;

        // RoCoF over the trailing window; frequency before t = 0 is the initial value.
        const Vec f_w = k == 0 ? f_start : past(k, w_rocof - 1);
        const Vec rocof = (m.f - f_w) / sc.rocof_window;
        const Vec rinst = k == 0 ? Vec::Zero(nu) : Vec((m.f - f_last) / dt);
        f_last = m.f;
        if (static_cast<int>(hist.size()) < hist_len) {
            hist.push_back(m.f);
            hist_pos = static_cast<int>(hist.size()) % hist_len;
        } else {
            hist[hist_pos] = m.f;
            hist_pos = (hist_pos + 1) % hist_len;
        }

        if (k % rec == 0 || k == steps) {
            r.t.push_back(t);
            r.f.push_back(m.f);
            r.rocof.push_back(rocof);
            r.rocof_inst.push_back(rinst);
            r.p.push_back(m.p_vsc);
            r.q.push_back(m.q_vsc);
            r.soc.push_back(m.soc);
            r.v_dc.push_back(m.v_dc);
            r.i_dc.push_back(m.i_dc);
            r.flows.push_back(m.flows);
            r.dp.push_back(uc);
        }
        if (k < steps) plant->advance(uc, p_l);
    }
    for (const auto& d : dec) {
        r.estimate_mw.push_back(d->has_estimate() ? d->first_estimate() * grid.S_base : kNaN);
        r.estimate_total_mw.push_back(d->has_estimate() ? d->estimate() * grid.S_base : kNaN);
    }
    r.summary = summarize(r);
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

ScenarioResult run(const Scenario& sc, const GridCase& grid) {
    ScenarioResult r = run_impl(sc, grid);
    if (sc.reference_run && sc.controller != "none") {
        Scenario ref = sc;
        ref.controller = "none";
        ref.reference_run = false;
        const ScenarioResult rr = run_impl(ref, grid);
        for (const auto& f : rr.f) r.f_min_reference.push_back(f.minCoeff());
    }
    return r;
}

ScenarioResult run(const Scenario& sc) {
    const GridCase grid = load_case(sc.case_path.empty() ? bundled_case_path() : sc.case_path);
    return run(sc, grid);
}

SweepSpec sweep_from_document(const text::Document& doc) {
    const text::Table* t = doc.table("sweep");
    if (!t) throw std::invalid_argument("sweep: missing [sweep] section");
    t->require_known({"buses", "dp_mw", "controllers"});
    SweepSpec s;
    if (t->has("buses"))
        for (double b : t->arr("buses")) {
            if (b != std::floor(b) || b < 1) throw std::invalid_argument("sweep: bus numbers must be positive integers");
            s.buses.push_back(static_cast<int>(b));
        }
    if (t->has("dp_mw")) s.dp_mw = t->arr("dp_mw");
    if (t->has("controllers"))
        for (const auto& c : split(t->str("controllers"), ','))
            if (!c.empty()) s.controllers.push_back(c);
    if (!s.buses.empty() && s.dp_mw.size() != 1 && s.dp_mw.size() != s.buses.size())
        throw std::invalid_argument("sweep: dp_mw must have one entry or one per bus");
    for (const auto& c : s.controllers)
        if (!valid_controller(c)) throw std::invalid_argument("sweep: unknown controller '" + c + "'");
    return s;
}

SweepSpec load_sweep(const std::string& path) { return sweep_from_document(text::parse_file(path)); }

std::vector<SweepRow> run_matrix(const Scenario& tmpl, const SweepSpec& spec, const GridCase& grid,
                                 const std::string& out_dir) {
    std::vector<SweepRow> rows;
    for (std::size_t b = 0; b < spec.buses.size(); ++b) {
        const double dp = spec.dp_mw.size() == 1 ? spec.dp_mw[0] : spec.dp_mw[b];
        for (const auto& c : spec.controllers) {
            SweepRow row;
            row.bus = spec.buses[b];
            row.dp_mw = dp;
            row.controller = c;
            Scenario sc = tmpl;
            sc.controller = c;
            sc.name = "bus" + std::to_string(row.bus) + "-" + c;
            const double td = tmpl.disturbances.empty() ? 1.0 : tmpl.disturbances.front().t;
            sc.disturbances = {Disturbance{td, row.bus - 1, dp, "load-step"}};
            try {
                const ScenarioResult r = run(sc, grid);
                row.ok = true;
                row.summary = r.summary;
                row.estimate_mw = r.estimate_mw;
                if (!out_dir.empty()) export_result(r, (fs::path(out_dir) / sc.name).string());
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char c : s) {
        if (c == '"') o += '"';
        o += c;
    }
    return o + "\"";
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::string num(double v) { return text::format_number(v); }

}  // namespace

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    auto os = open_out(path);
    std::size_t ne = 0;
    for (const auto& r : rows) ne = std::max(ne, r.estimate_mw.size());
    os << "bus,dp_mw,controller,status,nadir_hz,max_rocof_hz_s,effort_pu,shed";
    for (std::size_t i = 0; i < ne; ++i) os << ",estimate_vsc" << i + 1 << "_mw";
    os << ",error\n";
    for (const auto& r : rows) {
        os << r.bus << ',' << num(r.dp_mw) << ',' << r.controller << ',' << (r.ok ? "ok" : "failed") << ','
           << num(r.summary.nadir) << ',' << num(r.summary.max_rocof) << ',' << num(r.summary.effort) << ','
           << (r.summary.shed ? 1 : 0);
        for (std::size_t i = 0; i < ne; ++i) os << ',' << (i < r.estimate_mw.size() ? num(r.estimate_mw[i]) : "nan");
        os << ',' << csv_escape(r.error) << '\n';
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

void export_result(const ScenarioResult& r, const std::string& dir) {
    const fs::path d(dir);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    const int nu = static_cast<int>(r.unit_names.size());
    const int nc = r.n_c;
    const int nb = static_cast<int>(r.branch_names.size());
    const std::size_t K = r.t.size();
    const bool detailed = r.fidelity == "detailed-vsc";
    {
        auto os = open_out(d / "traces.csv");
        os << "t";
        for (const auto& u : r.unit_names) os << ",f_" << u;
        for (const auto& u : r.unit_names) os << ",rocof_" << u;
        for (const auto& u : r.unit_names) os << ",rocof_inst_" << u;
        for (int i = 0; i < nc; ++i) os << ",p_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",q_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",soc_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",v_dc_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",i_dc_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",dp_" << r.unit_names[i];
        for (const auto& b : r.branch_names) os << ',' << b;
        os << '\n';
        for (std::size_t k = 0; k < K; ++k) {
            os << num(r.t[k]);
            for (const auto* v : {&r.f[k], &r.rocof[k], &r.rocof_inst[k], &r.p[k], &r.q[k], &r.soc[k], &r.v_dc[k],
                                  &r.i_dc[k], &r.dp[k], &r.flows[k]})
                for (int i = 0; i < v->size(); ++i) os << ',' << num((*v)(i));
            os << '\n';
        }
        if (!os) throw std::runtime_error("write failed: traces.csv");
    }
    {
        auto os = open_out(d / "events.csv");
        os << "t,unit,kind,detail\n";
        for (const auto& e : r.events) os << num(e.t) << ',' << e.unit << ',' << e.kind << ',' << csv_escape(e.detail) << '\n';
    }
    {
        auto os = open_out(d / "summary.csv");
        os << "name,controller,fidelity,nadir_hz,zenith_hz,max_rocof_hz_s,effort_pu,shed";
        for (std::size_t i = 0; i < r.estimate_mw.size(); ++i) os << ",estimate_vsc" << i + 1 << "_mw";
        for (std::size_t i = 0; i < r.estimate_total_mw.size(); ++i) os << ",estimate_total_vsc" << i + 1 << "_mw";
        for (const auto& u : r.unit_names) os << ",nadir_" << u;
        os << '\n';
        const auto& s = r.summary;
        os << csv_escape(r.name) << ',' << r.controller << ',' << r.fidelity << ',' << num(s.nadir) << ','
           << num(s.zenith) << ',' << num(s.max_rocof) << ',' << num(s.effort) << ',' << (s.shed ? 1 : 0);
        for (double e : r.estimate_mw) os << ',' << num(e);
        for (double e : r.estimate_total_mw) os << ',' << num(e);
        for (double n : s.unit_nadir) os << ',' << num(n);
        os << '\n';
    }
    {
        auto os = open_out(d / "fig_frequency.csv");
        os << "t";
        for (const auto& u : r.unit_names) os << ",f_" << u << "_hz";
        const bool ref = r.f_min_reference.size() == K;
        if (ref) os << ",f_min_no_ffc_hz";
        os << '\n';
        for (std::size_t k = 0; k < K; ++k) {
            os << num(r.t[k]);
            for (int u = 0; u < nu; ++u) os << ',' << num(r.f[k](u));
            if (ref) os << ',' << num(r.f_min_reference[k]);
            os << '\n';
        }
    }
    {
        auto os = open_out(d / "fig_rocof.csv");
        os << "t";
        for (const auto& u : r.unit_names) os << ",rocof_" << u << "_hz_s";
        os << '\n';
        for (std::size_t k = 0; k < K; ++k) {
            os << num(r.t[k]);
            for (int u = 0; u < nu; ++u) os << ',' << num(r.rocof[k](u));
            os << '\n';
        }
    }
    {
        auto os = open_out(d / "fig_power.csv");
        os << "t";
        for (int i = 0; i < nc; ++i) os << ",p_" << r.unit_names[i] << "_pu";
        for (int i = 0; i < nc; ++i) os << ",q_" << r.unit_names[i] << "_pu";
        for (int i = 0; i < nc; ++i) os << ",dp_set_" << r.unit_names[i] << "_pu";
        os << '\n';
        for (std::size_t k = 0; k < K; ++k) {
            os << num(r.t[k]);
            for (const auto* v : {&r.p[k], &r.q[k], &r.dp[k]})
                for (int i = 0; i < nc; ++i) os << ',' << num((*v)(i));
            os << '\n';
        }
    }
    if (nb > 0) {
        auto os = open_out(d / "fig_flows.csv");
        os << "t";
        for (const auto& b : r.branch_names) os << ',' << b << "_pu";
        os << '\n';
        for (std::size_t k = 0; k < K; ++k) {
            os << num(r.t[k]);
            for (int b = 0; b < nb; ++b) os << ',' << num(r.flows[k](b));
            os << '\n';
        }
    }
    if (detailed) {
        auto os = open_out(d / "fig_dc.csv");
        os << "t";
        for (int i = 0; i < nc; ++i) os << ",v_dc_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",i_x_" << r.unit_names[i];
        for (int i = 0; i < nc; ++i) os << ",soc_" << r.unit_names[i];
        os << '\n';
        for (std::size_t k = 0; k < K; ++k) {
            os << num(r.t[k]);
            for (const auto* v : {&r.v_dc[k], &r.i_dc[k], &r.soc[k]})
                for (int i = 0; i < nc; ++i) os << ',' << num((*v)(i));
            os << '\n';
        }
    }
}

ScenarioResult import_traces(const std::string& path) {
    const CsvTable t = read_csv(path);
    ScenarioResult r;
    std::vector<int> fc, rc, dc;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        const auto& h = t.header[i];
        if (h.rfind("f_", 0) == 0) {
            fc.push_back(static_cast<int>(i));
            r.unit_names.push_back(h.substr(2));
        } else if (h.rfind("rocof_inst_", 0) == 0) {
        } else if (h.rfind("rocof_", 0) == 0) {
            rc.push_back(static_cast<int>(i));
        } else if (h.rfind("dp_", 0) == 0) {
            dc.push_back(static_cast<int>(i));
        }
    }
    r.n_c = static_cast<int>(dc.size());
    auto pick = [](const std::vector<double>& row, const std::vector<int>& cols) {
        Vec v(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i) v(i) = row[cols[i]];
        return v;
    };
    for (const auto& row : t.rows) {
        r.t.push_back(row[0]);
        r.f.push_back(pick(row, fc));
        r.rocof.push_back(pick(row, rc));
        r.dp.push_back(pick(row, dc));
    }
    r.summary = summarize(r);
    return r;
}

std::string output_root() {
    const char* e = std::getenv("FFC_OUTPUT_ROOT");
    return (e && *e) ? std::string(e) : std::string("ffc_out");
}

}  // namespace ffc
