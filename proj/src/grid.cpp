#include "ffc/grid.hpp"

#include <cmath>
#include <queue>
#include <sstream>

namespace ffc {

NetworkGraph build_laplacian(int n_n, const std::vector<Branch>& branches) {
    if (n_n <= 0) throw CaseError("network: bus count must be positive");
    if (branches.empty()) throw CaseError("network: at least one branch is required");
    NetworkGraph net;
    net.n_n = n_n;
    net.branches = branches;
    const int nb = static_cast<int>(branches.size());
    net.G = Mat::Zero(nb, n_n);
    net.Xb = Mat::Zero(nb, nb);
    for (int k = 0; k < nb; ++k) {
        const Branch& b = branches[k];
        if (b.from < 0 || b.from >= n_n || b.to < 0 || b.to >= n_n || b.from == b.to)
            throw CaseError("branch " + std::to_string(k + 1) + ": invalid bus pair");
        if (!(b.x > 0.0)) throw CaseError("branch " + std::to_string(k + 1) + ": reactance must be positive");
        net.G(k, b.from) = 1.0;
        net.G(k, b.to) = -1.0;
        net.Xb(k, k) = 1.0 / b.x;
    }
    net.L = net.G.transpose() * net.Xb * net.G;

    // connectivity
    std::vector<std::vector<int>> adj(n_n);
    for (const auto& b : branches) {
        adj[b.from].push_back(b.to);
        adj[b.to].push_back(b.from);
    }
    std::vector<int> comp(n_n, -1);
    int nc = 0;
    for (int s = 0; s < n_n; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        comp[s] = nc;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (comp[v] < 0) {
                    comp[v] = nc;
                    q.push(v);
                }
        }
        ++nc;
    }
    if (nc > 1) {
        std::ostringstream os;
        os << "network is disconnected into " << nc << " components:";
        for (int c = 0; c < nc; ++c) {
            os << " {";
            bool first = true;
            for (int i = 0; i < n_n; ++i)
                if (comp[i] == c) {
                    os << (first ? "" : ",") << i + 1;
                    first = false;
                }
            os << "}";
        }
        throw CaseError(os.str());
    }
    return net;
}

Vec line_flows(const NetworkGraph& net, const Vec& theta) {
    if (theta.size() != net.n_n)
        throw std::invalid_argument("line_flows: expected " + std::to_string(net.n_n) + " angles, got " +
                                    std::to_string(theta.size()));
    return net.Xb * (net.G * theta);
}

Vec base_angles(const GridCase& grid) {
    const int n = grid.network.n_n;
    const int r = grid.reference_bus;
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (i != r) keep.push_back(i);
    Mat Lk(n - 1, n - 1);
    Vec pk(n - 1);
    for (int a = 0; a < n - 1; ++a) {
        pk(a) = grid.p_sched(keep[a]);
        for (int b = 0; b < n - 1; ++b) Lk(a, b) = grid.network.L(keep[a], keep[b]);
    }
    Vec th = Vec::Zero(n);
    Vec sol = Lk.ldlt().solve(pk);
    for (int a = 0; a < n - 1; ++a) th(keep[a]) = sol(a);
    return th;
}

Vec base_flows(const GridCase& grid) { return line_flows(grid.network, base_angles(grid)); }

void validate(const GridCase& g) {
    const int n = g.network.n_n;
    if (n <= 0) throw CaseError("network: empty bus list");
    if (!(g.f_b > 0.0) || !(g.S_base > 0.0)) throw CaseError("base: f_b and s_base must be positive");
    if (g.reference_bus < 0 || g.reference_bus >= n) throw CaseError("network: reference bus out of range");
    if (g.p_sched.size() != n) throw CaseError("network: p_sched must have one entry per bus");
    if (g.sgs.empty() && g.vscs.empty()) throw CaseError("case has no generating units");
    for (std::size_t j = 0; j < g.sgs.size(); ++j) {
        const auto& s = g.sgs[j];
        std::string w = "sg " + std::to_string(j + 1) + ": ";
        if (s.bus < 0 || s.bus >= n) throw CaseError(w + "bus index out of range");
        if (!(s.M_s > 0.0)) throw CaseError(w + "inertia must be positive");
        if (!(s.D_s > 0.0)) throw CaseError(w + "damping must be positive");
        if (!(s.T_g > 0.0)) throw CaseError(w + "governor time constant must be positive");
        if (!(s.K_g > 0.0)) throw CaseError(w + "governor gain must be positive");
        if (!(s.x_int > 0.0)) throw CaseError(w + "internal reactance must be positive");
    }
    double kp_sum = 0.0;
    for (std::size_t i = 0; i < g.vscs.size(); ++i) {
        const auto& v = g.vscs[i];
        std::string w = "vsc " + std::to_string(i + 1) + ": ";
        if (v.bus < 0 || v.bus >= n) throw CaseError(w + "bus index out of range");
        if (!(v.Rp > 0.0)) throw CaseError(w + "active droop gain Rp must be positive");
        if (v.Rq < 0.0) throw CaseError(w + "reactive droop gain must be non-negative");
        if (!(v.omega_f > 0.0)) throw CaseError(w + "filter cut-off must be positive");
        if (!(v.P_bar > 0.0)) throw CaseError(w + "rating must be positive");
        if (!(v.E_b > 0.0)) throw CaseError(w + "battery capacity must be positive");
        if (!(0.0 <= v.soc_lo && v.soc_lo < v.soc_hi && v.soc_hi <= 1.0))
            throw CaseError(w + "SoC limits must satisfy 0 <= lo < hi <= 1");
        if (!(v.soc_lo <= v.soc0 && v.soc0 <= v.soc_hi)) throw CaseError(w + "initial SoC outside limits");
        if (!(v.p_lim_lo < v.p_lim_hi)) throw CaseError(w + "power limits must satisfy lo < hi");
        if (!(v.k_p > 0.0 && v.k_p <= 1.0)) throw CaseError(w + "participation k_p must be in (0, 1]");
        if (!(v.x_int > 0.0)) throw CaseError(w + "internal reactance must be positive");
        kp_sum += v.k_p;
    }
    if (!g.vscs.empty() && std::fabs(kp_sum - 1.0) > 1e-9)
        throw CaseError("participation invariant violated: sum of k_p is " + text::format_number(kp_sum) +
                        ", expected 1");
}

namespace {

const std::vector<std::string> kBaseKeys = {"f_b", "s_base"};
const std::vector<std::string> kNetworkKeys = {"name", "n_bus", "reference_bus", "p_sched"};
const std::vector<std::string> kBranchKeys = {"from", "to", "x", "rate"};
const std::vector<std::string> kSgKeys = {"bus", "rating", "H", "D", "K_g", "T_g", "x_int", "p_m"};
const std::vector<std::string> kVscKeys = {"bus",     "rating", "Rp",      "Rq",    "omega_f", "p_set",
                                           "q_set",   "omega_set", "V_set", "E_b",  "soc_min", "soc_max",
                                           "soc0",    "p_min",  "p_max",   "k_p",   "x_int"};
const std::vector<std::string> kDeviceKeys = {"r_f",  "l_f",  "c_f",  "r_t",   "l_t",   "Kp_v",  "Ki_v",
                                              "Kf_v", "Kp_i", "Ki_i", "Kf_i",  "Kp_dc", "Ki_dc", "Kf_dc",
                                              "c_dc", "g_dc", "v_dc_star"};

int bus_index(const text::Table& t, const std::string& key, int n) {
    int b = t.integer(key);
    if (b < 1 || b > n)
        throw CaseError("[" + t.name + "] (line " + std::to_string(t.line) + "): " + key + " = " +
                        std::to_string(b) + " is not a bus in 1.." + std::to_string(n));
    return b - 1;
}

}  // namespace

GridCase case_from_document(const text::Document& doc) {
    GridCase g;
    try {
        const text::Table* root = doc.table("");
        if (root && !root->entries.empty()) root->require_known({});
        for (const auto& t : doc.tables) {
            if (t.name.empty()) continue;
            bool ok = (!t.is_array_item && (t.name == "base" || t.name == "network" || t.name == "device")) ||
                      (t.is_array_item && (t.name == "branch" || t.name == "sg" || t.name == "vsc"));
            if (!ok) throw CaseError("unknown section '" + t.name + "' at line " + std::to_string(t.line));
        }
        const text::Table* base = doc.table("base");
        if (!base) throw CaseError("missing [base] section");
        base->require_known(kBaseKeys);
        g.f_b = base->num("f_b");
        g.S_base = base->num("s_base");

        const text::Table* net = doc.table("network");
        if (!net) throw CaseError("missing [network] section");
        net->require_known(kNetworkKeys);
        g.name = net->str_or("name", "");
        const int n = net->integer("n_bus");
        if (n <= 0) throw CaseError("network: empty bus list");
        g.reference_bus = net->has("reference_bus") ? bus_index(*net, "reference_bus", n) : n - 1;
        g.p_sched_mw = net->has("p_sched") ? net->arr("p_sched") : std::vector<double>(n, 0.0);
        if (static_cast<int>(g.p_sched_mw.size()) != n)
            throw CaseError("network: p_sched has " + std::to_string(g.p_sched_mw.size()) + " entries, expected " +
                            std::to_string(n));
        g.p_sched = Vec(n);
        for (int i = 0; i < n; ++i) g.p_sched(i) = g.p_sched_mw[i] / g.S_base;

        std::vector<Branch> br;
        for (const text::Table* t : doc.array("branch")) {
            t->require_known(kBranchKeys);
            Branch b;
            b.from = bus_index(*t, "from", n);
            b.to = bus_index(*t, "to", n);
            b.x = t->num("x");
            b.rate_mw = t->num("rate");
            b.rate = b.rate_mw / g.S_base;
            br.push_back(b);
        }
        g.network = build_laplacian(n, br);

        for (const text::Table* t : doc.array("sg")) {
            t->require_known(kSgKeys);
            SyncGenParams s;
            s.bus = bus_index(*t, "bus", n);
            s.rating = t->num("rating");
            s.H = t->num("H");
            s.D = t->num("D");
            s.Kg = t->num("K_g");
            s.T_g = t->num("T_g");
            s.x_int_dev = t->num("x_int");
            s.p_m_mw = t->num("p_m");
            const double r = s.rating / g.S_base;
            s.M_s = 2.0 * s.H * r;
            s.D_s = s.D * r;
            s.K_g = s.Kg * r;
            s.x_int = s.x_int_dev / r;
            s.p_m_star = s.p_m_mw / g.S_base;
            g.sgs.push_back(s);
        }
        for (const text::Table* t : doc.array("vsc")) {
            t->require_known(kVscKeys);
            VscUnitParams v;
            v.bus = bus_index(*t, "bus", n);
            v.P_bar = t->num("rating");
            v.Rp_dev = t->num("Rp");
            v.Rq_dev = t->num("Rq");
            v.omega_f = t->num("omega_f");
            v.p_set_mw = t->num("p_set");
            v.q_set_mvar = t->num("q_set");
            v.omega_c_star = t->num("omega_set");
            v.V_c_star = t->num("V_set");
            v.E_b = t->num("E_b");
            v.soc_lo = t->num("soc_min");
            v.soc_hi = t->num("soc_max");
            v.soc0 = t->num("soc0");
            v.p_min_mw = t->num("p_min");
            v.p_max_mw = t->num("p_max");
            v.k_p = t->num("k_p");
            v.x_int_dev = t->num("x_int");
            const double r = v.P_bar / g.S_base;
            v.Rp = v.Rp_dev / r;
            v.Rq = v.Rq_dev / r;
            v.p_c_star = v.p_set_mw / g.S_base;
            v.q_c_star = v.q_set_mvar / g.S_base;
            v.p_lim_lo = v.p_min_mw / g.S_base;
            v.p_lim_hi = v.p_max_mw / g.S_base;
            v.x_int = v.x_int_dev / r;
            g.vscs.push_back(v);
        }
        if (const text::Table* d = doc.table("device")) {
            d->require_known(kDeviceKeys);
            auto& e = g.device.el;
            e.r_f = d->num_or("r_f", e.r_f);
            e.l_f = d->num_or("l_f", e.l_f);
            e.c_f = d->num_or("c_f", e.c_f);
            e.r_t = d->num_or("r_t", e.r_t);
            e.l_t = d->num_or("l_t", e.l_t);
            e.omega_b = 2.0 * 3.14159265358979323846 * g.f_b;
            auto& k = g.device.gains;
            k.Kp_v = d->num_or("Kp_v", k.Kp_v);
            k.Ki_v = d->num_or("Ki_v", k.Ki_v);
            k.Kf_v = d->num_or("Kf_v", k.Kf_v);
            k.Kp_i = d->num_or("Kp_i", k.Kp_i);
            k.Ki_i = d->num_or("Ki_i", k.Ki_i);
            k.Kf_i = d->num_or("Kf_i", k.Kf_i);
            k.Kp_dc = d->num_or("Kp_dc", k.Kp_dc);
            k.Ki_dc = d->num_or("Ki_dc", k.Ki_dc);
            k.Kf_dc = d->num_or("Kf_dc", k.Kf_dc);
            auto& c = g.device.dc;
            c.c_dc = d->num_or("c_dc", c.c_dc);
            c.g_dc = d->num_or("g_dc", c.g_dc);
            c.v_dc_star = d->num_or("v_dc_star", c.v_dc_star);
        } else {
            g.device.el.omega_b = 2.0 * 3.14159265358979323846 * g.f_b;
        }
    } catch (const text::ParseError& e) {
        throw CaseError(e.what());
    }
    validate(g);
    return g;
}

text::Document case_to_document(const GridCase& g) {
    text::Document doc;
    doc.header_comments = {
        "# Grid case. Units:",
        "#   [base]     f_b Hz, s_base MVA (system per-unit base)",
        "#   [network]  buses numbered from 1; p_sched = scheduled net injection per bus, MW",
        "#   [[branch]] x = series reactance p.u. on s_base; rate = flow limit, MW",
        "#   [[sg]]     rating MVA; H s, D, K_g, x_int p.u. on the machine rating; T_g s; p_m MW",
        "#   [[vsc]]    rating MW; Rp, Rq, x_int p.u. on the converter rating; omega_f rad/s;",
        "#              p_set MW, q_set MVAr, omega_set/V_set p.u.; E_b MWh; p_min/p_max MW",
        "#   [device]   detailed converter model, p.u. on the converter rating",
    };
    doc.tables.emplace_back();
    auto& base = doc.add("base", false);
    base.set_num("f_b", g.f_b);
    base.set_num("s_base", g.S_base);
    auto& net = doc.add("network", false);
    if (!g.name.empty()) net.set_str("name", g.name);
    net.set_num("n_bus", g.network.n_n);
    net.set_num("reference_bus", g.reference_bus + 1);
    net.set_arr("p_sched", g.p_sched_mw);
    for (const auto& b : g.network.branches) {
        auto& t = doc.add("branch", true);
        t.set_num("from", b.from + 1);
        t.set_num("to", b.to + 1);
        t.set_num("x", b.x);
        t.set_num("rate", b.rate_mw);
    }
    for (const auto& s : g.sgs) {
        auto& t = doc.add("sg", true);
        t.set_num("bus", s.bus + 1);
        t.set_num("rating", s.rating);
        t.set_num("H", s.H);
        t.set_num("D", s.D);
        t.set_num("K_g", s.Kg);
        t.set_num("T_g", s.T_g);
        t.set_num("x_int", s.x_int_dev);
        t.set_num("p_m", s.p_m_mw);
    }
    for (const auto& v : g.vscs) {
        auto& t = doc.add("vsc", true);
        t.set_num("bus", v.bus + 1);
        t.set_num("rating", v.P_bar);
        t.set_num("Rp", v.Rp_dev);
        t.set_num("Rq", v.Rq_dev);
        t.set_num("omega_f", v.omega_f);
        t.set_num("p_set", v.p_set_mw);
        t.set_num("q_set", v.q_set_mvar);
        t.set_num("omega_set", v.omega_c_star);
        t.set_num("V_set", v.V_c_star);
        t.set_num("E_b", v.E_b);
        t.set_num("soc_min", v.soc_lo);
        t.set_num("soc_max", v.soc_hi);
        t.set_num("soc0", v.soc0);
        t.set_num("p_min", v.p_min_mw);
        t.set_num("p_max", v.p_max_mw);
        t.set_num("k_p", v.k_p);
        t.set_num("x_int", v.x_int_dev);
    }
    auto& d = doc.add("device", false);
    const auto& e = g.device.el;
    d.set_num("r_f", e.r_f);
    d.set_num("l_f", e.l_f);
    d.set_num("c_f", e.c_f);
    d.set_num("r_t", e.r_t);
    d.set_num("l_t", e.l_t);
    const auto& k = g.device.gains;
    d.set_num("Kp_v", k.Kp_v);
    d.set_num("Ki_v", k.Ki_v);
    d.set_num("Kf_v", k.Kf_v);
    d.set_num("Kp_i", k.Kp_i);
    d.set_num("Ki_i", k.Ki_i);
    d.set_num("Kf_i", k.Kf_i);
    d.set_num("Kp_dc", k.Kp_dc);
    d.set_num("Ki_dc", k.Ki_dc);
    d.set_num("Kf_dc", k.Kf_dc);
    const auto& c = g.device.dc;
    d.set_num("c_dc", c.c_dc);
    d.set_num("g_dc", c.g_dc);
    d.set_num("v_dc_star", c.v_dc_star);
    return doc;
}

GridCase load_case(const std::string& path) {
    try {
        return case_from_document(text::parse_file(path));
    } catch (const text::ParseError& e) {
        throw CaseError(e.what());
    }
}

void save_case(const GridCase& grid, const std::string& path) { text::write_file(case_to_document(grid), path); }

std::string bundled_case_path() { return std::string(FFC_DATA_DIR) + "/case39.toml"; }

}  // namespace ffc
