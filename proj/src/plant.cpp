#include "ffc/plant.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ffc {

ReducedPlant::ReducedPlant(const GridCase& grid, const MultiMachineSS& mm, double dt)
    : grid_(grid), mm_(mm), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("plant: step must be positive");
    mm_.ss = discretize_zoh(mm.ss, dt);
    x_ = Vec::Zero(mm_.nx());
    soc_ = Vec(mm_.n_c);
    for (int i = 0; i < mm_.n_c; ++i) soc_(i) = grid.vscs[i].soc0;
}

PlantMeasurement ReducedPlant::measure(const Vec& uc, const Vec& p_l) const {
    const int nc = mm_.n_c, nu = mm_.n_units();
    Vec u(nc + mm_.n_n);
    u << uc, p_l;
    const Vec y = mm_.ss.C * x_ + mm_.ss.D * u;
    const Vec pu = mm_.unit_powers(x_, p_l);
    PlantMeasurement m;
    m.f = y.head(nu) + mm_.f0;
    m.flows = y.tail(mm_.n_b) + mm_.pb0;
    m.rocof_int = Vec(nc);
    m.p_vsc = Vec(nc);
    for (int i = 0; i < nc; ++i) {
        const auto& v = grid_.vscs[i];
        m.rocof_int(i) = grid_.f_b * v.Rp * v.omega_f * (x_(2 * i + 1) - pu(i));
        m.p_vsc(i) = v.p_c_star + pu(i);
    }
    m.q_vsc = Vec::Zero(nc);
    m.soc = soc_;
    m.v_dc = Vec::Constant(nc, std::numeric_limits<double>::quiet_NaN());
    m.i_dc = m.v_dc;
    m.x_reduced = x_;
    return m;
}

void ReducedPlant::advance(const Vec& uc, const Vec& p_l) {
    const Vec pu = mm_.unit_powers(x_, p_l);
    for (int i = 0; i < mm_.n_c; ++i) soc_(i) -= dt_ * pu(i) / grid_.vscs[i].energy_pus(grid_.S_base);
    Vec u(mm_.n_c + mm_.n_n);
    u << uc, p_l;
    x_ = mm_.ss.Ad * x_ + mm_.ss.Bd * u;
}

// ---------------------------------------------------------------------------

DetailedPlant::DetailedPlant(const GridCase& grid, double dt) : grid_(grid), dt_(dt) {
    if (!(dt > 0.0) || dt > 1e-3) throw std::invalid_argument("detailed plant: step must be in (0, 1 ms]");
    ng_ = static_cast<int>(grid.sgs.size());
    nc_ = static_cast<int>(grid.vscs.size());
    Mat Y = grid.network.L;
    for (const auto& s : grid.sgs) Y(s.bus, s.bus) += 1.0 / s.x_int;
    ylu_.compute(Y);

    const Vec th0 = base_angles(grid);
    load_ = grid.p_sched;
    x_ = Vec::Zero(3 * ng_ + VscState::kSize * nc_);
    for (int j = 0; j < ng_; ++j) {
        const auto& s = grid.sgs[j];
        load_(s.bus) -= s.p_m_star;
        x_(3 * j) = th0(s.bus) + s.x_int * s.p_m_star;
        names_.insert(names_.end(), {"sg" + std::to_string(j + 1) + ".theta", "sg" + std::to_string(j + 1) + ".omega",
                                     "sg" + std::to_string(j + 1) + ".p_gov"});
    }
    for (int i = 0; i < nc_; ++i) {
        const auto& v = grid.vscs[i];
        VscDevice d;
        d.params = grid.device;
        d.droop = droop_from_unit(v);
        d.validate();
        VscState s = vsc_equilibrium(d, 0.0, 1.0, th0(v.bus), v.soc0);
        VscState ds;
        const VscOutputs o = device_derivative(d, s, terminal_in_frame(1.0, th0(v.bus), s.theta_c), 0.0, ds);
        load_(v.bus) -= o.p_term * v.P_bar / grid.S_base;
        x_.segment(3 * ng_ + VscState::kSize * i, VscState::kSize) = s.pack();
        dev_.push_back(d);
        for (const auto& nm : VscState::names()) names_.push_back("vsc" + std::to_string(i + 1) + "." + nm);
    }
    x0_ = x_;
}

Vec DetailedPlant::bus_angles(const Vec& x, const Vec& p_l) const {
    Vec rhs = load_ + p_l;
    for (int j = 0; j < ng_; ++j) rhs(grid_.sgs[j].bus) += x(3 * j) / grid_.sgs[j].x_int;
    // Converter terminal power depends on the terminal voltage, which depends on
    // the injections; a fixed-point pass on the DC solution resolves it.
    Vec th = ylu_.solve(rhs);
    for (int pass = 0; pass < 3; ++pass) {
        Vec r = rhs;
        for (int i = 0; i < nc_; ++i) {
            const auto& v = grid_.vscs[i];
            const VscState s = VscState::unpack(x, 3 * ng_ + VscState::kSize * i);
            const V2 vt = terminal_in_frame(1.0, th(v.bus), s.theta_c);
            r(v.bus) += vt.dot(s.i_g) * v.P_bar / grid_.S_base;
        }
        th = ylu_.solve(r);
    }
    return th;
}

Vec DetailedPlant::derivative(const Vec& x, const Vec& uc, const Vec& p_l) const {
    const Vec th = bus_angles(x, p_l);
    Vec dx(x.size());
    const double wb = 2.0 * M_PI * grid_.f_b;
    for (int j = 0; j < ng_; ++j) {
        const auto& s = grid_.sgs[j];
        const double w = x(3 * j + 1), pg = x(3 * j + 2);
        const double pe = (x(3 * j) - th(s.bus)) / s.x_int;
        dx(3 * j) = wb * w;
        dx(3 * j + 1) = (s.p_m_star + pg - s.D_s * w - pe) / s.M_s;
        dx(3 * j + 2) = (-s.K_g * w - pg) / s.T_g;
    }
    for (int i = 0; i < nc_; ++i) {
        const auto& v = grid_.vscs[i];
        const int o = 3 * ng_ + VscState::kSize * i;
        const VscState s = VscState::unpack(x, o);
        VscState ds;
        device_derivative(dev_[i], s, terminal_in_frame(1.0, th(v.bus), s.theta_c), uc(i) * grid_.S_base / v.P_bar,
                          ds);
        dx.segment(o, VscState::kSize) = ds.pack();
    }
    return dx;
}

PlantMeasurement DetailedPlant::measure(const Vec& uc, const Vec& p_l) const {
    const Vec th = bus_angles(x_, p_l);
    PlantMeasurement m;
    const int nu = n_units();
    m.f = Vec(nu);
    m.rocof_int = Vec(nc_);
    m.p_vsc = Vec(nc_);
    m.q_vsc = Vec(nc_);
    m.soc = Vec(nc_);
    m.v_dc = Vec(nc_);
    m.i_dc = Vec(nc_);
    m.x_reduced = Vec::Zero(2 * nc_ + 3 * ng_);
    const double fb = grid_.f_b;
    for (int i = 0; i < nc_; ++i) {
        const auto& v = grid_.vscs[i];
        const int o = 3 * ng_ + VscState::kSize * i;
        const VscState s = VscState::unpack(x_, o);
        const VscState s0 = VscState::unpack(x0_, o);
        VscState ds;
        const VscOutputs out = device_derivative(dev_[i], s, terminal_in_frame(1.0, th(v.bus), s.theta_c),
                                                 uc(i) * grid_.S_base / v.P_bar, ds);
        const double r = v.P_bar / grid_.S_base;
        m.f(i) = fb * out.omega_c;
        m.rocof_int(i) = fb * out.rocof;
        m.p_vsc(i) = out.p_c * r;
        m.q_vsc(i) = out.q_c * r;
        m.soc(i) = s.soc;
        m.v_dc(i) = s.v_dc;
        m.i_dc(i) = out.i_dc;
        m.x_reduced(2 * i) = s.theta_c - s0.theta_c;
        m.x_reduced(2 * i + 1) = (s.p_tilde - s0.p_tilde) * r;
    }
    for (int j = 0; j < ng_; ++j) {
        m.f(nc_ + j) = fb * (1.0 + x_(3 * j + 1));
        m.x_reduced(2 * nc_ + 3 * j) = x_(3 * j) - x0_(3 * j);
        m.x_reduced(2 * nc_ + 3 * j + 1) = x_(3 * j + 1);
        m.x_reduced(2 * nc_ + 3 * j + 2) = x_(3 * j + 2);
    }
    m.flows = line_flows(grid_.network, th);
    return m;
}

void DetailedPlant::advance(const Vec& uc, const Vec& p_l) {
    const Rhs f = [&](double, const Vec& x) { return derivative(x, uc, p_l); };
    x_ = rk4_step(f, t_, x_, dt_, names_);
    t_ += dt_;
    for (int i = 0; i < nc_; ++i) {
        const double vdc = x_(3 * ng_ + VscState::kSize * i + 12);
        if (!(vdc > 0.0))
            throw IntegrationFault("vsc" + std::to_string(i + 1) + ": dc voltage collapsed at t=" + std::to_string(t_));
    }
}

std::unique_ptr<Plant> make_plant(const std::string& fidelity, const GridCase& grid, const MultiMachineSS& mm,
                                  double dt) {
    if (fidelity == "reduced") return std::make_unique<ReducedPlant>(grid, mm, dt);
    if (fidelity == "detailed-vsc") return std::make_unique<DetailedPlant>(grid, dt);
    throw std::invalid_argument("unknown plant fidelity '" + fidelity + "' (expected reduced or detailed-vsc)");
}

}  // namespace ffc
