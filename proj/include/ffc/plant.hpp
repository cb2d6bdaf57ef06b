#pragma once

#include <memory>
#include <vector>

#include "ffc/grid.hpp"
#include "ffc/reduced.hpp"
#include "ffc/vsc.hpp"

namespace ffc {

struct PlantMeasurement {
    Vec f;          // Hz per unit, converters first
    Vec rocof_int;  // Hz/s, internal RoCoF state of each converter
    Vec p_vsc;      // active power per converter, system p.u.
    Vec q_vsc;      // reactive power per converter, system p.u.
    Vec flows;      // branch flows, system p.u.
    Vec soc;        // per converter
    Vec v_dc, i_dc; // detailed fidelity only (device p.u.), else NaN
    Vec x_reduced;  // state in multi-machine model coordinates
};

// Inputs are the accumulated converter setpoint changes (system p.u.) and
// the per-bus injection changes p_l (system p.u.).
class Plant {
public:
    virtual ~Plant() = default;
    virtual PlantMeasurement measure(const Vec& uc, const Vec& p_l) const = 0;
    virtual void advance(const Vec& uc, const Vec& p_l) = 0;
    virtual double dt() const = 0;
    virtual int n_units() const = 0;
};

class ReducedPlant : public Plant {
public:
    ReducedPlant(const GridCase& grid, const MultiMachineSS& mm, double dt);
    PlantMeasurement measure(const Vec& uc, const Vec& p_l) const override;
    void advance(const Vec& uc, const Vec& p_l) override;
    double dt() const override { return dt_; }
    int n_units() const override { return mm_.n_units(); }
    const Vec& state() const { return x_; }

private:
    const GridCase& grid_;
    MultiMachineSS mm_;
    double dt_;
    Vec x_, soc_;
};

// Detailed converters coupled through a quasi-static DC network solve; SGs keep
// their third-order dynamics. RK4 at the plant step.
class DetailedPlant : public Plant {
public:
    DetailedPlant(const GridCase& grid, double dt);
    PlantMeasurement measure(const Vec& uc, const Vec& p_l) const override;
    void advance(const Vec& uc, const Vec& p_l) override;
    double dt() const override { return dt_; }
    int n_units() const override { return static_cast<int>(grid_.sgs.size() + grid_.vscs.size()); }
    double time() const { return t_; }
    const Vec& state() const { return x_; }
    Vec derivative(const Vec& x, const Vec& uc, const Vec& p_l) const;

private:
    Vec bus_angles(const Vec& x, const Vec& p_l) const;
    const GridCase& grid_;
    double dt_;
    double t_ = 0.0;
    std::vector<VscDevice> dev_;
    Eigen::PartialPivLU<Mat> ylu_;
    Vec load_;  // constant injections per bus (loads), p.u.
    Vec x_, x0_;
    std::vector<std::string> names_;
    int ng_, nc_;
};

std::unique_ptr<Plant> make_plant(const std::string& fidelity, const GridCase& grid, const MultiMachineSS& mm,
                                  double dt);

}  // namespace ffc
