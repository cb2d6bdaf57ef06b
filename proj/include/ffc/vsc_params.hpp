#pragma once

// Parameter blocks of the detailed converter model. Values are per-unit on the
// converter's own rating unless noted.

namespace ffc {

struct VscElectricalParams {
    double r_f = 0.03;
    double l_f = 0.08;
    double c_f = 0.074;
    double r_t = 0.01;
    double l_t = 0.2;
    double omega_b = 314.15926535897932;  // rad/s
};

struct VscControlGains {
    double Kp_v = 0.52, Ki_v = 1.16, Kf_v = 1.0;
    double Kp_i = 0.73, Ki_i = 1.19, Kf_i = 1.0;
    double Kp_dc = 5.0, Ki_dc = 50.0, Kf_dc = 1.0;
};

struct DcSideParams {
    double c_dc = 1.0;
    double g_dc = 0.001;
    double v_dc_star = 1.2;
    double e_b = 36.0;  // p.u. energy on the device base, i.e. seconds at rated power
};

struct VscDeviceParams {
    VscElectricalParams el;
    VscControlGains gains;
    DcSideParams dc;
};

}  // namespace ffc
