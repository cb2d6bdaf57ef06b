#pragma once

#include <Eigen/Dense>

namespace ffc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
Mat expm(const Mat& A);

struct ZohPair {
    Mat Ad;
    Mat Bd;
};

// Zero-order-hold discretization via the exponential of [[A, B], [0, 0]] * T.
ZohPair zoh(const Mat& A, const Mat& B, double T);

// Largest eigenvalue modulus.
double spectral_radius(const Mat& A);

}  // namespace ffc
