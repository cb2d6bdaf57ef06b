#include "ffc/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ffc {

namespace {

// Higham (2005) coefficients for the [13/13] Pade approximant.
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Mat expm(const Mat& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("expm: matrix must be square");
    const Eigen::Index n = A.rows();
    if (n == 0) return A;

    double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > kTheta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
    Mat As = A / std::ldexp(1.0, s);

    const Mat I = Mat::Identity(n, n);
    const Mat A2 = As * As;
    const Mat A4 = A2 * A2;
    const Mat A6 = A4 * A2;
    const double* b = kPade13;

    Mat U = As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Mat E = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) E = E * E;
    return E;
}

ZohPair zoh(const Mat& A, const Mat& B, double T) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
        throw std::invalid_argument("zoh: dimension mismatch");
    if (!(T > 0.0)) throw std::invalid_argument("zoh: sample time must be positive");
    const Eigen::Index n = A.rows(), m = B.cols();
    Mat M = Mat::Zero(n + m, n + m);
    M.topLeftCorner(n, n) = A * T;
    M.topRightCorner(n, m) = B * T;
    Mat E = expm(M);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

double spectral_radius(const Mat& A) {
    Eigen::EigenSolver<Mat> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace ffc
