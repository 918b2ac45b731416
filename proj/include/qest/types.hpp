#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qest {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Thrown when a numerical routine finishes with a residual above its
/// documented tolerance. Carries the offending residual.
class numerical_error : public std::runtime_error {
  public:
    numerical_error(const std::string &what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// 2x2 real symmetric information matrix over the parameter pair
/// (phase, diffusion width). Used for both quantum and classical
/// Fisher information.
struct FisherMatrix {
    double phase = 0.0;     // information about the phase parameter
    double diffusion = 0.0; // information about the diffusion parameter
    double cross = 0.0;     // off-diagonal element
};

inline double max_abs(const CMatrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void hermitize(CMatrix &m) { m = 0.5 * (m + m.adjoint()).eval(); }

} // namespace qest
