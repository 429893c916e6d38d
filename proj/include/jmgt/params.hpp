#pragma once

#include <stdexcept>

namespace jmgt {

/// Coefficients of the JMGT-Westervelt model
///   tau*u_ttt + u_tt - c^2*Lap(u) - b*Lap(u_t) + eta*(u^2)_tt + f = 0.
///
/// tau = 0 is legal and selects the degenerate (Westervelt) solver path.
struct PhysicalParams {
    double tau = 0.0;  ///< relaxation time [s], >= 0
    double c = 1.0;    ///< sound speed [m/s], > 0
    double b = 0.0;    ///< diffusivity of sound [m^2/s], >= 0
    double eta = 0.0;  ///< nonlinearity coefficient [1/Pa], sign-free

    /// Damping margin delta = b - tau*c^2. Derived on demand, never stored.
    double delta() const { return b - tau * c * c; }

    void validate() const {
        if (!(c > 0.0)) throw std::invalid_argument("physics.c must be positive");
        if (tau < 0.0) throw std::invalid_argument("physics.tau must be nonnegative");
        if (b < 0.0) throw std::invalid_argument("physics.b must be nonnegative");
    }
};

}  // namespace jmgt
