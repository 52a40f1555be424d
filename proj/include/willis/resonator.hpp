#pragma once

/// Core-shell resonator: a rigid shell of mass m_shell encloses a core of
/// mass m_core, attached by springs of total stiffness k_total with an
/// optional parallel dashpot gamma.  Driving the shell at angular frequency
/// omega (convention e^{-i omega t}) and eliminating the core yields
///
///     m_eff(omega) = m_shell + k_hat m_core / (k_hat - omega^2 m_core),
///     k_hat = k_total - i omega gamma,
///
/// which dips below zero just above the internal resonance
/// omega_0 = sqrt(k_total / m_core): the core oscillates out of phase and
/// the assembly responds as if its mass were negative.

#include <complex>
#include <limits>

#include "willis/types.hpp"

namespace willis {

struct ResonatorParams {
    double m_shell = 0.0;  ///< rigid outer mass, >= 0
    double m_core = 1.0;   ///< internal oscillating mass, > 0
    double k_total = 1.0;  ///< total core-to-shell stiffness, > 0
    double gamma = 0.0;    ///< dashpot rate in parallel with the spring, >= 0

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Dynamic effective mass seen by a force driving the shell.  Requires
/// omega > 0; throws std::domain_error at the undamped resonance pole
/// omega^2 = k_total / m_core (gamma = 0).  Im(m_eff) >= 0 for gamma >= 0.
cplx effective_mass(const ResonatorParams& res, double omega);

struct FrequencyInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(lo < hi); }
};

/// The omega-interval on which Re(m_eff) < 0.  Closed form for gamma = 0:
/// (sqrt(k/m_core), sqrt(k (1/m_core + 1/m_shell))), unbounded above when
/// m_shell = 0.  For gamma > 0 (assumed small) the first negative region is
/// located numerically; the interval may be empty when m_shell or gamma is
/// too large.
FrequencyInterval negative_band(const ResonatorParams& res);

/// Inverse design: resonator parameters (with the given shell mass) whose
/// effective mass at omega equals `target` exactly.  Requires omega > 0,
/// Re(target) < m_shell and Im(target) >= 0 (passivity); otherwise throws
/// std::invalid_argument.  The returned parameters are always feasible:
/// m_core = |target - m_shell|, k_total > 0, gamma >= 0 (gamma = 0 for real
/// targets).
ResonatorParams design_for_mass(cplx target, double omega, double m_shell);

}  // namespace willis
