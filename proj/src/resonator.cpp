#include "willis/resonator.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace willis {

void ResonatorParams::validate() const {
    if (!(m_shell >= 0.0) || !std::isfinite(m_shell))
        throw ConfigError("resonator.m_shell", "must be finite and >= 0");
    if (!(m_core > 0.0) || !std::isfinite(m_core))
        throw ConfigError("resonator.m_core", "must be finite and > 0");
    if (!(k_total > 0.0) || !std::isfinite(k_total))
        throw ConfigError("resonator.k_total", "must be finite and > 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw ConfigError("resonator.gamma", "must be finite and >= 0");
}

cplx effective_mass(const ResonatorParams& res, double omega) {
    res.validate();
    if (!(omega > 0.0))
        throw std::invalid_argument("effective_mass requires omega > 0");
    const cplx k_hat(res.k_total, -omega * res.gamma);
    const cplx denom = k_hat - omega * omega * res.m_core;
    if (std::abs(denom) <= 1e-14 * (res.k_total + omega * omega * res.m_core))
        throw std::domain_error(
            "undamped resonator driven at its resonance omega^2 = k_total/m_core: "
            "the effective mass has a pole");
    return res.m_shell + k_hat * res.m_core / denom;
}

FrequencyInterval negative_band(const ResonatorParams& res) {
    res.validate();
    const double omega0 = std::sqrt(res.k_total / res.m_core);
    if (res.gamma == 0.0) {
        FrequencyInterval band;
        band.lo = omega0;
        band.hi = res.m_shell == 0.0
                      ? std::numeric_limits<double>::infinity()
                      : std::sqrt(res.k_total * (1.0 / res.m_core + 1.0 / res.m_shell));
        return band;
    }

    // Damped case: locate the first sign change bracket of Re(m_eff) on a
    // dense grid around the resonance, then bisect.
    const double hi_guess =
        res.m_shell == 0.0
            ? 8.0 * omega0
            : 2.0 * std::sqrt(res.k_total * (1.0 / res.m_core + 1.0 / res.m_shell));
    const auto re_meff = [&](double w) { return effective_mass(res, w).real(); };
    const int n = 8192;
    const double lo_guess = 1e-3 * omega0;
    std::vector<double> crossings;
    double prev_w = lo_guess;
    double prev_f = re_meff(prev_w);
    for (int i = 1; i <= n && crossings.size() < 2; ++i) {
        const double w = lo_guess + (hi_guess - lo_guess) * i / n;
        const double f = re_meff(w);
        if ((prev_f < 0.0) != (f < 0.0)) {
            double a = prev_w, b = w;
            double fa = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = re_meff(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            crossings.push_back(0.5 * (a + b));
        }
        prev_w = w;
        prev_f = f;
    }
    FrequencyInterval band;
    if (crossings.size() >= 2) {
        band.lo = crossings[0];
        band.hi = crossings[1];
    } else if (crossings.size() == 1 && re_meff(hi_guess) < 0.0) {
        band.lo = crossings[0];
        band.hi = std::numeric_limits<double>::infinity();
    }
    return band;
}

ResonatorParams design_for_mass(cplx target, double omega, double m_shell) {
    if (!(omega > 0.0))
        throw std::invalid_argument("design_for_mass requires omega > 0");
    if (!(m_shell >= 0.0))
        throw std::invalid_argument("design_for_mass requires m_shell >= 0");
    if (target.imag() < 0.0)
        throw std::invalid_argument(
            "infeasible target: Im(target) < 0 violates passivity under e^{-i omega t}");
    if (!(target.real() < m_shell))
        throw std::invalid_argument(
            "infeasible target: Re(target) must lie below the shell mass");

    // With T = target - m_shell and the choice m_core = |T|, the required
    // complex stiffness k_hat = T omega^2 m_core / (T - m_core) simplifies to
    //   k_hat = omega^2 |T| (|T| - T) / (2 (|T| - Re T)),
    // whose real part is omega^2 |T| / 2 > 0 and whose imaginary part is
    // -omega^2 |T| Im(T) / (2 (|T| - Re T)) <= 0, i.e. gamma >= 0: the
    // construction is feasible for every target satisfying the preconditions.
    const cplx T = target - m_shell;
    const double mod = std::abs(T);
    ResonatorParams out;
    out.m_shell = m_shell;
    out.m_core = mod;
    const cplx k_hat = omega * omega * mod * (mod - T) / (2.0 * (mod - T.real()));
    out.k_total = k_hat.real();
    out.gamma = -k_hat.imag() / omega;
    if (out.gamma < 0.0) out.gamma = 0.0;  // clamp -0.0 from rounding
    out.validate();
    return out;
}

}  // namespace willis
