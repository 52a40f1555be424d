#include "willis/cell.hpp"

#include <cmath>

namespace willis {

namespace {
constexpr double kInclinationFloor = 1e-12;

void check_inclination(double c) {
    if (!(std::abs(c) > kInclinationFloor))
        throw DegenerateGeometryError("hidden-pair rods are parallel (inclination ~ 0)");
}
}  // namespace

Vec2c hidden_displacement(const Vec2c& du_dx2, double inclination) {
    check_inclination(inclination);
    return Vec2c(du_dx2(1) / inclination, inclination * du_dx2(0));
}

HiddenState hidden_state(const CellParams& params, const GradientState& state) {
    HiddenState hs;
    hs.s = hidden_displacement(state.du_dx2, params.c);
    if (params.has_second_pair()) {
        hs.s_prime = hidden_displacement(state.du_dx2, params.second_pair->c_prime);
        hs.has_second = true;
    }
    return hs;
}

Vec2c momentum_density(const CellParams& params, const GradientState& state,
                       double omega) {
    const cplx miw(0.0, -omega);  // -i w
    const HiddenState hs = hidden_state(params, state);
    Vec2c p = params.m * hs.s;
    if (hs.has_second) {
        p -= params.second_pair->m_prime * hs.s_prime;
        p += params.delta * state.u0;
    } else {
        p += 0.5 * params.delta * state.u0;
    }
    return miw * p;
}

RodForceResolution rod_force_resolution(const Vec2c& F, double inclination) {
    check_inclination(inclination);
    const double c = inclination;
    RodForceResolution r;
    // (alpha + beta) c = -F1 and alpha - beta = -F2.
    r.alpha = 0.5 * (-F(0) / c - F(1));
    r.beta = 0.5 * (-F(0) / c + F(1));
    r.F_ED = r.alpha * Vec2c(c, 1.0);
    r.F_EB = r.beta * Vec2c(c, -1.0);
    r.F_FD = -r.F_EB;
    r.F_FB = -r.F_ED;
    r.t = Vec2c(c * F(1), F(0) / c);
    return r;
}

Mat2c inertial_stress(const CellParams& params, const Vec2c& u0, double omega) {
    const double w2 = omega * omega;
    auto pair_column = [&](double mass, double c) {
        // t = -w^2 * mass * (c * u2, u1 / c) for the drive F = -w^2 mass u0.
        return Vec2c(-w2 * mass * c * u0(1), -w2 * mass * u0(0) / c);
    };
    check_inclination(params.c);
    Vec2c t = pair_column(params.m, params.c);
    if (params.has_second_pair()) {
        check_inclination(params.second_pair->c_prime);
        t -= pair_column(params.second_pair->m_prime, params.second_pair->c_prime);
    }
    Mat2c sigma = Mat2c::Zero();
    sigma(0, 1) = t(0);
    sigma(1, 1) = t(1);
    return sigma;
}

CouplingTensors coupling_tensors(const CellParams& params, double omega) {
    check_inclination(params.c);
    const cplx iw(0.0, omega);
    cplx top;     // stress slot s12 <- velocity component 2
    cplx bottom;  // stress slot s22 <- velocity component 1
    if (params.has_second_pair()) {
        const auto& sp = *params.second_pair;
        check_inclination(sp.c_prime);
        top = iw * (sp.m_prime * sp.c_prime - params.m * params.c);
        bottom = iw * (sp.m_prime / sp.c_prime - params.m / params.c);
    } else {
        top = -iw * params.m * params.c;
        bottom = -iw * params.m / params.c;
    }
    CouplingTensors ct;
    ct.S = Mat42c::Zero();
    ct.S(2, 1) = top;     // slot (3,2) 1-based
    ct.S(3, 0) = bottom;  // slot (4,1) 1-based
    ct.D = ct.S.transpose();
    return ct;
}

Mat2c density_tensor(const CellParams& params) {
    const cplx scale = params.has_second_pair() ? params.delta : 0.5 * params.delta;
    return scale * Mat2c::Identity();
}

PrimedTensors primed_tensors(const Mat42c& S, const Mat24c& D, double omega) {
    const cplx miw(0.0, -omega);
    const Mat42c Sp = miw * S;
    const Mat24c Dp = miw * D;
    const double scale = std::max({Sp.cwiseAbs().maxCoeff(), Dp.cwiseAbs().maxCoeff(), 1.0});
    if (Sp.imag().cwiseAbs().maxCoeff() > 1e-12 * scale ||
        Dp.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument(
            "primed_tensors: couplings are not purely imaginary, primed form is complex");
    PrimedTensors pt;
    pt.S_prime = Sp.real();
    pt.D_prime = Dp.real();
    return pt;
}

double symmetric_variant_params(double m, double c, double c_prime) {
    if (!(c_prime > 0.0))
        throw std::invalid_argument("symmetric_variant_params: c_prime must be > 0");
    if (!(m > 0.0) || !(c > 0.0))
        throw std::invalid_argument("symmetric_variant_params: m and c must be > 0");
    return m * c / c_prime;
}

EffectiveLaw effective_law(const CellParams& params, double omega,
                           const Mat4c& C_network) {
    params.validate();
    EffectiveLaw law;
    law.C = C_network;
    const CouplingTensors ct = coupling_tensors(params, omega);
    law.S = ct.S;
    law.D = ct.D;
    law.rho = density_tensor(params);
    return law;
}

}  // namespace willis
