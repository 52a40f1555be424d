#pragma once

// Closed-form per-cell analytics: hidden-node kinematics, the inertial forces
// the rigid rods deliver to the cell corners, and the resulting macroscopic
// coupling/density tensors.
//
// Geometry recap (see types.hpp): the cell is a diamond with corners
// A(-h,0), B(0,-h), C(h,0), D(0,h) around its centre.  Hidden nodes sit on
// the horizontal axis at -+c*h and are tied to B and D by rigid rods, so each
// hidden node has exactly two constraints and its displacement is slaved to
// the corner motion.

#include "willis/types.hpp"

namespace willis {

/// Splitting amplitude s of a hidden pair under a smooth field with vertical
/// gradient column w = du/dx2: the rod constraints force
///     u_left  = u0 + h * s,   u_right = u0 - h * s,
///     s = (w2 / c, c * w1).
/// `inclination` is the offset fraction of the pair (c or c_prime).
Vec2c hidden_displacement(const Vec2c& du_dx2, double inclination);

/// Hidden splitting amplitudes for every pair of the cell.
HiddenState hidden_state(const CellParams& params, const GradientState& state);

/// Cell-averaged momentum density to leading order in h:
///     p = -i w (m * s + (delta/2) * u0)                      (single pair)
///     p = -i w (m * s - m' * s' + delta * u0)                (two pairs)
Vec2c momentum_density(const CellParams& params, const GradientState& state,
                       double omega);

/// Axial force split of the two rods of one hidden node, for a drive force F
/// applied at the node (per unit h, so the outputs are h-independent):
/// the rods leaning (+-c, 1) and (+-c, -1) carry
///     F_ED = alpha*(c, 1),  F_EB = beta*(c, -1),
///     (alpha + beta) c = -F1,  alpha - beta = -F2,
/// the mirror node carries the negatives, and the net force the pair demands
/// at the top corner per unit h is t = (c * F2, F1 / c).
struct RodForceResolution {
    cplx alpha{};  ///< axial amplitude of the rod towards the top corner
    cplx beta{};   ///< axial amplitude of the rod towards the bottom corner
    Vec2c F_ED;    ///< force the left node's top rod exerts on corner D
    Vec2c F_EB;    ///< force the left node's bottom rod exerts on corner B
    Vec2c F_FD;    ///< = -F_EB (right node, top rod)
    Vec2c F_FB;    ///< = -F_ED (right node, bottom rod)
    Vec2c t;       ///< compensating corner force per unit h
};
RodForceResolution rod_force_resolution(const Vec2c& F, double inclination);

/// Stress carried by the hidden-pair inertia when the cell translates with
/// displacement u0: first column zero, second column t = -w^2 m (c u2, u1/c)
/// (plus the mirrored second-pair term with the opposite sign).
Mat2c inertial_stress(const CellParams& params, const Vec2c& u0, double omega);

/// Velocity->stress (S, 4x2) and gradient->momentum (D, 2x4) couplings.
/// Single pair:  S(3,2) = -i w m c,  S(4,1) = -i w m / c  (1-based slots),
/// two pairs:    S(3,2) = i w (m'c' - m c),  S(4,1) = i w (m'/c' - m/c);
/// D = S^T in all cases.
struct CouplingTensors {
    Mat42c S;
    Mat24c D;
};
CouplingTensors coupling_tensors(const CellParams& params, double omega);

/// Density block: (delta/2) I for one pair, delta I for two.
Mat2c density_tensor(const CellParams& params);

/// Displacement-based couplings S' = -i w S, D' = -i w D.  Entries must come
/// out real (imaginary parts below 1e-12 of scale), which holds whenever S, D
/// are purely imaginary; otherwise throws std::invalid_argument.
PrimedTensors primed_tensors(const Mat42c& S, const Mat24c& D, double omega);

/// Mass magnitude m' = m c / c' that makes the two-pair couplings symmetric
/// (the stress response to translation becomes a symmetric matrix).
double symmetric_variant_params(double m, double c, double c_prime);

/// Assembles the full law from the cell analytics plus a separately
/// homogenized network elasticity block.
EffectiveLaw effective_law(const CellParams& params, double omega,
                           const Mat4c& C_network);

}  // namespace willis
