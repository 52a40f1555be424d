#pragma once

/// Effective-medium dispersion.  Substituting u = U e^{i(k.x - w t)} into
/// the momentum balance div(sigma) = -i w p with the constitutive law
/// sigma = C grad(u) + S v, p = D grad(u) + rho v, v = -i w u, yields the
/// quadratic eigenproblem
///
///     [ w^2 rho + w ((k.S) - (k.D)) - (k.C.k) ] U = 0,
///
/// where (k.S)_{jl} = k_i S_{(ij),l}, (k.D)_{jl} = D_{j,(kl)} k_k and
/// (k.C.k)_{jl} = k_i C_{(ij),(kl)} k_k contract the plane index of the
/// stress slots and the derivative index of the gradient slots.  The pencil
/// is solved by companion linearization, giving four finite roots whenever
/// rho is nonsingular.

#include <stdexcept>
#include <vector>

#include "willis/lattice.hpp"
#include "willis/types.hpp"

namespace willis {

/// The density block is singular, so the companion pencil loses finite
/// eigenvalues and the quadratic problem degenerates.
class DegeneratePencilError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct BandPoint {
    Eigen::Vector2d k = Eigen::Vector2d::Zero();
    std::vector<cplx> omegas;        ///< all pencil roots, sorted by real part
    std::vector<Vec2c> polarizations;///< unit displacement eigenvectors
};

/// Contractions of the law with a wave vector (exposed for tests).
Mat2c contract_stress_coupling(const Mat42c& S, const Eigen::Vector2d& k);  ///< (k.S)
Mat2c contract_momentum_coupling(const Mat24c& D, const Eigen::Vector2d& k);///< (k.D)
Mat2c contract_elasticity(const Mat4c& C, const Eigen::Vector2d& k);        ///< (k.C.k)

/// All four roots of the quadratic pencil at wave vector k.  Throws
/// DegeneratePencilError when rho is (numerically) singular.
BandPoint effective_bands(const EffectiveLaw& law, const Eigen::Vector2d& k);

struct BranchMismatch {
    Eigen::Vector2d k = Eigen::Vector2d::Zero();
    int branch = 0;
    cplx discrete_omega = 0.0;  ///< Bloch band of the periodic cell
    cplx effective_omega = 0.0; ///< nearest pencil root of the analytic law
    double mismatch = 0.0;      ///< relative frequency error
    bool ambiguous = false;     ///< nearest-root matching was not clear-cut
};

/// For each k, solve the discrete Bloch problem of the periodic cell built
/// from params, assemble the analytic law at each discrete band frequency
/// (the couplings scale with omega) and report the relative mismatch to the
/// nearest effective-medium root.  Meaningful for |k| h well below 1.
std::vector<BranchMismatch> long_wavelength_compare(const CellParams& params,
                                                    const std::vector<Eigen::Vector2d>& k_list);

}  // namespace willis
