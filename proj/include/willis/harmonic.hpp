#pragma once

// Time-harmonic response of a lattice at angular frequency omega with the
// e^{-i omega t} convention: velocity = -i omega u, and the equations of
// motion read (K - omega^2 M) u = f_ext + C lambda with C distributing the
// rod axial forces.
//
// Rigid rods enter as scalar constraints n.(u_b - u_a) = 0 (n the unit
// vector from the hidden end a to the vertex end b) and one Lagrange
// multiplier each; lambda[r] is the axial force the rod exerts on its vertex
// endpoint along +n, so the hidden endpoint feels -lambda[r] n.

#include <map>
#include <vector>

#include <Eigen/Sparse>

#include "willis/lattice.hpp"
#include "willis/types.hpp"

namespace willis {

struct Assembly {
    Eigen::SparseMatrix<cplx> K;  ///< spring stiffness, 2n x 2n
    Eigen::SparseMatrix<cplx> M;  ///< diagonal node masses, 2n x 2n
    Eigen::SparseMatrix<cplx> C;  ///< rod force distribution, 2n x n_rods
};

/// Global matrices over all 2n displacement dofs (node i owns dofs 2i, 2i+1).
/// Intended for finite samples; a periodic cell's wrap-around springs cancel
/// out of K here (they carry no net force at zero wavevector).
Assembly assemble(const Lattice& lattice);

struct HarmonicSolution {
    Eigen::VectorXcd u;         ///< all 2n dofs, prescribed values included
    Eigen::VectorXcd lambda;    ///< one axial rod force per rod
    Eigen::VectorXcd reaction;  ///< external force sustaining each prescribed dof, zero elsewhere
    double residual = 0.0;      ///< relative residual of the linear solve
};

/// Solves the constrained harmonic problem with the displacements of the
/// given nodes prescribed (both components per node).  `applied_force` is an
/// optional external force vector over all 2n dofs (entries on prescribed
/// dofs are ignored).  Throws std::invalid_argument if a rod joins two
/// prescribed nodes, and SingularSystemError (with a near-null displacement
/// field) when the saddle system is singular at this frequency.
HarmonicSolution solve_prescribed(const Lattice& lattice, double omega,
                                  const std::map<int, Vec2c>& prescribed,
                                  const Eigen::VectorXcd& applied_force = Eigen::VectorXcd());

/// Cycle-averaged power fed into the system by forces f acting on dofs
/// moving as u: P = -(omega/2) Im(sum_j f_j conj(u_j)).
double input_power(double omega, const Eigen::VectorXcd& force, const Eigen::VectorXcd& u);

struct BlochReduced {
    Eigen::MatrixXcd K;  ///< 2nv x 2nv phased stiffness on the vertex dofs
    Eigen::MatrixXcd M;  ///< vertex masses plus eliminated hidden inertia
};

/// Reduces a periodic cell at Bloch wavevector k to its vertex dofs: each
/// hidden node's displacement follows from its two rod constraints,
/// u_X = W_X(k) U, and its inertia folds into M as W_X^H m_X W_X.
BlochReduced bloch_reduce(const Lattice& lattice, const Eigen::Vector2d& k);

struct BlochBand {
    cplx omega;
    Eigen::VectorXcd mode;  ///< vertex displacement eigenvector
};

/// Band frequencies at wavevector k, one per vertex dof, sorted by real
/// part.  Each quadratic pair is represented by its decaying member
/// (Im omega <= 0).  Throws SingularSystemError if the reduced mass matrix
/// is singular at this k.
std::vector<BlochBand> bloch_bands(const Lattice& lattice, const Eigen::Vector2d& k);

}  // namespace willis
