#pragma once

// Core value types and conventions shared by the whole library.
//
// Conventions (fixed here, used everywhere):
//
//  * Time-harmonic fields carry the factor e^{-i w t}; velocity is v = -i w u.
//    A lossy medium therefore has Im(delta) >= 0 and decaying branches satisfy
//    Im(omega) <= 0.
//
//  * Displacement gradients G are 2x2 matrices with G(l,k) = du_l / dx_k.
//    They flatten column-major into 4-vectors:
//        vec4(G) = (du1/dx1, du2/dx1, du1/dx2, du2/dx2).
//    Stress flattens the same way:
//        vec4(sigma) = (s11, s21, s12, s22),
//    i.e. entry (i,j) of sigma sits at slot 2*(j-1)+i (1-based).  Stress is
//    NOT assumed symmetric.  Traction on a surface with outward normal n is
//    sigma * n (second index contracts with the normal).
//
//  * The macroscopic constitutive law is the 6x6 block matrix
//        [ sigma ]   [ C  S ] [ vec4(grad u) ]
//        [   p   ] = [ D  R ] [      v       ]
//    mapping (gradient, velocity) -> (stress, momentum density).  C is 4x4,
//    S is 4x2, D is 2x4, R (density) is 2x2.
//
// All quantities are nondimensional; units enter only through the parameter
// values supplied by the caller.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace willis {

using cplx = std::complex<double>;

using Vec2c = Eigen::Vector2cd;
using Vec4c = Eigen::Vector4cd;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;
using Mat42c = Eigen::Matrix<cplx, 4, 2>;
using Mat24c = Eigen::Matrix<cplx, 2, 4>;
using Mat6c = Eigen::Matrix<cplx, 6, 6>;
using Mat42d = Eigen::Matrix<double, 4, 2>;
using Mat24d = Eigen::Matrix<double, 2, 4>;

/// Raised when a parameter or configuration field is invalid.  `field` names
/// the offending entry with a dotted path (e.g. "cell.c").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field_path, const std::string& what)
        : std::runtime_error(field_path + ": " + what), field(std::move(field_path)) {}
    std::string field;
};

/// Raised when geometry degenerates (e.g. hidden-node rods become parallel).
class DegenerateGeometryError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a linear solve hits a (near-)singular operator.  Carries an
/// estimate of the offending near-null vector when one could be computed.
class SingularSystemError : public std::runtime_error {
public:
    explicit SingularSystemError(const std::string& what,
                                 Eigen::VectorXcd near_null = {})
        : std::runtime_error(what), near_null_vector(std::move(near_null)) {}
    Eigen::VectorXcd near_null_vector;
};

/// Optional second hidden-mass pair inside each cell.  The pair carries
/// masses (-h*m_prime + delta*h^2, +h*m_prime) at (-c_prime*h, 0) and
/// (+c_prime*h, 0) relative to the cell centre.
struct SecondPair {
    double m_prime = 0.0;  ///< mass magnitude per unit h, > 0
    double c_prime = 0.0;  ///< horizontal offset of the pair, > 0 (may exceed 1)
};

/// Geometric and material parameters of one unit cell.
///
/// The cell is the diamond with corners (+-h, 0), (0, +-h) around its centre;
/// its area is 2 h^2 and the lattice translation vectors are (h, h), (h, -h).
/// The primary hidden pair carries masses (+h*m, -h*m + delta*h^2) at
/// (-c*h, 0) and (+c*h, 0); rigid rods tie each hidden node to the cell's
/// bottom and top corners.
struct CellParams {
    double h = 0.01;        ///< half-diagonal of the diamond cell, > 0
    double K = 1.0;         ///< spring stiffness scale, > 0
    double m = 1.0;         ///< hidden-pair mass magnitude per unit h, > 0
    double c = 0.5;         ///< hidden-pair offset fraction, 0 < c < 1
    cplx delta{0.0, 0.1};   ///< net mass density parameter, Im(delta) >= 0
    std::optional<SecondPair> second_pair;

    /// Throws ConfigError naming the first violated field.
    void validate(const std::string& prefix = "cell") const;

    bool has_second_pair() const { return second_pair.has_value(); }
};

/// A locally smooth probe state: u(x) = u0 + du_dx1 * x1 + du_dx2 * x2.
struct GradientState {
    Vec2c u0 = Vec2c::Zero();
    Vec2c du_dx1 = Vec2c::Zero();  ///< column 1 of the displacement gradient
    Vec2c du_dx2 = Vec2c::Zero();  ///< column 2 of the displacement gradient

    Mat2c gradient() const {
        Mat2c g;
        g.col(0) = du_dx1;
        g.col(1) = du_dx2;
        return g;
    }
};

/// Displacements of the hidden nodes of one cell, as amplitudes of the
/// +-h splitting: u_left = u0 + h*s, u_right = u0 - h*s (per pair).
struct HiddenState {
    Vec2c s = Vec2c::Zero();        ///< primary pair
    Vec2c s_prime = Vec2c::Zero();  ///< second pair (zero when absent)
    bool has_second = false;
};

/// The assembled 6x6 constitutive law in the fixed basis.
struct EffectiveLaw {
    Mat4c C = Mat4c::Zero();    ///< elasticity block (gradient -> stress)
    Mat42c S = Mat42c::Zero();  ///< velocity -> stress coupling
    Mat24c D = Mat24c::Zero();  ///< gradient -> momentum coupling
    Mat2c rho = Mat2c::Zero();  ///< density block (velocity -> momentum)
};

/// Couplings written against displacement instead of velocity:
/// S' = -i w S and D' = -i w D.  For purely imaginary S, D (the generic cell
/// at real omega) these are real.
struct PrimedTensors {
    Mat42d S_prime = Mat42d::Zero();
    Mat24d D_prime = Mat24d::Zero();
};

/// Column-major flattening of a 2x2 gradient (or stress) matrix; see the
/// header comment for the slot order.  Round-trips bitwise with vec4_to_grad.
inline Vec4c grad_to_vec4(const Mat2c& g) {
    return Vec4c(g(0, 0), g(1, 0), g(0, 1), g(1, 1));
}

inline Mat2c vec4_to_grad(const Vec4c& v) {
    Mat2c g;
    g(0, 0) = v(0);
    g(1, 0) = v(1);
    g(0, 1) = v(2);
    g(1, 1) = v(3);
    return g;
}

/// Assembles the full 6x6 law [[C, S], [D, rho]].
Mat6c block_matrix(const EffectiveLaw& law);

}  // namespace willis
