#include "willis/dispersion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "willis/cell.hpp"
#include "willis/harmonic.hpp"
#include "willis/homogenize.hpp"

namespace willis {

// Stress slots are (s11, s21, s12, s22): slot = 2*plane + component.
Mat2c contract_stress_coupling(const Mat42c& S, const Eigen::Vector2d& k) {
    Mat2c out;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
            out(j, l) = k(0) * S(j, l) + k(1) * S(2 + j, l);
    return out;
}

// Gradient slots are (du1/dx1, du2/dx1, du1/dx2, du2/dx2): slot = 2*deriv + component.
Mat2c contract_momentum_coupling(const Mat24c& D, const Eigen::Vector2d& k) {
    Mat2c out;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
            out(j, l) = D(j, l) * k(0) + D(j, 2 + l) * k(1);
    return out;
}

Mat2c contract_elasticity(const Mat4c& C, const Eigen::Vector2d& k) {
    Mat2c out = Mat2c::Zero();
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
            for (int p = 0; p < 2; ++p)
                for (int d = 0; d < 2; ++d)
                    out(j, l) += k(p) * C(2 * p + j, 2 * d + l) * k(d);
    return out;
}

BandPoint effective_bands(const EffectiveLaw& law, const Eigen::Vector2d& k) {
    const Mat2c A0 = contract_elasticity(law.C, k);
    const Mat2c B =
        contract_stress_coupling(law.S, k) - contract_momentum_coupling(law.D, k);

    Eigen::JacobiSVD<Mat2c> svd(law.rho);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    if (smax <= 0.0 || smin <= 1e-12 * smax)
        throw DegeneratePencilError(
            "density block is singular: the quadratic pencil degenerates and has "
            "fewer than four finite roots");

    // w^2 rho U + w B U - A0 U = 0.  With y = w U this is the standard
    // eigenproblem of the block companion matrix [[0, I], [rho^-1 A0, -rho^-1 B]].
    const Mat2c rho_inv = law.rho.inverse();
    Eigen::Matrix<cplx, 4, 4> companion = Eigen::Matrix<cplx, 4, 4>::Zero();
    companion.block<2, 2>(0, 2) = Mat2c::Identity();
    companion.block<2, 2>(2, 0) = rho_inv * A0;
    companion.block<2, 2>(2, 2) = -rho_inv * B;

    Eigen::ComplexEigenSolver<Eigen::Matrix<cplx, 4, 4>> es(companion);
    if (es.info() != Eigen::Success)
        throw SingularSystemError("companion eigensolve did not converge");

    std::array<int, 4> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const cplx wa = es.eigenvalues()(a), wb = es.eigenvalues()(b);
        if (wa.real() != wb.real()) return wa.real() < wb.real();
        return wa.imag() < wb.imag();
    });

    BandPoint out;
    out.k = k;
    for (int i : order) {
        const Eigen::Vector4cd vec = es.eigenvectors().col(i);
        // The top half is the displacement; the bottom half (w U) is parallel
        // and better conditioned when |w| is large.
        Vec2c pol = vec.head<2>();
        if (pol.norm() < 1e-12 * vec.norm()) pol = vec.tail<2>();
        if (pol.norm() > 0.0) pol /= pol.norm();
        out.omegas.push_back(es.eigenvalues()(i));
        out.polarizations.push_back(pol);
    }
    return out;
}

std::vector<BranchMismatch> long_wavelength_compare(const CellParams& params,
                                                    const std::vector<Eigen::Vector2d>& k_list) {
    params.validate();
    const Lattice cell = build_periodic_cell(params);
    const Mat4c network = spring_network_elasticity(params).cast<cplx>();
    // The couplings are exactly linear in omega, so the law at any band
    // frequency is the unit-frequency law with S and D rescaled.
    const EffectiveLaw base = effective_law(params, 1.0, network);

    std::vector<BranchMismatch> rows;
    for (const auto& k : k_list) {
        const std::vector<BlochBand> bands = bloch_bands(cell, k);
        for (std::size_t b = 0; b < bands.size(); ++b) {
            const cplx wd = bands[b].omega;
            EffectiveLaw law = base;
            law.S = wd * base.S;
            law.D = wd * base.D;

            BranchMismatch row;
            row.k = k;
            row.branch = static_cast<int>(b);
            row.discrete_omega = wd;

            const BandPoint bp = effective_bands(law, k);
            double best = std::numeric_limits<double>::infinity();
            double second = best;
            cplx nearest = 0.0;
            for (const cplx& w : bp.omegas) {
                const double dist = std::abs(w - wd);
                if (dist < best) {
                    second = best;
                    best = dist;
                    nearest = w;
                } else if (dist < second) {
                    second = dist;
                }
            }
            row.effective_omega = nearest;
            row.mismatch = best / std::max(std::abs(wd), 1e-12);
            row.ambiguous = (second - best) <= 1e-8 * std::max(1.0, std::abs(wd));
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace willis
