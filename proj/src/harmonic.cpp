#include "willis/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace willis {

namespace {

Eigen::Vector2d rod_direction(const Lattice& lat, const Rod& r) {
    Eigen::Vector2d d = lat.nodes[r.b].pos - lat.nodes[r.a].pos;
    if (lat.translation_vectors) {
        const auto& T = *lat.translation_vectors;
        d += r.shift[0] * T[0] + r.shift[1] * T[1];
    }
    const double len = d.norm();
    if (len <= 0.0) throw DegenerateGeometryError("zero-length rod");
    return d / len;
}

Eigen::Vector2d spring_direction(const Lattice& lat, const Spring& s) {
    Eigen::Vector2d d = lat.nodes[s.b].pos - lat.nodes[s.a].pos;
    if (lat.translation_vectors) {
        const auto& T = *lat.translation_vectors;
        d += s.shift[0] * T[0] + s.shift[1] * T[1];
    }
    const double len = d.norm();
    if (len <= 0.0) throw DegenerateGeometryError("zero-length spring");
    return d / len;
}

}  // namespace

Assembly assemble(const Lattice& lat) {
    const int n2 = 2 * static_cast<int>(lat.nodes.size());
    Assembly out;
    out.K.resize(n2, n2);
    out.M.resize(n2, n2);
    out.C.resize(n2, static_cast<int>(lat.rods.size()));

    std::vector<Eigen::Triplet<cplx>> kt, mt, ct;
    for (const Spring& s : lat.springs) {
        const Eigen::Vector2d n = spring_direction(lat, s);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double v = s.k * n(i) * n(j);
                kt.emplace_back(2 * s.a + i, 2 * s.a + j, v);
                kt.emplace_back(2 * s.b + i, 2 * s.b + j, v);
                kt.emplace_back(2 * s.a + i, 2 * s.b + j, -v);
                kt.emplace_back(2 * s.b + i, 2 * s.a + j, -v);
            }
    }
    for (const Node& nd : lat.nodes) {
        if (nd.mass == cplx(0.0)) continue;
        mt.emplace_back(2 * nd.id, 2 * nd.id, nd.mass);
        mt.emplace_back(2 * nd.id + 1, 2 * nd.id + 1, nd.mass);
    }
    for (int r = 0; r < static_cast<int>(lat.rods.size()); ++r) {
        const Eigen::Vector2d n = rod_direction(lat, lat.rods[r]);
        for (int i = 0; i < 2; ++i) {
            ct.emplace_back(2 * lat.rods[r].a + i, r, -n(i));
            ct.emplace_back(2 * lat.rods[r].b + i, r, n(i));
        }
    }
    out.K.setFromTriplets(kt.begin(), kt.end());
    out.M.setFromTriplets(mt.begin(), mt.end());
    out.C.setFromTriplets(ct.begin(), ct.end());
    return out;
}

HarmonicSolution solve_prescribed(const Lattice& lat, double omega,
                                  const std::map<int, Vec2c>& prescribed,
                                  const Eigen::VectorXcd& applied_force) {
    const int n = static_cast<int>(lat.nodes.size());
    const int n2 = 2 * n;
    const int nr = static_cast<int>(lat.rods.size());
    if (applied_force.size() != 0 && applied_force.size() != n2)
        throw std::invalid_argument("applied_force must cover all dofs or be empty");
    for (const auto& [id, val] : prescribed) {
        (void)val;
        if (id < 0 || id >= n) throw std::invalid_argument("prescribed node id out of range");
    }
    for (const Rod& r : lat.rods)
        if (prescribed.count(r.a) && prescribed.count(r.b))
            throw std::invalid_argument(
                "a rod joins two prescribed nodes; its axial force is indeterminate");

    // dof numbering within the reduced (free) block
    std::vector<int> free_index(n2, -1);
    int nf = 0;
    for (int i = 0; i < n; ++i)
        if (!prescribed.count(i)) {
            free_index[2 * i] = nf++;
            free_index[2 * i + 1] = nf++;
        }

    Assembly sys = assemble(lat);
    Eigen::SparseMatrix<cplx> A = sys.K - omega * omega * sys.M;

    Eigen::VectorXcd u_full = Eigen::VectorXcd::Zero(n2);
    for (const auto& [id, val] : prescribed) {
        u_full(2 * id) = val(0);
        u_full(2 * id + 1) = val(1);
    }

    // saddle system over [u_f; lambda]
    const int dim = nf + nr;
    std::vector<Eigen::Triplet<cplx>> st;
    for (int col = 0; col < A.outerSize(); ++col)
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(A, col); it; ++it)
            if (free_index[it.row()] >= 0 && free_index[it.col()] >= 0)
                st.emplace_back(free_index[it.row()], free_index[it.col()], it.value());
    for (int col = 0; col < sys.C.outerSize(); ++col)
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(sys.C, col); it; ++it)
            if (free_index[it.row()] >= 0) {
                st.emplace_back(free_index[it.row()], nf + it.col(), -it.value());
                st.emplace_back(nf + it.col(), free_index[it.row()], it.value());
            }
    Eigen::SparseMatrix<cplx> S(dim, dim);
    S.setFromTriplets(st.begin(), st.end());

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
    const Eigen::VectorXcd coupling = A * u_full;           // A_fp u_p contribution
    const Eigen::VectorXcd g = sys.C.transpose() * u_full;  // constraint offset from u_p
    for (int d = 0; d < n2; ++d)
        if (free_index[d] >= 0) {
            rhs(free_index[d]) = -coupling(d);
            if (applied_force.size()) rhs(free_index[d]) += applied_force(d);
        }
    rhs.segment(nf, nr) = -g;

    Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(S);
    lu.factorize(S);

    auto throw_singular = [&](const char* what) {
        // best-effort near-null displacement field for diagnostics
        Eigen::VectorXcd near_null = Eigen::VectorXcd::Zero(n2);
        if (lu.info() == Eigen::Success && dim > 0) {
            std::mt19937_64 rng(12345);
            std::normal_distribution<double> gauss;
            Eigen::VectorXcd x(dim);
            for (int i = 0; i < dim; ++i) x(i) = cplx(gauss(rng), gauss(rng));
            x.normalize();
            for (int it = 0; it < 8; ++it) {
                Eigen::VectorXcd y = lu.solve(x);
                const double ny = y.norm();
                if (!std::isfinite(ny) || ny == 0.0) break;
                x = y / ny;
            }
            for (int d = 0; d < n2; ++d)
                if (free_index[d] >= 0) near_null(d) = x(free_index[d]);
        } else if (dim > 0 && dim <= 4000) {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(S), Eigen::ComputeFullV);
            const Eigen::VectorXcd x = svd.matrixV().col(dim - 1);
            for (int d = 0; d < n2; ++d)
                if (free_index[d] >= 0) near_null(d) = x(free_index[d]);
        }
        throw SingularSystemError(what, near_null);
    };

    HarmonicSolution sol;
    sol.u = u_full;
    sol.lambda = Eigen::VectorXcd::Zero(nr);
    sol.reaction = Eigen::VectorXcd::Zero(n2);
    if (dim == 0) return sol;

    if (lu.info() != Eigen::Success) throw_singular("saddle factorization failed");
    Eigen::VectorXcd x = lu.solve(rhs);
    const double scale = std::max({rhs.norm(), x.norm(), 1e-300});
    sol.residual = (S * x - rhs).norm() / scale;
    if (!x.allFinite() || sol.residual > 1e-7)
        throw_singular("harmonic system is singular at this frequency");

    for (int d = 0; d < n2; ++d)
        if (free_index[d] >= 0) sol.u(d) = x(free_index[d]);
    sol.lambda = x.segment(nf, nr);

    // reaction = net external force required on prescribed dofs
    const Eigen::VectorXcd balance = A * sol.u - sys.C * sol.lambda;
    for (const auto& [id, val] : prescribed) {
        (void)val;
        for (int i = 0; i < 2; ++i) {
            const int d = 2 * id + i;
            sol.reaction(d) = balance(d);
            if (applied_force.size()) sol.reaction(d) -= applied_force(d);
        }
    }
    return sol;
}

double input_power(double omega, const Eigen::VectorXcd& force, const Eigen::VectorXcd& u) {
    if (force.size() != u.size())
        throw std::invalid_argument("force and displacement vectors differ in size");
    // Eigen's dot conjugates the left factor, so u.dot(force) = sum f_j conj(u_j).
    return -0.5 * omega * u.dot(force).imag();
}

BlochReduced bloch_reduce(const Lattice& lat, const Eigen::Vector2d& k) {
    if (!lat.periodic || !lat.translation_vectors)
        throw std::invalid_argument("bloch_reduce needs a periodic cell");
    const auto& T = *lat.translation_vectors;
    const int nv = lat.vertex_count;
    const int nvd = 2 * nv;
    const cplx I(0.0, 1.0);

    auto phase = [&](const std::array<int, 2>& shift) {
        const Eigen::Vector2d tau = shift[0] * T[0] + shift[1] * T[1];
        return std::exp(I * k.dot(tau));
    };

    BlochReduced red;
    red.K = Eigen::MatrixXcd::Zero(nvd, nvd);
    red.M = Eigen::MatrixXcd::Zero(nvd, nvd);

    for (const Spring& s : lat.springs) {
        const Eigen::Vector2d n = spring_direction(lat, s);
        const Eigen::Matrix2d nn = n * n.transpose();
        const cplx ph = phase(s.shift);
        if (s.a == s.b) {
            red.K.block<2, 2>(2 * s.a, 2 * s.a) += s.k * std::norm(1.0 - ph) * nn;
        } else {
            red.K.block<2, 2>(2 * s.a, 2 * s.a) += s.k * nn;
            red.K.block<2, 2>(2 * s.b, 2 * s.b) += s.k * nn;
            red.K.block<2, 2>(2 * s.a, 2 * s.b) -= s.k * ph * nn;
            red.K.block<2, 2>(2 * s.b, 2 * s.a) -= s.k * std::conj(ph) * nn;
        }
    }

    for (int v = 0; v < nv; ++v) {
        red.M(2 * v, 2 * v) += lat.nodes[v].mass;
        red.M(2 * v + 1, 2 * v + 1) += lat.nodes[v].mass;
    }

    // eliminate each hidden node through its two rod constraints
    for (int hid = nv; hid < static_cast<int>(lat.nodes.size()); ++hid) {
        Eigen::Matrix2d N;  // rows: rod directions
        Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(2, nvd);
        int row = 0;
        for (const Rod& r : lat.rods) {
            if (r.a != hid) continue;
            if (row >= 2) throw std::invalid_argument("hidden node with more than two rods");
            const Eigen::Vector2d n = rod_direction(lat, r);
            N.row(row) = n.transpose();
            R.block<1, 2>(row, 2 * r.b) += phase(r.shift) * n.transpose();
            ++row;
        }
        if (row != 2) throw std::invalid_argument("hidden node with fewer than two rods");
        if (std::abs(N.determinant()) < 1e-12)
            throw DegenerateGeometryError("parallel rods leave a hidden node unconstrained");
        const Eigen::MatrixXcd W = N.inverse() * R;  // u_X = W U
        red.M += lat.nodes[hid].mass * (W.adjoint() * W);
    }
    return red;
}

std::vector<BlochBand> bloch_bands(const Lattice& lat, const Eigen::Vector2d& k) {
    const BlochReduced red = bloch_reduce(lat, k);
    const int dim = static_cast<int>(red.K.rows());

    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(red.M);
    if (svd.singularValues()(dim - 1) < 1e-12 * svd.singularValues()(0))
        throw SingularSystemError("reduced mass matrix is singular at this wavevector",
                                  Eigen::VectorXcd::Zero(dim));

    const Eigen::MatrixXcd G = red.M.partialPivLu().solve(red.K);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(G);
    if (eig.info() != Eigen::Success)
        throw SingularSystemError("band eigenproblem failed to converge",
                                  Eigen::VectorXcd::Zero(dim));

    std::vector<BlochBand> bands(dim);
    for (int i = 0; i < dim; ++i) {
        cplx w = std::sqrt(eig.eigenvalues()(i));
        if (w.imag() > 1e-14 * std::abs(w)) w = -w;  // keep the decaying representative
        bands[i].omega = w;
        bands[i].mode = eig.eigenvectors().col(i);
    }
    std::sort(bands.begin(), bands.end(), [](const BlochBand& a, const BlochBand& b) {
        if (a.omega.real() != b.omega.real()) return a.omega.real() < b.omega.real();
        return a.omega.imag() < b.omega.imag();
    });
    return bands;
}

}  // namespace willis
