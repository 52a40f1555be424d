#include "willis/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "willis/cell.hpp"

namespace willis {

namespace {

Vec2c affine_value(const GradientState& probe, const Eigen::Vector2d& x) {
    return probe.u0 + probe.du_dx1 * x.x() + probe.du_dx2 * x.y();
}

std::map<int, Vec2c> prescribe_vertices(const Lattice& lat, const GradientState& probe,
                                        bool boundary_only) {
    std::map<int, Vec2c> bc;
    for (int i = 0; i < lat.vertex_count; ++i) {
        if (boundary_only && !lat.nodes[i].boundary) continue;
        bc[i] = affine_value(probe, lat.nodes[i].pos);
    }
    return bc;
}

Vec2c reaction_at(const Eigen::VectorXcd& r, int node) {
    return Vec2c(r(2 * node), r(2 * node + 1));
}

/// Mean reaction over the vertices selected by pred on the grid index.
template <typename Pred>
Vec2c mean_reaction(const Lattice& lat, const Eigen::VectorXcd& r, Pred pred) {
    Vec2c sum = Vec2c::Zero();
    int count = 0;
    for (int i = 0; i < lat.vertex_count; ++i) {
        const auto g = lat.grid_index(lat.nodes[i]);
        if (!pred(g[0], g[1])) continue;
        sum += reaction_at(r, i);
        ++count;
    }
    if (count == 0) throw std::logic_error("empty vertex row in stress estimate");
    return sum / static_cast<double>(count);
}

EffectiveLaw law_from_blocks(const Mat6c& M) {
    EffectiveLaw law;
    law.C = M.topLeftCorner<4, 4>();
    law.S = M.topRightCorner<4, 2>();
    law.D = M.bottomLeftCorner<2, 4>();
    law.rho = M.bottomRightCorner<2, 2>();
    return law;
}

Eigen::Matrix2d unit_gradient(int slot) {
    Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
    // column-major gradient ordering: (du1/dx1, du2/dx1, du1/dx2, du2/dx2)
    G(slot % 2, slot / 2) = 1.0;
    return G;
}

/// Scale one cell's hidden masses to the jittered pair masses, keeping each
/// pair's sum anchored at delta h^2 (or zero for the positive/negative pair).
void apply_jitter(Lattice& lat, double eps, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double h = lat.params.h;
    const cplx anchor = lat.params.delta * h * h;
    for (const Cell& cell : lat.cells) {
        const double mj = lat.params.m * (1.0 + eps * unit(rng));
        lat.nodes[cell.hidden[0]].mass = h * mj;
        lat.nodes[cell.hidden[1]].mass = -h * mj + anchor;
        if (cell.hidden.size() == 4) {
            const double mpj = lat.params.second_pair->m_prime * (1.0 + eps * unit(rng));
            lat.nodes[cell.hidden[2]].mass = -h * mpj + anchor;
            lat.nodes[cell.hidden[3]].mass = h * mpj;
        }
    }
    for (Spring& s : lat.springs) s.k *= 1.0 + eps * unit(rng);
}

}  // namespace

std::array<GradientState, 6> probe_states() {
    std::array<GradientState, 6> probes;
    for (int a = 0; a < 4; ++a) {
        Vec4c g = Vec4c::Zero();
        g(a) = 1.0;
        const Mat2c G = vec4_to_grad(g);
        probes[a].du_dx1 = G.col(0);
        probes[a].du_dx2 = G.col(1);
    }
    probes[4].u0 = Vec2c(1.0, 0.0);
    probes[5].u0 = Vec2c(0.0, 1.0);
    return probes;
}

ProbeResponse measure_on_lattice(const Lattice& lat, const GradientState& probe, double omega) {
    if (lat.periodic)
        throw std::invalid_argument("stress/momentum measurement needs a finite sample");
    if (lat.nx < 2 || lat.ny < 2)
        throw std::invalid_argument("sample must be at least 2x2 cells");

    const HarmonicSolution sol = solve_prescribed(lat, omega, prescribe_vertices(lat, probe, false));
    const double h = lat.params.h;
    const int nx = lat.nx, ny = lat.ny;

    // mean reactions over the outer rows/columns (corner vertices excluded)
    // and over the interior vertices of the rows adjacent to top and bottom
    const Vec2c top = mean_reaction(lat, sol.reaction,
                                    [&](int ip, int iq) { return iq == ny && std::abs(ip) < nx; });
    const Vec2c bottom = mean_reaction(lat, sol.reaction,
                                       [&](int ip, int iq) { return iq == -ny && std::abs(ip) < nx; });
    const Vec2c below_top = mean_reaction(lat, sol.reaction, [&](int ip, int iq) {
        return iq == ny - 1 && std::abs(ip) < nx;
    });
    const Vec2c above_bottom = mean_reaction(lat, sol.reaction, [&](int ip, int iq) {
        return iq == -(ny - 1) && std::abs(ip) < nx;
    });
    const Vec2c right = mean_reaction(lat, sol.reaction,
                                      [&](int ip, int iq) { return ip == nx && std::abs(iq) < ny; });
    const Vec2c left = mean_reaction(lat, sol.reaction,
                                     [&](int ip, int iq) { return ip == -nx && std::abs(iq) < ny; });

    const Vec2c t_e1 = (right - left) / (4.0 * h);
    const Vec2c t_e2 = ((top + below_top) - (bottom + above_bottom)) / (4.0 * h);

    ProbeResponse out;
    out.probe = probe;
    out.h = h;
    out.sigma << t_e1(0), t_e1(1), t_e2(0), t_e2(1);

    // momentum density of the centre cell: v = -i omega u on each mass
    const Cell* centre = nullptr;
    for (const Cell& c : lat.cells)
        if (c.index[0] == 0 && c.index[1] == 0) centre = &c;
    if (!centre) throw std::logic_error("sample has no centre cell");
    Vec2c mom = Vec2c::Zero();
    for (int idx : centre->hidden)
        mom += lat.nodes[idx].mass * Vec2c(sol.u(2 * idx), sol.u(2 * idx + 1));
    for (int idx : centre->corners)  // quarter share of each corner vertex
        mom += 0.25 * lat.nodes[idx].mass * Vec2c(sol.u(2 * idx), sol.u(2 * idx + 1));
    out.momentum = cplx(0.0, -omega) * mom / (2.0 * h * h);
    return out;
}

ProbeResponse measure_cell_response(const CellParams& params, const GradientState& probe,
                                    double omega, int nx, int ny) {
    return measure_on_lattice(build_finite_sample(params, nx, ny), probe, omega);
}

EffectiveLaw measure_effective_law(const Lattice& lattice, double omega) {
    if (omega == 0.0)
        throw std::invalid_argument(
            "omega must be nonzero to identify the velocity couplings");
    const auto probes = probe_states();
    EffectiveLaw law;
    const cplx miw(0.0, -omega);
    for (int a = 0; a < 4; ++a) {
        const ProbeResponse r = measure_on_lattice(lattice, probes[a], omega);
        law.C.col(a) = r.sigma;
        law.D.col(a) = r.momentum;
    }
    for (int j = 0; j < 2; ++j) {
        const ProbeResponse r = measure_on_lattice(lattice, probes[4 + j], omega);
        law.S.col(j) = r.sigma / miw;
        law.rho.col(j) = r.momentum / miw;
    }
    return law;
}

EffectiveLaw measure_effective_law(const CellParams& params, double omega, int nx, int ny) {
    return measure_effective_law(build_finite_sample(params, nx, ny), omega);
}

ConvergenceReport extract_effective_law(CellParams params, double omega,
                                        const std::vector<double>& h_list, int nx, int ny,
                                        int threads) {
    if (h_list.size() < 3)
        throw std::invalid_argument("need at least three cell sizes to extrapolate");
    for (double h : h_list)
        if (!(h > 0.0)) throw std::invalid_argument("cell sizes must be positive");

    ConvergenceReport rep;
    rep.h_values = h_list;
    std::sort(rep.h_values.begin(), rep.h_values.end(), std::greater<double>());
    const size_t n = rep.h_values.size();
    for (size_t i = 0; i + 1 < n; ++i)
        if (rep.h_values[i] == rep.h_values[i + 1])
            throw std::invalid_argument("cell sizes must be distinct");

    rep.measured.resize(n);
    const auto measure_at = [&](size_t i) {
        CellParams local = params;
        local.h = rep.h_values[i];
        return measure_effective_law(local, omega, nx, ny);
    };
    if (threads > 1) {
        std::vector<std::future<EffectiveLaw>> jobs;
        for (size_t i = 0; i < n; ++i)
            jobs.push_back(std::async(std::launch::async, measure_at, i));
        for (size_t i = 0; i < n; ++i) rep.measured[i] = jobs[i].get();
    } else {
        for (size_t i = 0; i < n; ++i) rep.measured[i] = measure_at(i);
    }
    std::vector<Mat6c> laws;
    for (const EffectiveLaw& law : rep.measured) laws.push_back(block_matrix(law));

    rep.reference = effective_law(params, omega, spring_network_elasticity(params).cast<cplx>());
    const Mat6c ref = block_matrix(rep.reference);

    std::vector<double> diff(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) diff[i] = (laws[i + 1] - laws[i]).norm();
    rep.monotone = std::is_sorted(diff.rbegin(), diff.rend());

    const double floor = 1e-12 * (laws.back().norm() + 1e-300);
    if (diff.back() < floor) {
        rep.at_floor = true;
        rep.rate = std::numeric_limits<double>::infinity();
        rep.extrapolated = law_from_blocks(laws.back());
    } else {
        const double step = rep.h_values[n - 3] / rep.h_values[n - 2];
        rep.rate = std::log(diff[n - 3] / diff[n - 2]) / std::log(step);
        if (rep.monotone && rep.rate > 0.0) {
            // iterated Richardson: the measurement error is a polynomial in
            // h (the drive expansions terminate), so evaluating the
            // interpolating polynomial at h = 0 removes it entirely
            Mat6c extrap = Mat6c::Zero();
            for (size_t i = 0; i < n; ++i) {
                double w = 1.0;
                for (size_t j = 0; j < n; ++j)
                    if (j != i) w *= rep.h_values[j] / (rep.h_values[j] - rep.h_values[i]);
                extrap += w * laws[i];
            }
            rep.extrapolated = law_from_blocks(extrap);
        } else {
            rep.extrapolated = law_from_blocks(laws.back());
        }
    }

    // per-entry comparison against the closed form and fitted orders
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Mat6c extrap = block_matrix(rep.extrapolated);
    for (int r = 0; r < 6; ++r) {
        for (int col = 0; col < 6; ++col) {
            rep.abs_err(r, col) = std::abs(extrap(r, col) - ref(r, col));
            rep.rel_err(r, col) =
                std::abs(ref(r, col)) > 0.0 ? rep.abs_err(r, col) / std::abs(ref(r, col)) : nan;
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int npts = 0;
            for (size_t i = 0; i < n; ++i) {
                const double err = std::abs(laws[i](r, col) - ref(r, col));
                if (err < floor) continue;
                const double x = std::log(rep.h_values[i]);
                const double y = std::log(err);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++npts;
            }
            rep.entry_rates(r, col) =
                npts >= 2 ? (npts * sxy - sx * sy) / (npts * sxx - sx * sx) : nan;
        }
    }
    return rep;
}

std::vector<BoundaryForceEntry> boundary_force_profile(const CellParams& params,
                                                       const GradientState& probe, double omega,
                                                       int nx, int ny, ProfileMode mode) {
    const Lattice lat = build_finite_sample(params, nx, ny);
    const bool boundary_only = mode == ProfileMode::FreeInterior;
    const HarmonicSolution sol =
        solve_prescribed(lat, omega, prescribe_vertices(lat, probe, boundary_only));

    const Assembly sys = assemble(lat);
    const Eigen::VectorXcd elastic_all =
        sys.K * sol.u - (omega * omega) * (sys.M * sol.u);
    const Eigen::VectorXcd rod_all = -(sys.C * sol.lambda);

    std::map<std::array<int, 2>, int> by_grid;
    for (int i = 0; i < lat.vertex_count; ++i) by_grid[lat.grid_index(lat.nodes[i])] = i;

    std::map<int, Vec2c> shares;
    if (mode == ProfileMode::PrescribedAttributed) {
        // interior vertices one step below the top row (or above the bottom
        // row) carry the rod load of a cell whose balancing partner lies
        // outside the sample; hand it to their two outer-row neighbours
        for (int i = 0; i < lat.vertex_count; ++i) {
            const auto g = lat.grid_index(lat.nodes[i]);
            const int ip = g[0], iq = g[1];
            if (std::abs(ip) >= nx || std::abs(iq) != ny - 1) continue;
            const int outer = iq > 0 ? ny : -ny;
            const Vec2c half = 0.5 * Vec2c(rod_all(2 * i), rod_all(2 * i + 1));
            for (int dp : {-1, 1}) {
                const auto it = by_grid.find({ip + dp, outer});
                if (it == by_grid.end()) throw std::logic_error("missing outer-row neighbour");
                shares[it->second] += half;
            }
        }
    }

    std::vector<BoundaryForceEntry> profile;
    for (int i = 0; i < lat.vertex_count; ++i) {
        if (!lat.nodes[i].boundary) continue;
        BoundaryForceEntry e;
        e.node = i;
        e.pos = lat.nodes[i].pos;
        e.elastic = Vec2c(elastic_all(2 * i), elastic_all(2 * i + 1));
        e.rod = Vec2c(rod_all(2 * i), rod_all(2 * i + 1));
        e.attributed = e.rod;
        const auto it = shares.find(i);
        if (it != shares.end()) e.attributed += it->second;
        e.total = e.elastic + e.attributed;
        profile.push_back(e);
    }
    return profile;
}

Eigen::Matrix4d spring_network_elasticity(const CellParams& params) {
    const Lattice cell = build_periodic_cell(params);
    const auto& T = *cell.translation_vectors;

    const auto energy = [&](const Eigen::Matrix2d& G) {
        double W = 0.0;
        for (const Spring& s : cell.springs) {
            const Eigen::Vector2d tau = s.shift[0] * T[0] + s.shift[1] * T[1];
            const Eigen::Vector2d n = tau.normalized();
            const double stretch = n.dot(G * tau);
            W += 0.5 * s.k * stretch * stretch;
        }
        return W / (2.0 * params.h * params.h);
    };

    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    for (int i = 0; i < 4; ++i) {
        const Eigen::Matrix2d Ei = unit_gradient(i);
        C(i, i) = 2.0 * energy(Ei);
        for (int j = i + 1; j < 4; ++j) {
            const Eigen::Matrix2d Ej = unit_gradient(j);
            C(i, j) = C(j, i) = energy(Ei + Ej) - energy(Ei) - energy(Ej);
        }
    }
    return C;
}

PerturbationStudy perturbation_study(const CellParams& params, double omega,
                                     const std::vector<double>& epsilons, int trials,
                                     std::uint64_t seed, int nx, int ny) {
    if (epsilons.empty()) throw std::invalid_argument("epsilon list is empty");
    for (double e : epsilons)
        if (!(e >= 0.0)) throw std::invalid_argument("epsilons must be non-negative");
    if (trials < 1) throw std::invalid_argument("need at least one trial");

    const Lattice base = build_finite_sample(params, nx, ny);
    const Mat6c L0 = block_matrix(measure_effective_law(base, omega));
    const double scale = L0.norm();
    if (scale == 0.0) throw std::invalid_argument("baseline law vanishes");

    PerturbationStudy study;
    for (double eps : epsilons) {
        PerturbationPoint pt;
        pt.epsilon = eps;
        double sum = 0.0;
        int kept = 0;
        for (int t = 0; t < trials; ++t) {
            Lattice jittered = base;
            std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
            apply_jitter(jittered, eps, rng);
            try {
                const double dev =
                    (block_matrix(measure_effective_law(jittered, omega)) - L0).norm() / scale;
                sum += dev;
                pt.max_dev = std::max(pt.max_dev, dev);
                ++kept;
            } catch (const SingularSystemError&) {
                ++pt.excluded;  // resonant draw: report, do not average in
            }
        }
        if (kept == 0) throw SingularSystemError("all perturbation trials resonated", {});
        pt.mean_dev = sum / kept;
        study.points.push_back(pt);
    }

    // least-squares slope of log(mean deviation) against log(epsilon),
    // skipping eps = 0 points (exactly zero deviation by construction)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int npts = 0;
    for (const auto& pt : study.points) {
        if (pt.epsilon <= 0.0) continue;
        const double x = std::log(pt.epsilon);
        const double y = std::log(std::max(pt.mean_dev, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++npts;
    }
    if (npts >= 2) study.slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    return study;
}

}  // namespace willis
