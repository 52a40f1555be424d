#include "willis/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <map>
#include <set>
#include <string>
#include <tuple>

namespace willis {

namespace {

std::string msgf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[256];
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return std::string(buf);
}

Eigen::Vector2d translation(const Lattice& lat, const std::array<int, 2>& shift) {
    if (shift[0] == 0 && shift[1] == 0) return Eigen::Vector2d::Zero();
    if (!lat.translation_vectors)
        throw std::logic_error("nonzero image shift on a lattice without translation vectors");
    const auto& T = *lat.translation_vectors;
    return shift[0] * T[0] + shift[1] * T[1];
}

/// Appends the hidden nodes and rods of one cell; corner ids are
/// (left, bottom, right, top).  Returns the hidden node ids in order.
std::vector<int> emit_cell_interior(Lattice& lat, const Eigen::Vector2d& center,
                                    const std::array<int, 4>& corners,
                                    const std::array<std::array<int, 2>, 4>& corner_shifts) {
    const CellParams& P = lat.params;
    const double h = P.h;
    const cplx dh2 = P.delta * h * h;
    const double rod_len = h * std::sqrt(1.0 + P.c * P.c);

    struct HiddenSpec {
        double offset;  // along x1 from the cell centre
        cplx mass;
        double l0;
    };
    std::vector<HiddenSpec> specs;
    specs.push_back({-P.c * h, h * P.m, rod_len});
    specs.push_back({+P.c * h, -h * P.m + dh2, rod_len});
    if (P.has_second_pair()) {
        const auto& sp = *P.second_pair;
        const double rod_len2 = h * std::sqrt(1.0 + sp.c_prime * sp.c_prime);
        specs.push_back({-sp.c_prime * h, -h * sp.m_prime + dh2, rod_len2});
        specs.push_back({+sp.c_prime * h, h * sp.m_prime, rod_len2});
    }

    std::vector<int> ids;
    for (const auto& s : specs) {
        Node n;
        n.id = static_cast<int>(lat.nodes.size());
        n.pos = center + Eigen::Vector2d(s.offset, 0.0);
        n.mass = s.mass;
        n.kind = NodeKind::Hidden;
        lat.nodes.push_back(n);
        ids.push_back(n.id);
        // one rod up to the top corner, one down to the bottom corner
        lat.rods.push_back({n.id, corners[3], s.l0, corner_shifts[3]});
        lat.rods.push_back({n.id, corners[1], s.l0, corner_shifts[1]});
    }
    return ids;
}

}  // namespace

std::array<int, 2> Lattice::grid_index(const Node& n) const {
    return {static_cast<int>(std::llround(n.pos.x() / params.h)),
            static_cast<int>(std::llround(n.pos.y() / params.h))};
}

Lattice build_periodic_cell(const CellParams& params, const LatticeOptions& options) {
    params.validate();
    Lattice lat;
    lat.params = params;
    lat.periodic = true;
    const double h = params.h;
    lat.translation_vectors = {Eigen::Vector2d(h, h), Eigen::Vector2d(h, -h)};

    Node v;
    v.id = 0;
    v.pos = Eigen::Vector2d(0.0, h);  // top corner of the cell centred at the origin
    v.mass = options.vertex_mass;
    v.kind = NodeKind::Vertex;
    lat.nodes.push_back(v);
    lat.vertex_count = 1;

    // Two spring orbits: the edge towards the left corner (one cell
    // translation back along T1) and towards the right corner (one along T2).
    const double k = params.K * std::pow(h, options.stiffness_exponent);
    const double edge = h * std::sqrt(2.0);
    lat.springs.push_back({0, 0, k, edge, {-1, 0}});
    lat.springs.push_back({0, 0, k, edge, {0, 1}});

    // Hidden nodes of the cell at the origin; their top corner is the stored
    // vertex itself, the bottom corner its image shifted by T2 - T1.
    emit_cell_interior(lat, Eigen::Vector2d::Zero(), {0, 0, 0, 0},
                       {{{0, 0}, {-1, 1}, {0, 0}, {0, 0}}});
    return lat;
}

Lattice build_finite_sample(const CellParams& params, int nx, int ny,
                            const LatticeOptions& options) {
    params.validate();
    if (nx < 1 || ny < 1) throw ConfigError("sample", "nx and ny must be at least 1");
    Lattice lat;
    lat.params = params;
    lat.periodic = false;
    lat.nx = nx;
    lat.ny = ny;
    const double h = params.h;
    const int px0 = nx - 1, qy0 = ny - 1;  // recentre so the sample straddles the origin
    auto pos_of = [&](int p, int q) { return Eigen::Vector2d((p - px0) * h, (q - qy0) * h); };

    // Vertices: corners of the cells, i.e. grid points with p + q odd inside
    // the box [-1, 2nx-1] x [-1, 2ny-1]; scan bottom-up, left-to-right.
    std::map<std::pair<int, int>, int> vid;
    for (int q = -1; q <= 2 * ny - 1; ++q) {
        for (int p = -1; p <= 2 * nx - 1; ++p) {
            if (((p + q) % 2 + 2) % 2 != 1) continue;
            Node n;
            n.id = static_cast<int>(lat.nodes.size());
            n.pos = pos_of(p, q);
            n.mass = options.vertex_mass;
            n.kind = NodeKind::Vertex;
            n.boundary = (p == -1 || p == 2 * nx - 1 || q == -1 || q == 2 * ny - 1);
            vid[{p, q}] = n.id;
            lat.nodes.push_back(n);
        }
    }
    lat.vertex_count = static_cast<int>(lat.nodes.size());

    // Cells: centres with p + q even inside [0, 2nx-2] x [0, 2ny-2].
    const double k = params.K * std::pow(h, options.stiffness_exponent);
    const double edge = h * std::sqrt(2.0);
    std::set<std::pair<int, int>> seen_edges;
    auto add_spring = [&](int a, int b) {
        auto key = std::minmax(a, b);
        if (!seen_edges.insert(key).second) return;
        lat.springs.push_back({key.first, key.second, k, edge, {0, 0}});
    };
    for (int q = 0; q <= 2 * ny - 2; ++q) {
        for (int p = 0; p <= 2 * nx - 2; ++p) {
            if (((p + q) % 2 + 2) % 2 != 0) continue;
            Cell cell;
            cell.center = pos_of(p, q);
            cell.index = {p - px0, q - qy0};
            cell.corners = {vid.at({p - 1, q}), vid.at({p, q - 1}), vid.at({p + 1, q}),
                            vid.at({p, q + 1})};
            add_spring(cell.corners[0], cell.corners[1]);
            add_spring(cell.corners[1], cell.corners[2]);
            add_spring(cell.corners[2], cell.corners[3]);
            add_spring(cell.corners[3], cell.corners[0]);
            cell.hidden = emit_cell_interior(lat, cell.center, cell.corners,
                                             {{{0, 0}, {0, 0}, {0, 0}, {0, 0}}});
            lat.cells.push_back(cell);
        }
    }
    return lat;
}

Lattice build(const LatticeSpec& spec) {
    if (spec.kind == LatticeSpec::Kind::PeriodicCell)
        return build_periodic_cell(spec.cell, spec.options);
    return build_finite_sample(spec.cell, spec.nx, spec.ny, spec.options);
}

std::vector<std::string> validate(const Lattice& lat) {
    std::vector<std::string> bad;
    const double h = lat.params.h;
    const int n = static_cast<int>(lat.nodes.size());

    for (int i = 0; i < n; ++i)
        if (lat.nodes[i].id != i) bad.push_back(msgf("node %d carries id %d", i, lat.nodes[i].id));
    for (int i = 0; i < n; ++i) {
        bool is_vertex = lat.nodes[i].kind == NodeKind::Vertex;
        if (is_vertex != (i < lat.vertex_count)) {
            bad.push_back(msgf("node %d breaks the vertices-then-hidden ordering", i));
            break;
        }
    }

    auto in_range = [&](int id) { return id >= 0 && id < n; };
    auto geom_len = [&](int a, int b, const std::array<int, 2>& shift) {
        return (lat.nodes[b].pos + translation(lat, shift) - lat.nodes[a].pos).norm();
    };

    std::set<std::tuple<int, int, int, int>> spring_keys;
    for (size_t i = 0; i < lat.springs.size(); ++i) {
        const Spring& s = lat.springs[i];
        if (!in_range(s.a) || !in_range(s.b)) {
            bad.push_back(msgf("spring %zu references a missing node", i));
            continue;
        }
        if (lat.nodes[s.a].kind != NodeKind::Vertex || lat.nodes[s.b].kind != NodeKind::Vertex)
            bad.push_back(msgf("spring %zu must join two network vertices", i));
        if (!(s.k > 0.0)) bad.push_back(msgf("spring %zu has non-positive stiffness", i));
        if (!lat.periodic && (s.shift[0] != 0 || s.shift[1] != 0))
            bad.push_back(msgf("spring %zu carries an image shift in a finite sample", i));
        const double g = geom_len(s.a, s.b, s.shift);
        if (std::abs(g - s.l0) > 1e-9 * h)
            bad.push_back(msgf("spring %zu rest length %.12g != geometric length %.12g", i, s.l0, g));
        // canonical (a, b, shift) with a <= b for duplicate detection
        int a = s.a, b = s.b, s1 = s.shift[0], s2 = s.shift[1];
        if (a > b || (a == b && (s1 < 0 || (s1 == 0 && s2 < 0)))) {
            std::swap(a, b);
            s1 = -s1;
            s2 = -s2;
        }
        if (!spring_keys.insert({a, b, s1, s2}).second)
            bad.push_back(msgf("spring %zu duplicates an existing edge (%d,%d)", i, s.a, s.b));
    }

    std::map<int, std::vector<Eigen::Vector2d>> rod_dirs;
    for (size_t i = 0; i < lat.rods.size(); ++i) {
        const Rod& r = lat.rods[i];
        if (!in_range(r.a) || !in_range(r.b)) {
            bad.push_back(msgf("rod %zu references a missing node", i));
            continue;
        }
        if (lat.nodes[r.a].kind != NodeKind::Hidden || lat.nodes[r.b].kind != NodeKind::Vertex)
            bad.push_back(msgf("rod %zu must join a hidden node to a vertex", i));
        const double g = geom_len(r.a, r.b, r.shift);
        if (std::abs(g - r.l0) > 1e-9 * h)
            bad.push_back(msgf("rod %zu rest length %.12g != geometric length %.12g", i, r.l0, g));
        if (g > 0.0)
            rod_dirs[r.a].push_back(
                (lat.nodes[r.b].pos + translation(lat, r.shift) - lat.nodes[r.a].pos) / g);
    }
    for (int i = lat.vertex_count; i < n; ++i) {
        const auto it = rod_dirs.find(i);
        const size_t count = it == rod_dirs.end() ? 0 : it->second.size();
        if (count != 2) {
            bad.push_back(msgf("hidden node %d has %zu rods, expected 2", i, count));
            continue;
        }
        const auto& d = it->second;
        const double det = d[0].x() * d[1].y() - d[0].y() * d[1].x();
        if (std::abs(det) < 1e-9)
            bad.push_back(msgf("hidden node %d has parallel rods (its motion is unconstrained)", i));
    }

    const cplx pair_sum = lat.params.delta * h * h;
    auto check_pair = [&](int e, int f, const char* what) {
        const cplx got = lat.nodes[e].mass + lat.nodes[f].mass;
        if (std::abs(got - pair_sum) > 1e-9 * (std::abs(pair_sum) + h * h))
            bad.push_back(msgf("%s mass sum (%.9g,%.9g) != delta*h^2", what, got.real(), got.imag()));
    };

    if (lat.periodic) {
        if (!lat.translation_vectors) {
            bad.push_back("periodic lattice lacks translation vectors");
        } else {
            const auto& T = *lat.translation_vectors;
            if ((T[0] - Eigen::Vector2d(h, h)).norm() > 1e-12 * h ||
                (T[1] - Eigen::Vector2d(h, -h)).norm() > 1e-12 * h)
                bad.push_back("translation vectors are not (h,h) and (h,-h)");
            const double area = std::abs(T[0].x() * T[1].y() - T[0].y() * T[1].x());
            if (std::abs(area - 2 * h * h) > 1e-12 * h * h)
                bad.push_back(msgf("primitive cell area %.12g != 2 h^2", area));
        }
        const int hidden = n - lat.vertex_count;
        const int expect = lat.params.has_second_pair() ? 4 : 2;
        if (hidden != expect)
            bad.push_back(msgf("periodic cell has %d hidden nodes, expected %d", hidden, expect));
        else
            for (int e = lat.vertex_count; e + 1 < n; e += 2) check_pair(e, e + 1, "hidden pair");
    } else {
        const size_t per_cell = lat.params.has_second_pair() ? 4 : 2;
        for (size_t ci = 0; ci < lat.cells.size(); ++ci) {
            const Cell& cell = lat.cells[ci];
            if (cell.hidden.size() != per_cell) {
                bad.push_back(msgf("cell %zu lists %zu hidden nodes, expected %zu", ci,
                                   cell.hidden.size(), per_cell));
                continue;
            }
            const Eigen::Vector2d off[4] = {{-h, 0}, {0, -h}, {h, 0}, {0, h}};
            for (int c = 0; c < 4; ++c) {
                if (!in_range(cell.corners[c])) {
                    bad.push_back(msgf("cell %zu corner %d missing", ci, c));
                    continue;
                }
                if ((lat.nodes[cell.corners[c]].pos - cell.center - off[c]).norm() > 1e-9 * h)
                    bad.push_back(msgf("cell %zu corner %d is misplaced", ci, c));
            }
            check_pair(cell.hidden[0], cell.hidden[1], "cell pair");
            if (per_cell == 4) check_pair(cell.hidden[2], cell.hidden[3], "cell second pair");
        }
        for (int i = 0; i < lat.vertex_count; ++i) {
            const auto [ip, iq] = lat.grid_index(lat.nodes[i]);
            const bool edge = ip == -lat.nx || ip == lat.nx || iq == -lat.ny || iq == lat.ny;
            if (edge != lat.nodes[i].boundary)
                bad.push_back(msgf("vertex %d boundary flag disagrees with its position", i));
        }
    }
    return bad;
}

nlohmann::ordered_json lattice_to_json(const Lattice& lat) {
    nlohmann::ordered_json doc;
    doc["format"] = "willis-lattice/1";
    doc["periodic"] = lat.periodic;
    doc["nx"] = lat.nx;
    doc["ny"] = lat.ny;
    nlohmann::ordered_json cellj;
    cellj["h"] = lat.params.h;
    cellj["K"] = lat.params.K;
    cellj["m"] = lat.params.m;
    cellj["c"] = lat.params.c;
    cellj["delta"] = {{"re", lat.params.delta.real()}, {"im", lat.params.delta.imag()}};
    if (lat.params.has_second_pair())
        cellj["second_pair"] = {{"m_prime", lat.params.second_pair->m_prime},
                                {"c_prime", lat.params.second_pair->c_prime}};
    doc["cell"] = std::move(cellj);
    if (lat.translation_vectors) {
        const auto& T = *lat.translation_vectors;
        doc["translation_vectors"] = {{T[0].x(), T[0].y()}, {T[1].x(), T[1].y()}};
    }
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const Node& nd : lat.nodes) {
        nlohmann::ordered_json j;
        j["id"] = nd.id;
        j["x"] = nd.pos.x();
        j["y"] = nd.pos.y();
        j["mass_re"] = nd.mass.real();
        j["mass_im"] = nd.mass.imag();
        j["kind"] = nd.kind == NodeKind::Vertex ? "vertex" : "hidden";
        doc["nodes"].push_back(std::move(j));
    }
    doc["springs"] = nlohmann::ordered_json::array();
    for (const Spring& s : lat.springs) {
        nlohmann::ordered_json j;
        j["a"] = s.a;
        j["b"] = s.b;
        j["k"] = s.k;
        j["l0"] = s.l0;
        if (lat.periodic) j["shift"] = {s.shift[0], s.shift[1]};
        doc["springs"].push_back(std::move(j));
    }
    doc["rods"] = nlohmann::ordered_json::array();
    for (const Rod& r : lat.rods) {
        nlohmann::ordered_json j;
        j["a"] = r.a;
        j["b"] = r.b;
        j["l0"] = r.l0;
        if (lat.periodic) j["shift"] = {r.shift[0], r.shift[1]};
        doc["rods"].push_back(std::move(j));
    }
    doc["cells"] = nlohmann::ordered_json::array();
    for (const Cell& c : lat.cells) {
        nlohmann::ordered_json j;
        j["cx"] = c.center.x();
        j["cy"] = c.center.y();
        j["index"] = {c.index[0], c.index[1]};
        j["corners"] = {c.corners[0], c.corners[1], c.corners[2], c.corners[3]};
        j["hidden"] = c.hidden;
        doc["cells"].push_back(std::move(j));
    }
    return doc;
}

namespace {

CellParams cell_params_from_json(const nlohmann::ordered_json& j) {
    CellParams p;
    try {
        p.h = j.at("h").get<double>();
        p.K = j.at("K").get<double>();
        p.m = j.at("m").get<double>();
        p.c = j.at("c").get<double>();
        p.delta = cplx(j.at("delta").at("re").get<double>(), j.at("delta").at("im").get<double>());
        if (j.contains("second_pair") && !j.at("second_pair").is_null())
            p.second_pair = SecondPair{j.at("second_pair").at("m_prime").get<double>(),
                                       j.at("second_pair").at("c_prime").get<double>()};
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ConfigError("cell", e.what());
    }
    return p;
}

}  // namespace

Lattice lattice_from_json(const nlohmann::ordered_json& doc) {
    Lattice lat;
    try {
        if (doc.at("format").get<std::string>() != "willis-lattice/1")
            throw ConfigError("format", "unrecognised lattice document format");
        lat.params = cell_params_from_json(doc.at("cell"));
        lat.periodic = doc.at("periodic").get<bool>();
        lat.nx = doc.at("nx").get<int>();
        lat.ny = doc.at("ny").get<int>();
        if (doc.contains("translation_vectors")) {
            const auto& tv = doc.at("translation_vectors");
            lat.translation_vectors = {
                Eigen::Vector2d(tv.at(0).at(0).get<double>(), tv.at(0).at(1).get<double>()),
                Eigen::Vector2d(tv.at(1).at(0).get<double>(), tv.at(1).at(1).get<double>())};
        }
        for (const auto& j : doc.at("nodes")) {
            Node nd;
            nd.id = j.at("id").get<int>();
            nd.pos = {j.at("x").get<double>(), j.at("y").get<double>()};
            nd.mass = cplx(j.at("mass_re").get<double>(), j.at("mass_im").get<double>());
            const std::string kind = j.at("kind").get<std::string>();
            if (kind != "vertex" && kind != "hidden")
                throw ConfigError("nodes.kind", "must be 'vertex' or 'hidden'");
            nd.kind = kind == "vertex" ? NodeKind::Vertex : NodeKind::Hidden;
            lat.nodes.push_back(nd);
        }
        auto read_shift = [&](const nlohmann::ordered_json& j) {
            std::array<int, 2> s{0, 0};
            if (j.contains("shift")) s = {j.at("shift").at(0).get<int>(), j.at("shift").at(1).get<int>()};
            return s;
        };
        for (const auto& j : doc.at("springs"))
            lat.springs.push_back({j.at("a").get<int>(), j.at("b").get<int>(),
                                   j.at("k").get<double>(), j.at("l0").get<double>(),
                                   read_shift(j)});
        for (const auto& j : doc.at("rods"))
            lat.rods.push_back({j.at("a").get<int>(), j.at("b").get<int>(),
                                j.at("l0").get<double>(), read_shift(j)});
        if (doc.contains("cells"))
            for (const auto& j : doc.at("cells")) {
                Cell c;
                c.center = {j.at("cx").get<double>(), j.at("cy").get<double>()};
                c.index = {j.at("index").at(0).get<int>(), j.at("index").at(1).get<int>()};
                for (int k = 0; k < 4; ++k) c.corners[k] = j.at("corners").at(k).get<int>();
                c.hidden = j.at("hidden").get<std::vector<int>>();
                lat.cells.push_back(c);
            }
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ConfigError("lattice", e.what());
    }
    // Derived state: vertex count and boundary flags are not serialized.
    lat.vertex_count = static_cast<int>(
        std::count_if(lat.nodes.begin(), lat.nodes.end(),
                      [](const Node& nd) { return nd.kind == NodeKind::Vertex; }));
    if (!lat.periodic && lat.nx > 0 && lat.ny > 0)
        for (Node& nd : lat.nodes) {
            if (nd.kind != NodeKind::Vertex) continue;
            const auto [ip, iq] = lat.grid_index(nd);
            nd.boundary = ip == -lat.nx || ip == lat.nx || iq == -lat.ny || iq == lat.ny;
        }
    return lat;
}

}  // namespace willis
