#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "willis/lattice.hpp"

using namespace willis;

namespace {

CellParams demo_params(double h = 0.01) {
    CellParams p;
    p.h = h;
    p.K = 1.0;
    p.m = 2.0;
    p.c = 0.5;
    p.delta = cplx(0.1, 0.0);
    return p;
}

int count_vertices(const Lattice& lat) {
    return static_cast<int>(std::count_if(lat.nodes.begin(), lat.nodes.end(), [](const Node& n) {
        return n.kind == NodeKind::Vertex;
    }));
}

}  // namespace

TEST_CASE("periodic cell geometry and masses") {
    CellParams p = demo_params(1.0);
    const Lattice lat = build_periodic_cell(p);
    CHECK(lat.periodic);
    CHECK(lat.vertex_count == 1);
    CHECK(lat.nodes.size() == 3);
    CHECK(lat.springs.size() == 2);
    CHECK(lat.rods.size() == 4);

    // hidden nodes at (-+ c h, 0) relative to the cell centre (the origin)
    CHECK((lat.nodes[1].pos - Eigen::Vector2d(-0.5, 0.0)).norm() < 1e-15);
    CHECK((lat.nodes[2].pos - Eigen::Vector2d(0.5, 0.0)).norm() < 1e-15);
    for (const Rod& r : lat.rods) CHECK(r.l0 == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));

    // translation vectors and cell area
    REQUIRE(lat.translation_vectors.has_value());
    const auto& T = *lat.translation_vectors;
    CHECK((T[0] - Eigen::Vector2d(1.0, 1.0)).norm() == 0.0);
    CHECK((T[1] - Eigen::Vector2d(1.0, -1.0)).norm() == 0.0);
    CHECK(std::abs(T[0].x() * T[1].y() - T[0].y() * T[1].x()) == doctest::Approx(2.0));

    CHECK(validate(lat).empty());
}

TEST_CASE("pair masses follow the h scalings") {
    CellParams p = demo_params(0.01);  // m=2, delta=0.1
    const Lattice lat = build_periodic_cell(p);
    CHECK(lat.nodes[1].mass == cplx(0.02, 0.0));
    CHECK(std::abs(lat.nodes[2].mass - cplx(-0.02 + 1e-5, 0.0)) < 1e-18);

    CellParams q = demo_params(0.01);
    q.second_pair = SecondPair{0.25, 2.0};
    const Lattice two = build_periodic_cell(q);
    REQUIRE(two.nodes.size() == 5);
    CHECK(two.nodes[3].mass == cplx(-0.01 * 0.25 + 1e-5, 0.0));
    CHECK(two.nodes[4].mass == cplx(0.01 * 0.25, 0.0));
    CHECK((two.nodes[3].pos - Eigen::Vector2d(-0.02, 0.0)).norm() < 1e-15);
    CHECK(validate(two).empty());
}

TEST_CASE("finite sample vertex set matches direct point enumeration") {
    for (auto [nx, ny] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{5, 5}}) {
        CellParams p = demo_params(0.5);
        const Lattice lat = build_finite_sample(p, nx, ny);

        // oracle: lattice points (p, q), p+q odd, covering all cell corners
        std::set<std::pair<int, int>> expected;
        for (int q = -1; q <= 2 * ny - 1; ++q)
            for (int pp = -1; pp <= 2 * nx - 1; ++pp)
                if (((pp + q) % 2 + 2) % 2 == 1) expected.insert({pp, q});

        CHECK(count_vertices(lat) == static_cast<int>(expected.size()));
        CHECK(lat.vertex_count == static_cast<int>(expected.size()));
        CHECK(count_vertices(lat) == 2 * nx * ny + nx + ny);

        std::set<std::pair<int, int>> got;
        for (int i = 0; i < lat.vertex_count; ++i) {
            const auto [ip, iq] = lat.grid_index(lat.nodes[i]);
            got.insert({ip + (nx - 1), iq + (ny - 1)});
        }
        CHECK(got == expected);

        // cells cover both centre parities inside the box
        CHECK(static_cast<int>(lat.cells.size()) == nx * ny + (nx - 1) * (ny - 1));
        CHECK(validate(lat).empty());
    }
}

TEST_CASE("finite sample is centred and boundary-flagged") {
    const int nx = 7, ny = 5;
    CellParams p = demo_params(0.01);
    const Lattice lat = build_finite_sample(p, nx, ny);

    // symmetric footprint around the origin
    double max_x = 0, max_y = 0;
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (int i = 0; i < lat.vertex_count; ++i) {
        max_x = std::max(max_x, std::abs(lat.nodes[i].pos.x()));
        max_y = std::max(max_y, std::abs(lat.nodes[i].pos.y()));
        centroid += lat.nodes[i].pos;
    }
    CHECK(max_x == doctest::Approx(nx * p.h));
    CHECK(max_y == doctest::Approx(ny * p.h));
    CHECK(centroid.norm() < 1e-12);

    // one cell sits exactly at the origin (odd nx, ny)
    const bool origin_cell = std::any_of(lat.cells.begin(), lat.cells.end(), [](const Cell& c) {
        return c.center.norm() < 1e-15;
    });
    CHECK(origin_cell);

    // boundary count: nx on top and bottom rows, ny on each side column
    int boundary = 0;
    for (int i = 0; i < lat.vertex_count; ++i)
        if (lat.nodes[i].boundary) ++boundary;
    CHECK(boundary == 2 * (nx + ny));

    // top row has nx vertices, the row just below nx+1 (two of them side-boundary)
    int top = 0, below = 0, below_interior = 0;
    for (int i = 0; i < lat.vertex_count; ++i) {
        const auto [ip, iq] = lat.grid_index(lat.nodes[i]);
        if (iq == ny) ++top;
        if (iq == ny - 1) {
            ++below;
            if (!lat.nodes[i].boundary) ++below_interior;
        }
    }
    CHECK(top == nx);
    CHECK(below == nx + 1);
    CHECK(below_interior == nx - 1);
}

TEST_CASE("every rod stays inside one cell footprint and springs are deduplicated") {
    CellParams p = demo_params(0.02);
    p.second_pair = SecondPair{0.7, 0.8};
    const Lattice lat = build_finite_sample(p, 5, 5);

    for (const Cell& cell : lat.cells) {
        for (int hid : cell.hidden) {
            CHECK(std::abs(lat.nodes[hid].pos.y() - cell.center.y()) < 1e-15);
            CHECK(std::abs(lat.nodes[hid].pos.x() - cell.center.x()) < p.h);
        }
    }
    // rods join a hidden node to the top/bottom corner of its own cell
    for (const Rod& r : lat.rods) {
        const Eigen::Vector2d d = lat.nodes[r.b].pos - lat.nodes[r.a].pos;
        CHECK(std::abs(std::abs(d.y()) - p.h) < 1e-15);
        CHECK(std::abs(d.x()) < p.h);
    }
    CHECK(lat.rods.size() == 4 * 2 * lat.cells.size());

    // spring edge set has no duplicates
    std::set<std::pair<int, int>> edges;
    for (const Spring& s : lat.springs) {
        const auto key = std::minmax(s.a, s.b);
        CHECK(edges.insert(key).second);
        CHECK(s.l0 == doctest::Approx(p.h * std::sqrt(2.0)).epsilon(1e-15));
    }
    CHECK(validate(lat).empty());
}

TEST_CASE("total hidden mass counts pairs, positive mass scales like 1/h") {
    // fixed sample area: halve h, double nx/ny
    CellParams p1 = demo_params(0.02);
    CellParams p2 = demo_params(0.01);
    const Lattice lat1 = build_finite_sample(p1, 20, 20);
    const Lattice lat2 = build_finite_sample(p2, 40, 40);

    auto totals = [](const Lattice& lat) {
        cplx net = 0.0;
        double positive = 0.0;
        for (const Node& n : lat.nodes)
            if (n.kind == NodeKind::Hidden) {
                net += n.mass;
                if (n.mass.real() > 0.0) positive += n.mass.real();
            }
        return std::pair{net, positive};
    };
    const auto [net1, pos1] = totals(lat1);
    const auto [net2, pos2] = totals(lat2);

    // net mass = pairs * delta h^2 exactly
    const cplx want1 = static_cast<double>(lat1.cells.size()) * p1.delta * p1.h * p1.h;
    CHECK(std::abs(net1 - want1) < 1e-12 * std::abs(want1));

    // equal sampled areas, so positive mass should double when h halves
    const double area1 = lat1.cells.size() * 2 * p1.h * p1.h;
    const double area2 = lat2.cells.size() * 2 * p2.h * p2.h;
    const double ratio = (pos2 / area2) / (pos1 / area1);
    CHECK(std::abs(ratio - 2.0) < 0.02 * 2.0);
}

TEST_CASE("validate flags corrupted lattices") {
    CellParams p = demo_params(0.01);
    Lattice lat = build_finite_sample(p, 3, 3);
    CHECK(validate(lat).empty());

    SUBCASE("perturbed rod rest length") {
        lat.rods[5].l0 += 1e-3 * p.h;
        const auto report = validate(lat);
        REQUIRE(report.size() == 1);
        CHECK(report[0].find("rod 5") != std::string::npos);
    }
    SUBCASE("pair masses that do not sum to delta h^2") {
        lat.nodes[lat.cells[0].hidden[0]].mass += 0.5;
        const auto report = validate(lat);
        REQUIRE(report.size() == 1);
        CHECK(report[0].find("mass sum") != std::string::npos);
    }
    SUBCASE("duplicate spring") {
        lat.springs.push_back(lat.springs.front());
        const auto report = validate(lat);
        REQUIRE(report.size() == 1);
        CHECK(report[0].find("duplicates") != std::string::npos);
    }
    SUBCASE("non-positive stiffness") {
        lat.springs[2].k = 0.0;
        REQUIRE(validate(lat).size() == 1);
    }
    SUBCASE("boundary flag flipped") {
        lat.nodes[0].boundary = false;  // node 0 is the bottom-left-most vertex
        REQUIRE(validate(lat).size() == 1);
    }
}

TEST_CASE("stiffness exponent option scales spring constants") {
    CellParams p = demo_params(0.01);
    LatticeOptions opt;
    opt.stiffness_exponent = 1.0;
    const Lattice lat = build_finite_sample(p, 2, 2, opt);
    for (const Spring& s : lat.springs) CHECK(s.k == doctest::Approx(p.K * p.h).epsilon(1e-15));

    LatticeOptions vm;
    vm.vertex_mass = 0.125;
    const Lattice lat2 = build_periodic_cell(p, vm);
    CHECK(lat2.nodes[0].mass == cplx(0.125, 0.0));
    CHECK(validate(lat2).empty());
}

TEST_CASE("lattice JSON round trip is byte-stable") {
    CellParams p = demo_params(0.01);
    p.second_pair = SecondPair{0.25, 2.0};
    p.delta = cplx(1.0, 0.2);
    for (const bool periodic : {true, false}) {
        const Lattice lat =
            periodic ? build_periodic_cell(p) : build_finite_sample(p, 3, 4);
        const nlohmann::ordered_json doc = lattice_to_json(lat);

        // fixed field names
        CHECK(doc.at("nodes").at(0).contains("id"));
        CHECK(doc.at("nodes").at(0).contains("x"));
        CHECK(doc.at("nodes").at(0).contains("y"));
        CHECK(doc.at("nodes").at(0).contains("mass_re"));
        CHECK(doc.at("nodes").at(0).contains("mass_im"));
        CHECK(doc.at("nodes").at(0).contains("kind"));
        CHECK(doc.at("springs").at(0).contains("a"));
        CHECK(doc.at("springs").at(0).contains("b"));
        CHECK(doc.at("springs").at(0).contains("k"));
        CHECK(doc.at("springs").at(0).contains("l0"));
        CHECK(doc.at("rods").at(0).contains("l0"));
        CHECK(doc.at("springs").at(0).contains("shift") == periodic);

        const Lattice back = lattice_from_json(doc);
        CHECK(validate(back).empty());
        CHECK(back.vertex_count == lat.vertex_count);
        CHECK(back.nodes.size() == lat.nodes.size());
        CHECK(back.springs.size() == lat.springs.size());
        CHECK(back.rods.size() == lat.rods.size());
        CHECK(back.cells.size() == lat.cells.size());
        for (size_t i = 0; i < lat.nodes.size(); ++i) {
            CHECK(back.nodes[i].boundary == lat.nodes[i].boundary);
            CHECK((back.nodes[i].pos - lat.nodes[i].pos).norm() == 0.0);
        }

        const std::string once = doc.dump(2);
        const std::string twice = lattice_to_json(back).dump(2);
        CHECK(once == twice);
    }
}

TEST_CASE("builder rejects bad inputs") {
    CellParams p = demo_params(0.01);
    CHECK_THROWS_AS(build_finite_sample(p, 0, 3), ConfigError);
    p.c = 0.0;
    CHECK_THROWS_AS(build_periodic_cell(p), ConfigError);

    LatticeSpec spec;
    spec.cell = demo_params(0.05);
    spec.nx = 2;
    spec.ny = 3;
    spec.kind = LatticeSpec::Kind::FiniteSample;
    const Lattice lat = build(spec);
    CHECK(static_cast<int>(lat.cells.size()) == 2 * 3 + 1 * 2);
    spec.kind = LatticeSpec::Kind::PeriodicCell;
    CHECK(build(spec).periodic);
}
