#pragma once

// Lattice construction: a periodic primitive cell or a finite rectangular
// sample of the diamond spring network with hidden mass pairs.
//
// Grid bookkeeping: network vertices live on the integer points (p, q) with
// p + q odd, cell centres on p + q even; a point (p, q) sits at physical
// position ((p - px0) h, (q - qy0) h) where the offset recentres the sample
// on the origin.  A finite nx-by-ny sample holds the cells with
// 0 <= p <= 2(nx-1), 0 <= q <= 2(ny-1); its bounding box is then
// [-nx h, nx h] x [-ny h, ny h] in centred coordinates, the top vertex row
// holds nx vertices and the row below it nx - 1.
//
// Rest lengths: springs h*sqrt(2) (the diamond edges), rods h*sqrt(1 + c^2).
// Spring stiffness is K * h^stiffness_exponent with exponent 0 by default,
// i.e. scale-independent stiffness; the exponent is exposed for studies of
// stiffness scalings that vanish with the cell size.

#include <array>
#include <optional>
#include <vector>

#include <json.hpp>

#include "willis/types.hpp"

namespace willis {

enum class NodeKind { Vertex, Hidden };

struct Node {
    int id = -1;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    cplx mass = 0.0;
    NodeKind kind = NodeKind::Vertex;
    bool boundary = false;  ///< finite samples: vertex on the bounding box
};

/// Two-node elastic element; `shift` counts how many lattice translations
/// separate endpoint b's image from its stored node (periodic cells only).
struct Spring {
    int a = -1, b = -1;
    double k = 0.0;
    double l0 = 0.0;
    std::array<int, 2> shift{0, 0};
};

/// Rigid two-node element; endpoint a is always the hidden node.
struct Rod {
    int a = -1, b = -1;
    double l0 = 0.0;
    std::array<int, 2> shift{0, 0};
};

/// One diamond cell of a finite sample: centre, the ids of its corners
/// (left, bottom, right, top) and of its hidden nodes (pairs in order,
/// left node first).
struct Cell {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    std::array<int, 2> index{0, 0};  ///< centred grid index of the centre
    std::array<int, 4> corners{-1, -1, -1, -1};
    std::vector<int> hidden;
};

struct LatticeOptions {
    double vertex_mass = 0.0;        ///< network vertices are massless by default
    double stiffness_exponent = 0.0; ///< spring stiffness = K * h^exponent
};

struct Lattice {
    CellParams params;
    bool periodic = false;
    int nx = 0, ny = 0;  ///< finite samples only
    std::vector<Node> nodes;  ///< vertices first, then hidden nodes
    std::vector<Spring> springs;
    std::vector<Rod> rods;
    std::vector<Cell> cells;  ///< finite samples only
    std::optional<std::array<Eigen::Vector2d, 2>> translation_vectors;
    int vertex_count = 0;

    /// Centred grid index of a node (positions are exact grid multiples).
    std::array<int, 2> grid_index(const Node& n) const;
};

struct LatticeSpec {
    enum class Kind { PeriodicCell, FiniteSample };
    CellParams cell;
    int nx = 7, ny = 7;
    Kind kind = Kind::FiniteSample;
    LatticeOptions options;
};

/// One primitive cell: a single representative vertex whose springs and rod
/// partners wrap around via the translation vectors (h, h) and (h, -h).
Lattice build_periodic_cell(const CellParams& params, const LatticeOptions& options = {});

/// Finite rectangular sample with nx-by-ny cell columns/rows (see header
/// comment for the exact footprint); boundary vertices are flagged.
Lattice build_finite_sample(const CellParams& params, int nx, int ny,
                            const LatticeOptions& options = {});

Lattice build(const LatticeSpec& spec);

/// Structural checks (id contiguity, rest lengths vs geometry, two rods per
/// hidden node, pair mass sums, translation vectors).  Returns one message
/// per violation, empty when the lattice is sound.
std::vector<std::string> validate(const Lattice& lattice);

nlohmann::ordered_json lattice_to_json(const Lattice& lattice);
Lattice lattice_from_json(const nlohmann::ordered_json& doc);

}  // namespace willis
