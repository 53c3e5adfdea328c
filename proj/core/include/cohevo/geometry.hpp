#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cohevo/linalg.hpp"

namespace cohevo {

/// One lumped quadrature node on the crack path M. A pair with
/// plus_node == minus_node is a crack tip interior to the domain: it carries
/// its share of the interface measure but its jump is identically zero
/// (the tip node is not duplicated, so discrete fields cannot open at dM).
struct InterfacePair {
    std::size_t plus_node = 0;
    std::size_t minus_node = 0;
    double weight = 0.0;                    // lumped measure on M
    std::array<double, 2> normal{0.0, 0.0}; // unit, oriented minus -> plus
    bool tied() const { return plus_node == minus_node; }
};

/// Boundary facet on the Neumann part: a single node in 1d (measure 1),
/// an edge in 2d (measure = length).
struct BoundaryFacet {
    std::array<std::size_t, 2> nodes{0, 0};
    std::size_t node_count = 0;
    double measure = 0.0;
};

struct Mesh {
    int dimension = 1;       // n
    int field_dim = 1;       // m
    std::vector<double> coords;             // dimension-interleaved
    std::vector<std::size_t> elem_nodes;    // flattened, (dimension+1) per element
    std::vector<std::size_t> dirichlet_nodes;  // sorted, unique
    std::vector<BoundaryFacet> neumann_facets;
    std::vector<InterfacePair> interface;

    // precomputed P1 element data
    std::vector<double> elem_volume;
    std::vector<double> elem_grad;  // per element: local node x dimension hat gradients

    std::size_t n_nodes() const { return coords.size() / static_cast<std::size_t>(dimension); }
    std::size_t nodes_per_elem() const { return static_cast<std::size_t>(dimension) + 1; }
    std::size_t n_elements() const { return elem_nodes.size() / nodes_per_elem(); }
    std::size_t n_dofs() const { return n_nodes() * static_cast<std::size_t>(field_dim); }
    const std::size_t* element(std::size_t e) const { return &elem_nodes[e * nodes_per_elem()]; }
    double node_coord(std::size_t node, int axis) const {
        return coords[node * static_cast<std::size_t>(dimension) + static_cast<std::size_t>(axis)];
    }
    double interface_measure() const;
    bool is_dirichlet(std::size_t node) const;
};

/// Sides of the rectangular domain [0,w] x [-h/2, h/2].
enum class Side { Bottom, Right, Top, Left };

struct RectMeshOptions {
    int field_dim = 1;
    std::vector<Side> dirichlet_sides{Side::Top, Side::Bottom};
};

/// Rod [0, length] split into n_elements equal segments, Dirichlet at both
/// endpoints. The node at interface_position is duplicated into a minus
/// (left) and plus (right) copy forming one interface pair of weight 1.
Mesh build_rod_mesh(double length, int n_elements, double interface_position, int field_dim = 1);

/// Structured triangulation of [0,width] x [-height/2, height/2] with a
/// straight crack [crack_x0, crack_x1] x {0}. Crack nodes are duplicated
/// (elements above y=0 reference the plus copies) except interior tips.
/// A crack endpoint on the left/right boundary is an open mouth and is
/// duplicated. ny must be even so the midline is a grid line.
Mesh build_rect_mesh_with_crack(double width, double height, int nx, int ny, double crack_x0,
                                double crack_x1, const RectMeshOptions& opts = {});

/// [u] = u_plus - u_minus at every interface pair; field_dim values per pair.
Vec jump(const Mesh& mesh, std::span<const double> u);

/// Euclidean magnitudes |[u]| per interface pair.
Vec jump_magnitudes(const Mesh& mesh, std::span<const double> u);

/// Throws std::runtime_error if a structural invariant fails (coincident
/// duplicate coordinates, connectivity of the cracked domain, nonempty
/// Dirichlet set, positive weights, unit normals).
void validate_mesh(const Mesh& mesh);

/// JSON snapshot (nodes, elements, interface pairs) for debugging/plotting.
std::string mesh_to_json(const Mesh& mesh);

}  // namespace cohevo
