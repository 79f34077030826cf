#pragma once
#include <array>
#include <vector>

#include "elqmc/geometry.hpp"

namespace elqmc {

/// Uniform triangulation of [0,1]^2: a J-by-J square grid with every square
/// cut along the bottom-left -> top-right diagonal. Vertices are ordered
/// lexicographically by (y, x).
struct Mesh {
    int J = 0; // subdivisions per side, h = 1/J
    std::vector<Vec2> vertices;                // (J+1)^2
    std::vector<std::array<int, 3>> triangles; // 2*J^2, positively oriented
    std::vector<int> boundary_vertices;        // sorted vertex indices

    double h() const { return 1.0 / J; }
    int vertex_id(int i, int j) const { return j * (J + 1) + i; }
    double signed_area(int t) const;
    Vec2 centroid(int t) const;
};

Mesh build_uniform_mesh(int J);

/// Scalar Lagrange node bookkeeping for vector P1/P2 elements with
/// homogeneous Dirichlet boundary. Nodes live on the (r*J+1)^2 grid,
/// ordered lexicographically by (y, x); free nodes are the interior ones.
/// Vector dofs are component-major: dof = component * n_free_scalar + free index.
struct DofMap {
    int degree = 1; // r in {1,2}
    int grid = 0;   // nodes per side: r*J + 1
    std::vector<Vec2> scalar_node_coords; // grid^2
    std::vector<int> free_index;          // node -> free scalar index, -1 if boundary
    std::vector<int> free_nodes;          // free scalar index -> node
    int n_free_scalar = 0;
    int total_free_dofs = 0; // 2 * n_free_scalar

    // element connectivity, nodes_per_element entries per triangle;
    // P2 local order: vertices 0..2 then midpoint opposite each vertex.
    int nodes_per_element = 3;
    std::vector<int> element_nodes;

    int node_id(int i, int j) const { return j * grid + i; }
    const int* nodes_of(int t) const { return element_nodes.data() + static_cast<size_t>(t) * nodes_per_element; }
};

DofMap build_dofmap(const Mesh& mesh, int degree);

/// Quadrature on the reference triangle {x,y >= 0, x+y <= 1}; weights sum to 1/2.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points; // barycentric coordinates
    std::vector<double> weights;
    int exact_degree = 0;
};

QuadratureRule triangle_quadrature(int exact_degree);

} // namespace elqmc
