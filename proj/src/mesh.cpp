#include "elqmc/mesh.hpp"

#include <stdexcept>
#include <string>

namespace elqmc {

double Mesh::signed_area(int t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Vec2 Mesh::centroid(int t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

Mesh build_uniform_mesh(int J) {
    if (J < 1)
        throw std::invalid_argument("build_uniform_mesh: J must be >= 1, got " + std::to_string(J));

    Mesh m;
    m.J = J;
    const int n = J + 1;
    m.vertices.reserve(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            m.vertices.push_back({double(i) / J, double(j) / J});

    m.triangles.reserve(2 * static_cast<size_t>(J) * J);
    for (int j = 0; j < J; ++j) {
        for (int i = 0; i < J; ++i) {
            const int v00 = m.vertex_id(i, j);
            const int v10 = m.vertex_id(i + 1, j);
            const int v01 = m.vertex_id(i, j + 1);
            const int v11 = m.vertex_id(i + 1, j + 1);
            m.triangles.push_back({v00, v10, v11}); // below the diagonal
            m.triangles.push_back({v00, v11, v01}); // above
        }
    }

    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i == 0 || j == 0 || i == J || j == J)
                m.boundary_vertices.push_back(m.vertex_id(i, j));

    return m;
}

DofMap build_dofmap(const Mesh& mesh, int degree) {
    if (degree != 1 && degree != 2)
        throw std::invalid_argument("build_dofmap: degree must be 1 or 2, got " + std::to_string(degree));

    DofMap d;
    d.degree = degree;
    const int J = mesh.J;
    const int g = degree * J + 1;
    d.grid = g;

    d.scalar_node_coords.reserve(static_cast<size_t>(g) * g);
    d.free_index.assign(static_cast<size_t>(g) * g, -1);
    for (int j = 0; j < g; ++j) {
        for (int i = 0; i < g; ++i) {
            d.scalar_node_coords.push_back({double(i) / (g - 1), double(j) / (g - 1)});
            if (i > 0 && i < g - 1 && j > 0 && j < g - 1) {
                d.free_index[d.node_id(i, j)] = d.n_free_scalar;
                d.free_nodes.push_back(d.node_id(i, j));
                ++d.n_free_scalar;
            }
        }
    }
    d.total_free_dofs = 2 * d.n_free_scalar;

    d.nodes_per_element = (degree == 1) ? 3 : 6;
    d.element_nodes.reserve(mesh.triangles.size() * d.nodes_per_element);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        // vertex grid coordinates on the dof grid
        int gi[3], gj[3];
        for (int k = 0; k < 3; ++k) {
            const int vi = tri[k] % (J + 1);
            const int vj = tri[k] / (J + 1);
            gi[k] = degree * vi;
            gj[k] = degree * vj;
            d.element_nodes.push_back(d.node_id(gi[k], gj[k]));
        }
        if (degree == 2) {
            // midpoint opposite vertex k = midpoint of the other two vertices;
            // vertex coords are even on the fine grid so sums stay integral
            for (int k = 0; k < 3; ++k) {
                const int a = (k + 1) % 3, b = (k + 2) % 3;
                d.element_nodes.push_back(d.node_id((gi[a] + gi[b]) / 2, (gj[a] + gj[b]) / 2));
            }
        }
    }
    return d;
}

QuadratureRule triangle_quadrature(int exact_degree) {
    QuadratureRule q;
    q.exact_degree = exact_degree;
    switch (exact_degree) {
    case 1:
        q.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
        q.weights = {0.5};
        break;
    case 2:
        // 3-point rule at (2/3,1/6,1/6) and cyclic permutations
        q.points = {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};
        q.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
        break;
    case 4: {
        // Dunavant 6-point rule, two symmetric orbits
        const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011 / 2.0;
        const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322 / 2.0;
        q.points = {{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                    {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        q.weights = {w1, w1, w1, w2, w2, w2};
        break;
    }
    default:
        throw std::invalid_argument("triangle_quadrature: unsupported exact_degree " +
                                    std::to_string(exact_degree));
    }
    return q;
}

} // namespace elqmc
