#pragma once
#include <Eigen/Sparse>
#include <functional>
#include <span>
#include <vector>

#include "elqmc/coeff.hpp"
#include "elqmc/mesh.hpp"

namespace elqmc {

using VectorFn = std::function<Vec2(Vec2)>;

/// Galerkin system for one parameter realization, over free dofs only
/// (component-major ordering).
struct AssembledSystem {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd load;
    std::vector<double> y, z;
    int degree = 1;
};

struct DiscreteDisplacement {
    const DofMap* dofmap = nullptr;
    Eigen::VectorXd coeffs; // total_free_dofs, component-major
    int degree = 1;

    double scalar_coeff(int component, int node) const {
        const int fi = dofmap->free_index[node];
        return fi < 0 ? 0.0 : coeffs[component * dofmap->n_free_scalar + fi];
    }
};

/// Assembles stiffness matrices for many realizations of the same problem.
/// Geometry, basis tables, expansion-term values at quadrature points, the
/// load vector, and the sparsity pattern are all precomputed once.
class Assembler {
public:
    Assembler(const Mesh& mesh, const DofMap& dofmap, const ParametricField& mu_field,
              const ParametricField& lambda_field, VectorFn f, const QuadratureRule& quad);

    AssembledSystem assemble(std::span<const double> y, std::span<const double> z) const;

    const Mesh& mesh() const { return *mesh_; }
    const DofMap& dofmap() const { return *dofmap_; }

private:
    const Mesh* mesh_;
    const DofMap* dofmap_;
    const ParametricField* mu_field_;
    const ParametricField* lambda_field_;
    int nq_ = 0;           // quadrature points per element
    int nloc_ = 0;         // scalar nodes per element
    std::vector<double> qweight_;      // physical weight per quad point (includes |det J|)
    std::vector<double> basis_val_;    // nq x nloc
    std::vector<double> basis_grad_;   // 2 orientations x nq x nloc x 2
    std::vector<double> mu_base_, lam_base_;   // per global quad point
    std::vector<double> mu_terms_, lam_terms_; // qp-major: [qp*s + j]
    Eigen::VectorXd load_;
    Eigen::SparseMatrix<double> pattern_;   // zero-valued matrix with final sparsity
    std::vector<int> scatter_;              // elem x (2nloc)^2 -> value index, -1 if constrained
};

/// One-off assembly                                                  .
AssembledSystem assemble(const Mesh& mesh, const DofMap& dofmap, const ParametricField& mu_field,
                         const ParametricField& lambda_field, std::span<const double> y,
                         std::span<const double> z, VectorFn f, const QuadratureRule& quad);

/// Sparse direct solve (LDLT) with an iterative-refinement fallback; relative
/// residual is verified against tol. Systems larger than the direct-solver
/// cutoff use diagonally preconditioned conjugate gradients.
DiscreteDisplacement solve(const AssembledSystem& system, const DofMap& dofmap, double tol = 1e-12);

/// Reusable solver: keeps the symbolic factorization between realizations
/// with identical sparsity.
class SystemSolver {
public:
    DiscreteDisplacement solve(const AssembledSystem& system, const DofMap& dofmap, double tol = 1e-12);

private:
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
};

/// Mean functional L_1(v) = int (v_1 + v_2) dx by the element-centroid rule.
double functional_mean(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u);

/// Centroid-rule L2 distance between the discrete and an analytic displacement.
double l2_error_centroid(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u,
                         const VectorFn& u_exact);

/// Centroid-rule |L_1(u_exact - u_h)| (quadrature applied to the difference).
double functional_error_centroid(const Mesh& mesh, const DofMap& dofmap,
                                 const DiscreteDisplacement& u, const VectorFn& u_exact);

/// Vector H1 norm of the discrete displacement (degree-4 quadrature).
double h1_norm(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u);

/// rate_i = log2(e_{i-1} / e_i) for errors under resolution halving.
std::vector<double> empirical_rate(std::span<const double> errors);

/// Manufactured deterministic problem: variable Lame fields with a known
/// trigonometric displacement vanishing on the boundary of the unit square.
namespace example1 {
double mu(Vec2 x);
double lambda(Vec2 x);
Vec2 displacement(Vec2 x);
Vec2 forcing(Vec2 x); // -div sigma(u), fully expanded
} // namespace example1

} // namespace elqmc
