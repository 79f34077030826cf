#include "elqmc/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace elqmc {

namespace {

// barycentric gradients for a triangle with vertices a, b, c
void bary_gradients(const Vec2 v[3], Vec2 grad[3]) {
    const double twoA = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
    grad[0] = {(v[1].y - v[2].y) / twoA, (v[2].x - v[1].x) / twoA};
    grad[1] = {(v[2].y - v[0].y) / twoA, (v[0].x - v[2].x) / twoA};
    grad[2] = {(v[0].y - v[1].y) / twoA, (v[1].x - v[0].x) / twoA};
}

void basis_values(int degree, const std::array<double, 3>& l, double* out) {
    if (degree == 1) {
        out[0] = l[0];
        out[1] = l[1];
        out[2] = l[2];
    } else {
        for (int k = 0; k < 3; ++k)
            out[k] = l[k] * (2.0 * l[k] - 1.0);
        for (int k = 0; k < 3; ++k)
            out[3 + k] = 4.0 * l[(k + 1) % 3] * l[(k + 2) % 3];
    }
}

void basis_gradients(int degree, const std::array<double, 3>& l, const Vec2 bg[3], Vec2* out) {
    if (degree == 1) {
        for (int k = 0; k < 3; ++k)
            out[k] = bg[k];
    } else {
        for (int k = 0; k < 3; ++k)
            out[k] = (4.0 * l[k] - 1.0) * bg[k];
        for (int k = 0; k < 3; ++k) {
            const int a = (k + 1) % 3, b = (k + 2) % 3;
            out[3 + k] = 4.0 * (l[a] * bg[b] + l[b] * bg[a]);
        }
    }
}

} // namespace

Assembler::Assembler(const Mesh& mesh, const DofMap& dofmap, const ParametricField& mu_field,
                     const ParametricField& lambda_field, VectorFn f, const QuadratureRule& quad)
    : mesh_(&mesh), dofmap_(&dofmap), mu_field_(&mu_field), lambda_field_(&lambda_field) {
    nq_ = static_cast<int>(quad.points.size());
    nloc_ = dofmap.nodes_per_element;
    const int degree = dofmap.degree;
    if (quad.exact_degree < 2 * (degree - 1))
        std::fprintf(stderr, "Assembler: quadrature degree %d below stiffness polynomial degree %d\n",
                     quad.exact_degree, 2 * (degree - 1));

    const size_t n_elems = mesh.triangles.size();
    const double h = mesh.h();

    qweight_.resize(nq_);
    for (int q = 0; q < nq_; ++q)
        qweight_[q] = quad.weights[q] * 2.0 * (0.5 * h * h); // |det J| = 2|K| = h^2

    basis_val_.resize(static_cast<size_t>(nq_) * nloc_);
    for (int q = 0; q < nq_; ++q)
        basis_values(degree, quad.points[q], &basis_val_[static_cast<size_t>(q) * nloc_]);

    // two element orientations only; representatives are elements 0 and 1
    basis_grad_.resize(2 * static_cast<size_t>(nq_) * nloc_ * 2);
    for (int o = 0; o < 2; ++o) {
        Vec2 v[3];
        for (int k = 0; k < 3; ++k)
            v[k] = mesh.vertices[mesh.triangles[o][k]];
        Vec2 bg[3];
        bary_gradients(v, bg);
        std::vector<Vec2> g(nloc_);
        for (int q = 0; q < nq_; ++q) {
            basis_gradients(degree, quad.points[q], bg, g.data());
            for (int k = 0; k < nloc_; ++k) {
                const size_t idx = ((static_cast<size_t>(o) * nq_ + q) * nloc_ + k) * 2;
                basis_grad_[idx] = g[k].x;
                basis_grad_[idx + 1] = g[k].y;
            }
        }
    }

    const int s1 = mu_field.truncation_dim();
    const int s2 = lambda_field.truncation_dim();
    const size_t nqp = n_elems * nq_;
    mu_base_.resize(nqp);
    lam_base_.resize(nqp);
    mu_terms_.resize(nqp * s1);
    lam_terms_.resize(nqp * s2);
    load_ = Eigen::VectorXd::Zero(dofmap.total_free_dofs);
    const int nf = dofmap.n_free_scalar;

    for (size_t t = 0; t < n_elems; ++t) {
        Vec2 v[3];
        for (int k = 0; k < 3; ++k)
            v[k] = mesh.vertices[mesh.triangles[t][k]];
        const int* enodes = dofmap.nodes_of(static_cast<int>(t));
        for (int q = 0; q < nq_; ++q) {
            const auto& l = quad.points[q];
            const Vec2 x = l[0] * v[0] + l[1] * v[1] + l[2] * v[2];
            const size_t qp = t * nq_ + q;
            mu_base_[qp] = mu_field.base_at(x);
            lam_base_[qp] = lambda_field.base_at(x);
            for (int j = 0; j < s1; ++j)
                mu_terms_[qp * s1 + j] = mu_field.term_at(j, x);
            for (int j = 0; j < s2; ++j)
                lam_terms_[qp * s2 + j] = lambda_field.term_at(j, x);
            const Vec2 fx = f(x);
            const double* val = &basis_val_[static_cast<size_t>(q) * nloc_];
            for (int k = 0; k < nloc_; ++k) {
                const int fi = dofmap.free_index[enodes[k]];
                if (fi < 0)
                    continue;
                load_[fi] += qweight_[q] * fx.x * val[k];
                load_[nf + fi] += qweight_[q] * fx.y * val[k];
            }
        }
    }

    // sparsity pattern and element-local scatter map
    const int nld = 2 * nloc_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n_elems * nld * nld);
    auto dof_of = [&](int node, int comp) {
        const int fi = dofmap.free_index[node];
        return fi < 0 ? -1 : comp * nf + fi;
    };
    for (size_t t = 0; t < n_elems; ++t) {
        const int* enodes = dofmap.nodes_of(static_cast<int>(t));
        for (int i = 0; i < nld; ++i) {
            const int r = dof_of(enodes[i % nloc_], i / nloc_);
            if (r < 0)
                continue;
            for (int j = 0; j < nld; ++j) {
                const int c = dof_of(enodes[j % nloc_], j / nloc_);
                if (c >= 0)
                    trip.emplace_back(r, c, 0.0);
            }
        }
    }
    pattern_.resize(dofmap.total_free_dofs, dofmap.total_free_dofs);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    scatter_.assign(n_elems * nld * nld, -1);
    const int* outer = pattern_.outerIndexPtr();
    const int* inner = pattern_.innerIndexPtr();
    for (size_t t = 0; t < n_elems; ++t) {
        const int* enodes = dofmap.nodes_of(static_cast<int>(t));
        for (int i = 0; i < nld; ++i) {
            const int r = dof_of(enodes[i % nloc_], i / nloc_);
            if (r < 0)
                continue;
            for (int j = 0; j < nld; ++j) {
                const int c = dof_of(enodes[j % nloc_], j / nloc_);
                if (c < 0)
                    continue;
                const int* lo = inner + outer[c];
                const int* hi = inner + outer[c + 1];
                const int* it = std::lower_bound(lo, hi, r);
                scatter_[(t * nld + i) * nld + j] = static_cast<int>(outer[c] + (it - lo));
            }
        }
    }
}

AssembledSystem Assembler::assemble(std::span<const double> y, std::span<const double> z) const {
    const int s1 = mu_field_->truncation_dim();
    const int s2 = lambda_field_->truncation_dim();
    if (static_cast<int>(y.size()) > s1 || static_cast<int>(z.size()) > s2)
        throw std::invalid_argument("Assembler::assemble: parameter vector longer than expansion");
    for (double v : y)
        if (!(std::abs(v) <= 0.5))
            throw std::invalid_argument("Assembler::assemble: y parameter outside [-1/2,1/2]");
    for (double v : z)
        if (!(std::abs(v) <= 0.5))
            throw std::invalid_argument("Assembler::assemble: z parameter outside [-1/2,1/2]");

    const size_t n_elems = mesh_->triangles.size();
    const size_t nqp = n_elems * nq_;

    // realize the coefficient fields at every quadrature point
    std::vector<double> mu_q(nqp), lam_q(nqp);
    for (size_t qp = 0; qp < nqp; ++qp) {
        double m = mu_base_[qp];
        const double* row = &mu_terms_[qp * s1];
        for (size_t j = 0; j < y.size(); ++j)
            m += y[j] * row[j];
        mu_q[qp] = m;
        double l = lam_base_[qp];
        const double* lrow = &lam_terms_[qp * s2];
        for (size_t j = 0; j < z.size(); ++j)
            l += z[j] * lrow[j];
        lam_q[qp] = l;
    }

    AssembledSystem sys;
    sys.stiffness = pattern_;
    sys.load = load_;
    sys.y.assign(y.begin(), y.end());
    sys.z.assign(z.begin(), z.end());
    sys.degree = dofmap_->degree;
    double* vals = sys.stiffness.valuePtr();

    const int nld = 2 * nloc_;
    std::vector<double> local(static_cast<size_t>(nld) * nld);
    for (size_t t = 0; t < n_elems; ++t) {
        std::fill(local.begin(), local.end(), 0.0);
        const int o = static_cast<int>(t & 1);
        for (int q = 0; q < nq_; ++q) {
            const size_t qp = t * nq_ + q;
            const double mu = mu_q[qp];
            const double lam = lam_q[qp];
            const double w = qweight_[q];
            const double c2ml = w * (2.0 * mu + lam);
            const double cmu = w * mu;
            const double clam = w * lam;
            const double* g = &basis_grad_[((static_cast<size_t>(o) * nq_ + q) * nloc_) * 2];
            for (int i = 0; i < nloc_; ++i) {
                const double gix = g[2 * i], giy = g[2 * i + 1];
                for (int j = 0; j < nloc_; ++j) {
                    const double gjx = g[2 * j], gjy = g[2 * j + 1];
                    local[static_cast<size_t>(i) * nld + j] += c2ml * gjx * gix + cmu * gjy * giy;
                    local[static_cast<size_t>(nloc_ + i) * nld + nloc_ + j] +=
                        c2ml * gjy * giy + cmu * gjx * gix;
                    local[static_cast<size_t>(i) * nld + nloc_ + j] += cmu * gjx * giy + clam * gjy * gix;
                    local[static_cast<size_t>(nloc_ + i) * nld + j] += cmu * gjy * gix + clam * gjx * giy;
                }
            }
        }
        const int* map = &scatter_[t * nld * nld];
        for (int e = 0; e < nld * nld; ++e)
            if (map[e] >= 0)
                vals[map[e]] += local[e];
    }
    return sys;
}

AssembledSystem assemble(const Mesh& mesh, const DofMap& dofmap, const ParametricField& mu_field,
                         const ParametricField& lambda_field, std::span<const double> y,
                         std::span<const double> z, VectorFn f, const QuadratureRule& quad) {
    return Assembler(mesh, dofmap, mu_field, lambda_field, std::move(f), quad).assemble(y, z);
}

namespace {
constexpr int kDirectCutoff = 140000; // free dofs; covers J=128 at r=2

double relative_residual(const AssembledSystem& s, const Eigen::VectorXd& x) {
    const double bn = s.load.norm();
    if (bn == 0.0)
        return (s.stiffness * x).norm();
    return (s.stiffness * x - s.load).norm() / bn;
}
} // namespace

DiscreteDisplacement SystemSolver::solve(const AssembledSystem& system, const DofMap& dofmap,
                                         double tol) {
    DiscreteDisplacement u;
    u.dofmap = &dofmap;
    u.degree = system.degree;
    const Eigen::Index n = system.stiffness.rows();

    if (system.load.size() != n)
        throw std::invalid_argument("solve: load/stiffness size mismatch");
    if (system.load.norm() == 0.0) {
        u.coeffs = Eigen::VectorXd::Zero(n);
        return u;
    }

    if (n <= kDirectCutoff) {
        if (!analyzed_) {
            ldlt_.analyzePattern(system.stiffness);
            analyzed_ = true;
        }
        ldlt_.factorize(system.stiffness);
        if (ldlt_.info() != Eigen::Success)
            throw std::runtime_error("solve: LDLT factorization failed (matrix not SPD?)");
        u.coeffs = ldlt_.solve(system.load);
        for (int pass = 0; pass < 3 && relative_residual(system, u.coeffs) > tol; ++pass) {
            const Eigen::VectorXd r = system.load - system.stiffness * u.coeffs;
            u.coeffs += ldlt_.solve(r);
        }
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(tol);
        cg.setMaxIterations(50000);
        cg.compute(system.stiffness);
        u.coeffs = cg.solve(system.load);
        if (cg.info() != Eigen::Success)
            throw std::runtime_error("solve: CG failed after " + std::to_string(cg.iterations()) +
                                     " iterations, error " + std::to_string(cg.error()));
    }

    const double res = relative_residual(system, u.coeffs);
    if (res > tol)
        throw std::runtime_error("solve: relative residual " + std::to_string(res) +
                                 " above tolerance " + std::to_string(tol));
    return u;
}

DiscreteDisplacement solve(const AssembledSystem& system, const DofMap& dofmap, double tol) {
    SystemSolver s;
    return s.solve(system, dofmap, tol);
}

namespace {
// u_h components at a barycentric point of element t
Vec2 eval_at(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u, int t,
             const std::array<double, 3>& l) {
    double val[6];
    basis_values(dofmap.degree, l, val);
    const int* enodes = dofmap.nodes_of(t);
    Vec2 out{0.0, 0.0};
    for (int k = 0; k < dofmap.nodes_per_element; ++k) {
        out.x += u.scalar_coeff(0, enodes[k]) * val[k];
        out.y += u.scalar_coeff(1, enodes[k]) * val[k];
    }
    return out;
}
constexpr std::array<double, 3> kCentroid{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
} // namespace

double functional_mean(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u) {
    const double area = 0.5 * mesh.h() * mesh.h();
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const Vec2 v = eval_at(mesh, dofmap, u, t, kCentroid);
        sum += area * (v.x + v.y);
    }
    return sum;
}

double l2_error_centroid(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u,
                         const VectorFn& u_exact) {
    const double area = 0.5 * mesh.h() * mesh.h();
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const Vec2 vh = eval_at(mesh, dofmap, u, t, kCentroid);
        const Vec2 ve = u_exact(mesh.centroid(t));
        const Vec2 d = vh - ve;
        sum += area * dot(d, d);
    }
    return std::sqrt(sum);
}

double functional_error_centroid(const Mesh& mesh, const DofMap& dofmap,
                                 const DiscreteDisplacement& u, const VectorFn& u_exact) {
    const double area = 0.5 * mesh.h() * mesh.h();
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const Vec2 vh = eval_at(mesh, dofmap, u, t, kCentroid);
        const Vec2 ve = u_exact(mesh.centroid(t));
        sum += area * ((ve.x - vh.x) + (ve.y - vh.y));
    }
    return std::abs(sum);
}

double h1_norm(const Mesh& mesh, const DofMap& dofmap, const DiscreteDisplacement& u) {
    const QuadratureRule quad = triangle_quadrature(4);
    const int nq = static_cast<int>(quad.points.size());
    const int nloc = dofmap.nodes_per_element;
    const double h = mesh.h();

    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        Vec2 v[3];
        for (int k = 0; k < 3; ++k)
            v[k] = mesh.vertices[mesh.triangles[t][k]];
        Vec2 bg[3];
        bary_gradients(v, bg);
        const int* enodes = dofmap.nodes_of(t);
        for (int q = 0; q < nq; ++q) {
            double val[6];
            Vec2 grad[6];
            basis_values(dofmap.degree, quad.points[q], val);
            basis_gradients(dofmap.degree, quad.points[q], bg, grad);
            Vec2 uval{0, 0}, g1{0, 0}, g2{0, 0};
            for (int k = 0; k < nloc; ++k) {
                const double c1 = u.scalar_coeff(0, enodes[k]);
                const double c2 = u.scalar_coeff(1, enodes[k]);
                uval.x += c1 * val[k];
                uval.y += c2 * val[k];
                g1 = g1 + c1 * grad[k];
                g2 = g2 + c2 * grad[k];
            }
            sum += quad.weights[q] * 2.0 * (0.5 * h * h) *
                   (dot(uval, uval) + dot(g1, g1) + dot(g2, g2));
        }
    }
    return std::sqrt(sum);
}

std::vector<double> empirical_rate(std::span<const double> errors) {
    if (errors.size() < 2)
        throw std::invalid_argument("empirical_rate: need at least two errors");
    for (double e : errors)
        if (!(e > 0.0))
            throw std::invalid_argument("empirical_rate: errors must be positive");
    std::vector<double> rates;
    rates.reserve(errors.size() - 1);
    for (size_t i = 1; i < errors.size(); ++i)
        rates.push_back(std::log2(errors[i - 1] / errors[i]));
    return rates;
}

namespace example1 {

double mu(Vec2 x) { return x.x + x.y + 1.0; }
double lambda(Vec2 x) { return std::sin(2.0 * M_PI * x.x) + 2.0; }

Vec2 displacement(Vec2 p) {
    const double c1 = std::cos(2.0 * M_PI * p.x), s1 = std::sin(2.0 * M_PI * p.x);
    const double c2 = std::cos(2.0 * M_PI * p.y), s2 = std::sin(2.0 * M_PI * p.y);
    return {2.0 * (c1 - 1.0) * s2, (1.0 - c2) * s1};
}

Vec2 forcing(Vec2 p) {
    const double pi = M_PI;
    const double c1 = std::cos(2.0 * pi * p.x), s1 = std::sin(2.0 * pi * p.x);
    const double c2 = std::cos(2.0 * pi * p.y), s2 = std::sin(2.0 * pi * p.y);

    const double u1x = -4.0 * pi * s1 * s2;
    const double u1y = 4.0 * pi * (c1 - 1.0) * c2;
    const double u1xx = -8.0 * pi * pi * c1 * s2;
    const double u1yy = -8.0 * pi * pi * (c1 - 1.0) * s2;
    const double u1xy = -8.0 * pi * pi * s1 * c2;

    const double u2x = 2.0 * pi * (1.0 - c2) * c1;
    const double u2y = 2.0 * pi * s2 * s1;
    const double u2xx = -4.0 * pi * pi * (1.0 - c2) * s1;
    const double u2yy = 4.0 * pi * pi * c2 * s1;
    const double u2xy = 4.0 * pi * pi * s2 * c1;

    const double m = mu(p), mx = 1.0, my = 1.0;
    const double l = lambda(p), lx = 2.0 * pi * c1, ly = 0.0;

    const double D = u1x + u2y;
    const double Dx = u1xx + u2xy;
    const double Dy = u1xy + u2yy;

    const double f1 = -(lx * D + l * Dx + 2.0 * mx * u1x + 2.0 * m * u1xx +
                        my * (u1y + u2x) + m * (u1yy + u2xy));
    const double f2 = -(mx * (u1y + u2x) + m * (u1xy + u2xx) + ly * D + l * Dy +
                        2.0 * my * u2y + 2.0 * m * u2yy);
    return {f1, f2};
}

} // namespace example1

} // namespace elqmc
