#pragma once
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "elqmc/geometry.hpp"

namespace elqmc {

/// One expansion term psi_j (or phi_j) with its analytic sup norm.
struct FieldTerm {
    std::function<double(Vec2)> f;
    double sup_norm = 0.0;
};

/// Tail model sup_j = scale * j^(-exponent), valid for every j >= 1.
struct PowerLawTail {
    double scale = 0.0;
    double exponent = 2.0;
};

/// Affine-parametric scalar field base(x) + sum_j params_j term_j(x) with
/// parameters in [-1/2, 1/2]. Immutable after construction; evaluation is pure.
class ParametricField {
public:
    ParametricField(std::function<double(Vec2)> base, std::vector<FieldTerm> terms,
                    std::optional<PowerLawTail> tail = std::nullopt);

    int truncation_dim() const { return static_cast<int>(terms_.size()); }
    double base_at(Vec2 x) const { return base_(x); }
    double term_at(int j, Vec2 x) const { return terms_[j].f(x); } // 0-based
    double sup_norm(int j) const { return terms_[j].sup_norm; }    // 0-based
    const std::optional<PowerLawTail>& tail() const { return tail_; }

private:
    std::function<double(Vec2)> base_;
    std::vector<FieldTerm> terms_;
    std::optional<PowerLawTail> tail_;
};

/// base(x) + sum_j params[j] term_j(x); trailing parameters beyond params.size()
/// are treated as zero. Rejects parameters outside [-1/2, 1/2].
double eval_field(const ParametricField& field, Vec2 x, std::span<const double> params);

/// QMC regularity-weight sequences and the interlacing orders they imply.
struct WeightSequences {
    std::vector<double> b_tilde; // |psi_j|_inf / mu_min
    std::vector<double> b_hat;   // (d/2) |phi_j|_inf / mu_min
    double p = 0.5, q = 0.5;     // summability exponents in (0,1]
    int alpha = 3, beta = 3;     // floor(1/p)+1, floor(1/q)+1
};

WeightSequences derive_weights(const ParametricField& mu_field, const ParametricField& lambda_field,
                               double mu_min, int d, double p, double q);

/// sum_{j>s} |term_j|_inf, accurate to well below 1e-12. Requires the field's
/// analytic tail model when s reaches past the stored terms.
double tail_sup_sum(const ParametricField& field, int s);

struct FieldBounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Worst-case range of the field over parameters in [-1/2,1/2]^s, minimized /
/// maximized over a grid x grid spatial sample.
FieldBounds certified_bounds(const ParametricField& field, int grid = 256);

/// Draws n random (x, params) samples and checks the evaluated field stays inside
/// [bounds.lo - slack, bounds.hi + slack] and above `positive_floor`. Throws on
/// violation. Returns the observed range.
FieldBounds probe_bounds(const ParametricField& field, FieldBounds bounds, double positive_floor,
                         int n_samples, unsigned long long seed);

// --- built-in field constructors used by the experiment presets ---

ParametricField constant_field(double c);
ParametricField affine_field(double c0, double cx, double cy); // c0 + cx x1 + cy x2
ParametricField sine_plus_const_field(double a, double c);     // a sin(2 pi x1) + c

/// base + sum_j y_j (scale/j^2) sin(j pi x1) sin((2j-1) pi x2), truncated at s terms.
ParametricField sine_product_field(double base, double scale, int s);

} // namespace elqmc
