#include "elqmc/coeff.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace elqmc {

ParametricField::ParametricField(std::function<double(Vec2)> base, std::vector<FieldTerm> terms,
                                 std::optional<PowerLawTail> tail)
    : base_(std::move(base)), terms_(std::move(terms)), tail_(tail) {
    for (size_t j = 1; j < terms_.size(); ++j)
        if (terms_[j].sup_norm > terms_[j - 1].sup_norm)
            throw std::invalid_argument("ParametricField: sup norms must be nonincreasing (term " +
                                        std::to_string(j) + ")");
}

double eval_field(const ParametricField& field, Vec2 x, std::span<const double> params) {
    if (static_cast<int>(params.size()) > field.truncation_dim())
        throw std::invalid_argument("eval_field: more parameters than expansion terms");
    double v = field.base_at(x);
    for (size_t j = 0; j < params.size(); ++j) {
        if (!(std::abs(params[j]) <= 0.5))
            throw std::invalid_argument("eval_field: parameter " + std::to_string(j) +
                                        " outside [-1/2, 1/2]");
        v += params[j] * field.term_at(static_cast<int>(j), x);
    }
    return v;
}

WeightSequences derive_weights(const ParametricField& mu_field, const ParametricField& lambda_field,
                               double mu_min, int d, double p, double q) {
    if (!(mu_min > 0.0))
        throw std::invalid_argument("derive_weights: mu_min must be positive");
    if (!(p > 0.0 && p <= 1.0) || !(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("derive_weights: p, q must lie in (0, 1]");
    WeightSequences w;
    w.p = p;
    w.q = q;
    w.alpha = static_cast<int>(std::floor(1.0 / p)) + 1;
    w.beta = static_cast<int>(std::floor(1.0 / q)) + 1;
    w.b_tilde.reserve(mu_field.truncation_dim());
    for (int j = 0; j < mu_field.truncation_dim(); ++j)
        w.b_tilde.push_back(mu_field.sup_norm(j) / mu_min);
    w.b_hat.reserve(lambda_field.truncation_dim());
    for (int j = 0; j < lambda_field.truncation_dim(); ++j)
        w.b_hat.push_back(0.5 * d * lambda_field.sup_norm(j) / mu_min);
    return w;
}

// sum_{j=M}^inf j^(-t) by Euler-Maclaurin; error O(M^(-t-5)), far below 1e-12 for M >= 32.
static double power_tail_from(double M, double t) {
    return std::pow(M, 1.0 - t) / (t - 1.0) + 0.5 * std::pow(M, -t) + t / 12.0 * std::pow(M, -t - 1.0) -
           t * (t + 1.0) * (t + 2.0) / 720.0 * std::pow(M, -t - 3.0);
}

double tail_sup_sum(const ParametricField& field, int s) {
    if (s < 0)
        throw std::invalid_argument("tail_sup_sum: s must be nonnegative");
    if (field.tail()) {
        const auto [scale, t] = *field.tail();
        // explicit partial sum until the asymptotic remainder is safely accurate
        const long long M = std::max<long long>(s + 1, 64);
        double sum = 0.0;
        for (long long j = s + 1; j < M; ++j)
            sum += scale * std::pow(double(j), -t);
        return sum + scale * power_tail_from(double(M), t);
    }
    double sum = 0.0;
    for (int j = field.truncation_dim() - 1; j >= s; --j)
        sum += field.sup_norm(j);
    return sum;
}

FieldBounds certified_bounds(const ParametricField& field, int grid) {
    FieldBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (int j = 0; j < grid; ++j) {
        for (int i = 0; i < grid; ++i) {
            const Vec2 x{(i + 0.5) / grid, (j + 0.5) / grid};
            double spread = 0.0;
            for (int k = 0; k < field.truncation_dim(); ++k)
                spread += 0.5 * std::abs(field.term_at(k, x));
            const double base = field.base_at(x);
            b.lo = std::min(b.lo, base - spread);
            b.hi = std::max(b.hi, base + spread);
        }
    }
    return b;
}

FieldBounds probe_bounds(const ParametricField& field, FieldBounds bounds, double positive_floor,
                         int n_samples, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> param(-0.5, 0.5);
    FieldBounds seen{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    std::vector<double> params(field.truncation_dim());
    const double slack = 1e-9 * (1.0 + std::abs(bounds.hi));
    for (int n = 0; n < n_samples; ++n) {
        const Vec2 x{unit(rng), unit(rng)};
        for (auto& p : params)
            p = param(rng);
        const double v = eval_field(field, x, params);
        seen.lo = std::min(seen.lo, v);
        seen.hi = std::max(seen.hi, v);
        if (v < bounds.lo - slack || v > bounds.hi + slack)
            throw std::runtime_error("probe_bounds: sampled field value " + std::to_string(v) +
                                     " escapes certified range");
        if (v < positive_floor)
            throw std::runtime_error("probe_bounds: sampled field value " + std::to_string(v) +
                                     " below required floor " + std::to_string(positive_floor));
    }
    return seen;
}

ParametricField constant_field(double c) {
    return ParametricField([c](Vec2) { return c; }, {});
}

ParametricField affine_field(double c0, double cx, double cy) {
    return ParametricField([=](Vec2 x) { return c0 + cx * x.x + cy * x.y; }, {});
}

ParametricField sine_plus_const_field(double a, double c) {
    return ParametricField([=](Vec2 x) { return a * std::sin(2.0 * M_PI * x.x) + c; }, {});
}

ParametricField sine_product_field(double base, double scale, int s) {
    std::vector<FieldTerm> terms;
    terms.reserve(s);
    for (int j = 1; j <= s; ++j) {
        const double amp = scale / (double(j) * j);
        terms.push_back({[j, amp](Vec2 x) {
                             return amp * std::sin(j * M_PI * x.x) * std::sin((2 * j - 1) * M_PI * x.y);
                         },
                         amp});
    }
    return ParametricField([base](Vec2) { return base; }, std::move(terms),
                           PowerLawTail{scale, 2.0});
}

} // namespace elqmc
