#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "margins/error.hpp"
#include "margins/instance.hpp"
#include "margins/margin.hpp"

namespace margins {

enum class GeneratorKind { planted_positive, planted_negative, near_ill_posed, rank_deficient };

inline const char* to_string(GeneratorKind k)
{
    switch (k) {
        case GeneratorKind::planted_positive: return "planted-positive";
        case GeneratorKind::planted_negative: return "planted-negative";
        case GeneratorKind::near_ill_posed: return "near-ill-posed";
        case GeneratorKind::rank_deficient: return "rank-deficient";
    }
    return "?";
}

inline GeneratorKind generator_kind_from_string(const std::string& s)
{
    if (s == "planted-positive") return GeneratorKind::planted_positive;
    if (s == "planted-negative") return GeneratorKind::planted_negative;
    if (s == "near-ill-posed") return GeneratorKind::near_ill_posed;
    if (s == "rank-deficient") return GeneratorKind::rank_deficient;
    throw InvalidArgument("unknown generator kind '" + s + "'");
}

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::planted_positive;
    Index d = 2;
    Index n = 3;
    double target_margin = 0.5;
    std::uint64_t seed = 0;
    /// planted-negative: gaussian perturbation scale applied to the template
    /// (also enables a random rotation). Zero reproduces the template exactly.
    double jitter = 0.0;
    /// rank-deficient: dimension of the embedded instance (0 means d - 1).
    Index rank = 0;

    void validate() const
    {
        if (d < 1 || n < 1) throw InvalidArgument("generator needs d >= 1 and n >= 1");
        if (!(jitter >= 0.0)) throw InvalidArgument("jitter must be non-negative");
        switch (kind) {
            case GeneratorKind::planted_positive:
                if (!(target_margin > 0.0 && target_margin < 1.0))
                    throw InvalidArgument("planted-positive needs target_margin in (0, 1)");
                break;
            case GeneratorKind::planted_negative:
                if (!(target_margin > -1.0 && target_margin < 0.0))
                    throw InvalidArgument("planted-negative needs target_margin in (-1, 0)");
                break;
            case GeneratorKind::rank_deficient:
                if (!(std::abs(target_margin) <= 1.0) || target_margin == 0.0)
                    throw InvalidArgument("rank-deficient needs a nonzero target_margin in [-1, 1]");
                if (d < 2) throw InvalidArgument("rank-deficient needs d >= 2");
                if (rank < 0 || rank >= d) throw InvalidArgument("rank-deficient needs 1 <= rank < d");
                break;
            case GeneratorKind::near_ill_posed:
                break;
        }
    }
};

struct GeneratedInstance {
    ProblemInstance instance;
    GeneratorSpec spec;
    /// Exact values from the enumeration oracle (absent past its budget).
    std::optional<double> oracle_rho_affine;
    std::optional<double> oracle_rho_classical;
};

namespace detail {

inline Vector random_unit(std::mt19937_64& rng, Index d)
{
    std::normal_distribution<double> gauss;
    for (;;) {
        Vector v(d);
        for (Index i = 0; i < d; ++i) v[i] = gauss(rng);
        const double nv = v.norm();
        if (nv > 1e-12) return v / nv;
    }
}

inline Matrix random_rotation(std::mt19937_64& rng, Index d)
{
    std::normal_distribution<double> gauss;
    Matrix g(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    // fix column signs so the distribution is Haar
    const Matrix& r = qr.matrixQR();
    for (Index j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// Unit columns whose hull contains a ball about the origin; returns the
// guaranteed inradius alongside.
inline std::pair<Matrix, double> negative_template(Index d, Index n)
{
    constexpr double pi = std::numbers::pi;
    if (d == 1) {
        if (n < 2) throw InvalidArgument("planted-negative in d = 1 needs n >= 2");
        Matrix a(1, n);
        for (Index i = 0; i < n; ++i) a(0, i) = (i % 2 == 0) ? 1.0 : -1.0;
        return {a, 1.0};
    }
    if (d == 2) {
        if (n < 3) throw InvalidArgument("planted-negative in d = 2 needs n >= 3");
        Matrix a(2, n);
        for (Index k = 0; k < n; ++k) {
            const double th = pi / 2.0 + 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
            a(0, k) = std::cos(th);
            a(1, k) = std::sin(th);
        }
        return {a, std::cos(pi / static_cast<double>(n))};
    }
    if (n >= 2 * d) {
        Matrix a = Matrix::Zero(d, 2 * d);
        for (Index i = 0; i < d; ++i) {
            a(i, 2 * i) = 1.0;
            a(i, 2 * i + 1) = -1.0;
        }
        return {a, 1.0 / std::sqrt(static_cast<double>(d))};
    }
    if (n < d + 1) throw InvalidArgument("planted-negative needs n >= d + 1 columns");
    // regular simplex: centered standard basis of R^{d+1}, expressed in the sum-zero hyperplane
    const Index m = d + 1;
    Matrix centered = Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
    Eigen::HouseholderQR<Matrix> qr(centered.leftCols(d));
    const Matrix q = qr.householderQ() * Matrix::Identity(m, d);
    Matrix a = q.transpose() * centered;
    for (Index k = 0; k < m; ++k) a.col(k).normalize();
    return {a, 1.0 / static_cast<double>(d)};
}

inline std::string instance_name(const GeneratorSpec& s)
{
    return std::string(to_string(s.kind)) + "-d" + std::to_string(s.d) + "-n" + std::to_string(s.n) + "-s" +
           std::to_string(s.seed);
}

inline Matrix planted_positive_columns(std::mt19937_64& rng, Index d, Index n, double target)
{
    const Vector wstar = random_unit(rng, d);
    Matrix a(d, n);
    long draws = 0;
    for (Index i = 0; i < n; ++i) {
        for (;;) {
            if (++draws > 1000000)
                throw BudgetExceeded("rejection sampling exceeded 10^6 draws; use a smaller target_margin");
            const Vector v = random_unit(rng, d);
            if (v.dot(wstar) >= target) {
                a.col(i) = v;
                break;
            }
        }
    }
    return a;
}

inline Matrix planted_negative_columns(std::mt19937_64& rng, Index d, Index n, double target, double jitter)
{
    auto [tmpl, inradius] = negative_template(d, n);
    if (-target > inradius + 1e-12)
        throw InvalidArgument("cannot plant |margin| " + std::to_string(-target) + " with " + std::to_string(n) +
                              " columns in d = " + std::to_string(d) + " (template inradius " +
                              std::to_string(inradius) + ")");
    Matrix a(d, n);
    a.leftCols(tmpl.cols()) = tmpl;
    for (Index i = tmpl.cols(); i < n; ++i) a.col(i) = random_unit(rng, d);  // extra points only grow the hull
    if (jitter <= 0.0) return a;

    a = random_rotation(rng, d) * a;
    if (n > kEnumerationBudget) return a;  // containment only certifiable for the exact template
    std::normal_distribution<double> gauss;
    double scale = jitter;
    for (int attempt = 0; attempt < 200; ++attempt) {
        Matrix b = a;
        for (Index i = 0; i < n; ++i) {
            for (Index k = 0; k < d; ++k) b(k, i) += scale * gauss(rng);
            if (b.col(i).norm() < 1e-12) b.col(i) = a.col(i);
            b.col(i).normalize();
        }
        const ProblemInstance probe(b, "probe", true);
        const MarginReport rep = margin_report(probe);
        if (rep.rank == d && -rep.rho_affine >= -target - 1e-12) return b;
        if (attempt % 20 == 19) scale *= 0.5;
    }
    return a;
}

}  // namespace detail

/// Draws an instance from the spec. Same spec and seed give the same columns.
/// The planted value is a bound; the exact margins are recorded alongside.
inline GeneratedInstance generate(const GeneratorSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    Matrix a;
    switch (spec.kind) {
        case GeneratorKind::planted_positive:
            a = detail::planted_positive_columns(rng, spec.d, spec.n, spec.target_margin);
            break;
        case GeneratorKind::near_ill_posed:
            a = detail::planted_positive_columns(rng, spec.d, spec.n, 1e-4);
            break;
        case GeneratorKind::planted_negative:
            a = detail::planted_negative_columns(rng, spec.d, spec.n, spec.target_margin, spec.jitter);
            break;
        case GeneratorKind::rank_deficient: {
            const Index k = spec.rank == 0 ? spec.d - 1 : spec.rank;
            const Matrix inner =
                spec.target_margin < 0.0
                    ? detail::planted_negative_columns(rng, k, spec.n, spec.target_margin, spec.jitter)
                    : detail::planted_positive_columns(rng, k, spec.n, spec.target_margin);
            Matrix embedded = Matrix::Zero(spec.d, spec.n);
            embedded.topRows(k) = inner;
            a = detail::random_rotation(rng, spec.d) * embedded;
            for (Index i = 0; i < a.cols(); ++i) a.col(i).normalize();
            break;
        }
    }

    GeneratedInstance out{ProblemInstance(a, detail::instance_name(spec), true), spec, std::nullopt, std::nullopt};
    if (spec.n <= kEnumerationBudget) {
        const MarginReport rep = margin_report(out.instance);
        out.oracle_rho_affine = rep.rho_affine;
        out.oracle_rho_classical = rep.rho_classical;
        const double target = spec.kind == GeneratorKind::near_ill_posed ? 1e-4 : spec.target_margin;
        const bool ok = target > 0.0 ? rep.rho_affine >= target - 1e-9 : rep.rho_affine <= target + 1e-9;
        if (!ok)
            throw Error("generated instance failed its oracle check: rho_A = " + std::to_string(rep.rho_affine) +
                        ", planted " + std::to_string(target));
    }
    return out;
}

}  // namespace margins
