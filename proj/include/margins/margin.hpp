#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "margins/error.hpp"
#include "margins/instance.hpp"
#include "margins/lp.hpp"

namespace margins {

/// Largest n the exact enumeration oracles accept by default.
inline constexpr Index kEnumerationBudget = 14;
/// |rho_A| at or below this is reported as ill-posed.
inline constexpr double kIllPosedBand = 1e-9;
/// Side-test slack for supporting hyperplanes.
inline constexpr double kSupportTolerance = 1e-9;

enum class MarginMethod { enumeration, grid, iterative };

inline const char* to_string(MarginMethod m)
{
    switch (m) {
        case MarginMethod::enumeration: return "enumeration";
        case MarginMethod::grid: return "grid";
        case MarginMethod::iterative: return "iterative";
    }
    return "?";
}

struct MarginReport {
    double rho_classical = 0.0;
    double rho_affine = 0.0;
    double rho_plus = 0.0;
    double rho_minus = 0.0;
    std::optional<PrimalDirection> witness_direction;
    std::optional<SimplexPoint> witness_weights;
    MarginMethod method = MarginMethod::enumeration;
    Index rank = 0;
    double rank_tolerance = 0.0;
    bool ill_posed = false;
    /// A supporting hyperplane was accepted with a side violation inside the tolerance.
    bool tolerance_flagged = false;
};

struct BallReport {
    Vector center;
    double radius = 0.0;
    SimplexPoint support_weights;
};

struct PositiveMargin {
    double value = 0.0;  // rho_A^+ = min over the simplex of ||A p||
    SimplexPoint weights;
    std::vector<Index> support;
};

struct NegativeMargin {
    double magnitude = 0.0;  // |rho_A^-|
    PrimalDirection direction;
    std::vector<Index> facet;
    bool tolerance_flagged = false;
};

namespace detail {

// Calls f(subset) for every k-subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(Index n, Index k, F&& f)
{
    if (k > n || k < 0) return;
    std::vector<Index> s(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = i;
    for (;;) {
        f(static_cast<const std::vector<Index>&>(s));
        Index i = k - 1;
        while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++s[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < k; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
    }
}

inline Matrix select_columns(const Matrix& a, const std::vector<Index>& s)
{
    Matrix out(a.rows(), static_cast<Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) out.col(static_cast<Index>(i)) = a.col(s[i]);
    return out;
}

// Strictly better value, or equal within tie_tol and lexicographically smaller support.
inline bool better(double value, const std::vector<Index>& s, double best, const std::vector<Index>& best_s,
                   bool have_best, double tie_tol)
{
    if (!have_best) return true;
    if (value < best - tie_tol) return true;
    if (value <= best + tie_tol) return std::lexicographical_compare(s.begin(), s.end(), best_s.begin(), best_s.end());
    return false;
}

inline void check_budget(const ProblemInstance& instance, Index budget)
{
    if (instance.size() > budget)
        throw BudgetExceeded("exact enumeration is limited to " + std::to_string(budget) + " columns (instance has " +
                             std::to_string(instance.size()) +
                             "); use the iterative estimators (normalized perceptron / von Neumann-Gilbert)");
}

inline double column_scale(const ProblemInstance& instance)
{
    return std::max(1.0, instance.matrix().colwise().norm().maxCoeff());
}

}  // namespace detail

/// Distance from the origin to conv(A), by enumerating affinely independent
/// supports and solving the least-norm problem on each face.
inline PositiveMargin positive_margin_exact(const ProblemInstance& instance, Index budget = kEnumerationBudget)
{
    detail::check_budget(instance, budget);
    const Matrix& a = instance.matrix();
    const Index n = instance.size();
    const Index maxk = std::min(n, instance.rank() + 1);
    const double scale = detail::column_scale(instance);

    bool have = false;
    double best = 0.0;
    std::vector<Index> best_s;
    Vector best_q;
    for (Index k = 1; k <= maxk; ++k) {
        detail::for_each_subset(n, k, [&](const std::vector<Index>& s) {
            const auto face = lp::min_norm_on_face(detail::select_columns(a, s));
            if (!face) return;
            if (face->weights.minCoeff() < -1e-12) return;
            if (detail::better(face->norm, s, best, best_s, have, 1e-12 * scale)) {
                have = true;
                best = face->norm;
                best_s = s;
                best_q = face->weights;
            }
        });
    }
    if (!have) throw Error("positive margin enumeration found no admissible face");

    Vector p = Vector::Zero(n);
    for (std::size_t i = 0; i < best_s.size(); ++i) p[best_s[i]] = std::max(0.0, best_q[static_cast<Index>(i)]);
    p /= p.sum();

    PositiveMargin out;
    out.weights = SimplexPoint::from_approximate(p);
    out.support = out.weights.support();
    out.value = (a * out.weights.weights()).norm();
    if (out.value <= 1e-12 * scale) out.value = 0.0;  // origin in the hull
    return out;
}

/// Radius of the largest ball about the origin inside conv(A), relative to
/// lin(A), found by enumerating supporting hyperplanes through rank-many
/// columns. The returned unit direction w in lin(A) has min_i w.a_i = -magnitude.
///
/// Requires the origin to lie in conv(A).
inline NegativeMargin negative_margin_exact(const ProblemInstance& instance, Index budget = kEnumerationBudget)
{
    detail::check_budget(instance, budget);
    if (instance.rank() < 1) throw Inapplicable("instance has rank 0; lin(A) is trivial");
    const PositiveMargin pos = positive_margin_exact(instance, budget);
    if (pos.value > 0.0)
        throw Inapplicable("origin is not in conv(A) (distance " + std::to_string(pos.value) +
                           "); the margin is positive");

    const ColumnSpaceBasis& basis = instance.basis();
    const Index r = basis.rank;
    const Index n = instance.size();
    const Matrix coords = basis.basis.transpose() * instance.matrix();  // r x n
    const double scale = detail::column_scale(instance);

    bool have = false;
    double best = 0.0;
    std::vector<Index> best_s;
    Vector best_normal;
    bool best_flag = false;

    detail::for_each_subset(n, r, [&](const std::vector<Index>& s) {
        // hyperplane {x : nu.x = beta} through the chosen points: [C_S^T, -1] (nu; beta) = 0
        Matrix sys(r, r + 1);
        for (Index i = 0; i < r; ++i) {
            sys.block(i, 0, 1, r) = coords.col(s[static_cast<std::size_t>(i)]).transpose();
            sys(i, r) = -1.0;
        }
        Eigen::FullPivLU<Matrix> lu(sys);
        lu.setThreshold(1e-10);
        if (lu.rank() != r) return;  // affinely dependent
        Vector ker = lu.kernel().col(0);
        Vector nu = ker.head(r);
        const double nrm = nu.norm();
        if (nrm < 1e-12) return;
        nu /= nrm;
        double beta = ker[r] / nrm;
        Vector side = coords.transpose() * nu - Vector::Constant(n, beta);
        if (side.minCoeff() < -kSupportTolerance * scale) {
            if (side.maxCoeff() > kSupportTolerance * scale) return;  // not supporting
            nu = -nu;
            beta = -beta;
            side = -side;
        }
        const double dist = std::max(0.0, -beta);
        if (detail::better(dist, s, best, best_s, have, 1e-12 * scale)) {
            have = true;
            best = dist;
            best_s = s;
            best_normal = nu;
            best_flag = side.minCoeff() < -1e-12 * scale;
        }
    });
    if (!have) throw Error("negative margin enumeration found no supporting hyperplane");

    NegativeMargin out;
    out.magnitude = best <= 1e-12 * scale ? 0.0 : best;
    out.direction = PrimalDirection{basis.basis * best_normal, true};
    out.facet = best_s;
    out.tolerance_flagged = best_flag;
    return out;
}

/// Exact margin, affine margin and its positive/negative parts, with witnesses.
inline MarginReport margin_report(const ProblemInstance& instance, Index budget = kEnumerationBudget)
{
    MarginReport rep;
    rep.rank = instance.rank();
    rep.rank_tolerance = instance.rank_tolerance();
    rep.method = MarginMethod::enumeration;

    const PositiveMargin pos = positive_margin_exact(instance, budget);
    rep.witness_weights = pos.weights;
    if (pos.value > 0.0) {
        rep.rho_affine = pos.value;
        const Vector w = combine(instance, pos.weights);
        rep.witness_direction = PrimalDirection{w / w.norm(), true};
    } else {
        const NegativeMargin neg = negative_margin_exact(instance, budget);
        rep.rho_affine = neg.magnitude == 0.0 ? 0.0 : -neg.magnitude;
        rep.witness_direction = neg.direction;
        rep.tolerance_flagged = neg.tolerance_flagged;
    }
    rep.rho_plus = std::max(0.0, rep.rho_affine);
    rep.rho_minus = std::min(0.0, rep.rho_affine);
    // a direction orthogonal to lin(A) scores zero on every column
    rep.rho_classical = rep.rank == instance.dim() ? rep.rho_affine : std::max(0.0, rep.rho_affine);
    rep.ill_posed = std::abs(rep.rho_affine) <= kIllPosedBand;
    return rep;
}

/// Grid estimate of rho_A: the best worst-case dot product over a
/// quasi-uniform set of unit directions in lin(A). Never exceeds rho_A.
inline double margin_grid_estimate(const ProblemInstance& instance, int resolution)
{
    if (resolution < 4) throw InvalidArgument("grid resolution must be at least 4");
    const Index r = instance.rank();
    if (r < 1) throw Inapplicable("instance has rank 0");
    if (r > 3) throw Inapplicable("grid estimate supports rank <= 3 (rank is " + std::to_string(r) + ")");
    const Matrix coords = instance.basis().basis.transpose() * instance.matrix();  // r x n
    constexpr double pi = std::numbers::pi;

    double best = -std::numeric_limits<double>::infinity();
    auto eval = [&](const Vector& u) { best = std::max(best, (coords.transpose() * u).minCoeff()); };

    if (r == 1) {
        eval(Vector::Constant(1, 1.0));
        eval(Vector::Constant(1, -1.0));
    } else if (r == 2) {
        Vector u(2);
        for (int k = 0; k < resolution; ++k) {
            const double th = 2.0 * pi * k / resolution;
            u << std::cos(th), std::sin(th);
            eval(u);
        }
    } else {
        // rings of constant polar angle, azimuthal count proportional to the ring length
        const int rings = std::max(2, resolution / 2);
        Vector u(3);
        for (int i = 0; i <= rings; ++i) {
            const double th = pi * i / rings;
            const int m = std::max(1, static_cast<int>(std::ceil(resolution * std::sin(th))));
            for (int j = 0; j < m; ++j) {
                const double ph = 2.0 * pi * j / m;
                u << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
                eval(u);
            }
        }
    }
    return best;
}

/// Finds p in the simplex with A p = v, or nothing when v is outside conv(A).
inline std::optional<SimplexPoint> representable(const ProblemInstance& instance, const Vector& v,
                                                 const lp::LpOptions& opt = {})
{
    if (v.size() != instance.dim()) throw InvalidArgument("vector dimension does not match instance");
    const Index n = instance.size();
    const Index d = instance.dim();
    lp::EqualitySystem sys;
    sys.matrix = Matrix(d + 1, n);
    sys.matrix.topRows(d) = instance.matrix();
    sys.matrix.row(d).setOnes();
    sys.rhs = Vector(d + 1);
    sys.rhs.head(d) = v;
    sys.rhs[d] = 1.0;
    const auto x = lp::find_feasible_point(sys, true, opt);
    if (!x) return std::nullopt;
    SimplexPoint p = SimplexPoint::from_approximate(*x);
    const double scale = std::max(1.0, v.norm());
    if ((combine(instance, p) - v).norm() > 1e-9 * scale) return std::nullopt;
    return p;
}

/// Minimum enclosing ball of conv(A) for unit columns: radius sqrt(1 - rho+^2),
/// centered at the min-norm point of the hull.
inline BallReport minimum_enclosing_ball(const ProblemInstance& instance, Index budget = kEnumerationBudget)
{
    if (!instance.has_unit_columns())
        throw Inapplicable("minimum enclosing ball characterization needs unit-norm columns");
    const PositiveMargin pos = positive_margin_exact(instance, budget);
    BallReport ball;
    ball.support_weights = pos.weights;
    if (pos.value > 0.0) {
        ball.center = combine(instance, pos.weights);
        ball.radius = std::sqrt(std::max(0.0, 1.0 - pos.value * pos.value));
    } else {
        ball.center = Vector::Zero(instance.dim());
        ball.radius = 1.0;
    }
    return ball;
}

/// Largest ball about the origin inside conv(A) relative to lin(A); the
/// support weights are a dual certificate with A p = 0.
inline BallReport inscribed_ball(const ProblemInstance& instance, Index budget = kEnumerationBudget)
{
    const NegativeMargin neg = negative_margin_exact(instance, budget);
    BallReport ball;
    ball.center = Vector::Zero(instance.dim());
    ball.radius = neg.magnitude;
    ball.support_weights = positive_margin_exact(instance, budget).weights;
    return ball;
}

}  // namespace margins
