#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "margins/error.hpp"
#include "margins/instance.hpp"
#include "margins/lp.hpp"
#include "margins/margin.hpp"

namespace margins {

/// Slack a first-alternative witness must clear, and the residual allowed on
/// constructed witnesses.
inline constexpr double kWitnessTolerance = 1e-9;
/// Random directions sampled when certifying a ball of representable points.
inline constexpr int kBallSamples = 32;

enum class Alternative { first, second };

inline const char* to_string(Alternative a) { return a == Alternative::first ? "first" : "second"; }

/// v together with the simplex weights (if any) that represent it.
struct RepresentationSample {
    Vector v;
    std::optional<SimplexPoint> p;
    double residual = 0.0;
};

struct AlternativeCheck {
    bool holds = false;
    /// first: min_i a_i.w - threshold; second: gamma - ||A p|| (parts 1, 2) or
    /// minus the worst representation residual (part 3).
    double slack = 0.0;
    std::string reason;
};

struct GordanVerdict {
    double gamma = 0.0;
    int part = 1;
    Alternative alternative_held = Alternative::first;
    std::optional<PrimalDirection> direction;  // first alternative
    std::optional<SimplexPoint> weights;       // second alternative, parts 1 and 2
    std::vector<RepresentationSample> samples; // second alternative, part 3
    /// Per-constraint slack of the held alternative.
    Vector residuals;
    double rho_affine = 0.0;
    bool verified = false;
};

namespace detail {

inline double first_threshold(int part, double gamma)
{
    switch (part) {
        case 1: return 0.0;
        case 2: return gamma;
        case 3: return -gamma;
    }
    throw InvalidArgument("Gordan part must be 1, 2 or 3");
}

inline void check_gamma(int part, double gamma)
{
    if (part < 1 || part > 3) throw InvalidArgument("Gordan part must be 1, 2 or 3");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be a finite non-negative number");
    if (part == 1 && gamma != 0.0) throw InvalidArgument("part 1 is the gamma = 0 statement");
}

}  // namespace detail

/// Does w satisfy "w in the unit sphere of lin(A) and A^T w > threshold"?
inline AlternativeCheck check_first_alternative(const ProblemInstance& instance, double gamma, int part,
                                                const Vector& w)
{
    detail::check_gamma(part, gamma);
    AlternativeCheck out;
    if (w.size() != instance.dim()) throw InvalidArgument("direction dimension does not match instance");
    if (std::abs(w.norm() - 1.0) > 1e-10) {
        out.reason = "direction is not unit";
        return out;
    }
    const Vector perp = w - project_to_column_space(instance, w).vector;
    if (perp.norm() > 1e-8) {
        out.reason = "direction leaves lin(A)";
        return out;
    }
    out.slack = min_dot(instance, w).first - detail::first_threshold(part, gamma);
    out.holds = out.slack > kWitnessTolerance;
    if (!out.holds) out.reason = "some column violates the strict inequality";
    return out;
}

/// Does p satisfy ||A p|| <= gamma (gamma = 0 for part 1)?
inline AlternativeCheck check_second_alternative(const ProblemInstance& instance, double gamma, int part,
                                                 const SimplexPoint& p)
{
    detail::check_gamma(part, gamma);
    if (part == 3) throw InvalidArgument("part 3 second alternative is checked with check_ball_representation");
    AlternativeCheck out;
    out.slack = gamma - combine(instance, p).norm();
    out.holds = out.slack >= -kWitnessTolerance;
    if (!out.holds) out.reason = "||A p|| exceeds gamma";
    return out;
}

/// Directions used to probe gamma * ball(lin A): +-basis vectors and seeded random unit vectors.
inline std::vector<Vector> ball_probe_directions(const ProblemInstance& instance, int random_count,
                                                 std::uint64_t seed)
{
    const Matrix& b = instance.basis().basis;
    std::vector<Vector> dirs;
    for (Index j = 0; j < b.cols(); ++j) {
        dirs.emplace_back(b.col(j));
        dirs.emplace_back(-b.col(j));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < random_count && b.cols() > 0; ++k) {
        Vector c(b.cols());
        for (Index j = 0; j < c.size(); ++j) c[j] = gauss(rng);
        const double nc = c.norm();
        if (nc == 0.0) continue;
        dirs.emplace_back(b * (c / nc));
    }
    return dirs;
}

/// Checks that gamma * u is in conv(A) for every probe direction u.
inline AlternativeCheck check_ball_representation(const ProblemInstance& instance, double gamma,
                                                  const std::vector<Vector>& directions,
                                                  std::vector<RepresentationSample>* samples = nullptr)
{
    AlternativeCheck out;
    out.holds = true;
    double worst = 0.0;
    for (const Vector& u : directions) {
        RepresentationSample s;
        s.v = gamma * u;
        s.p = representable(instance, s.v);
        if (s.p) {
            s.residual = (combine(instance, *s.p) - s.v).norm();
        } else {
            s.residual = std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, s.residual);
        if (!s.p || s.residual > kWitnessTolerance) {
            out.holds = false;
            out.reason = "a point of the gamma-ball is not in conv(A)";
        }
        if (samples) samples->push_back(std::move(s));
    }
    out.slack = -worst;
    return out;
}

/// Decides which alternative of the margin form of Gordan's theorem holds
/// and returns the witness the constructive argument produces.
///
///  part 1: A^T w > 0 for some unit w in lin(A), or A p = 0 for some p.
///  part 2: A^T w > gamma, or ||A p|| <= gamma.
///  part 3: A^T w > -gamma, or gamma * ball(lin A) is inside conv(A).
///
/// Refuses (Inapplicable) when rho_A is within the ill-posed band of the
/// threshold, where floating point cannot separate the alternatives.
inline GordanVerdict gordan_decide(const ProblemInstance& instance, double gamma, int part,
                                   const MarginReport& report, std::uint64_t seed = 0)
{
    detail::check_gamma(part, gamma);
    const double thr = detail::first_threshold(part, gamma);
    if (std::abs(report.rho_affine - thr) <= kIllPosedBand)
        throw Inapplicable("affine margin " + std::to_string(report.rho_affine) +
                           " is inside the ill-posed band around " + std::to_string(thr));

    GordanVerdict v;
    v.gamma = gamma;
    v.part = part;
    v.rho_affine = report.rho_affine;

    if (report.rho_affine > thr) {
        v.alternative_held = Alternative::first;
        v.direction = report.witness_direction;
        v.residuals = instance.matrix().transpose() * v.direction->vector - Vector::Constant(instance.size(), thr);
        v.verified = check_first_alternative(instance, gamma, part, v.direction->vector).holds;
        return v;
    }

    v.alternative_held = Alternative::second;
    if (part == 3) {
        const auto dirs = ball_probe_directions(instance, kBallSamples, seed);
        const AlternativeCheck chk = check_ball_representation(instance, gamma, dirs, &v.samples);
        v.residuals = Vector(static_cast<Index>(v.samples.size()));
        for (std::size_t i = 0; i < v.samples.size(); ++i) v.residuals[static_cast<Index>(i)] = v.samples[i].residual;
        // rho_A <= -gamma already certifies the whole ball; the samples are a residual check
        v.verified = chk.holds && -report.rho_affine >= gamma;
        return v;
    }
    // min-norm point of the hull: ||A p|| = rho_A^+ <= gamma
    v.weights = report.witness_weights;
    v.residuals = combine(instance, *v.weights);
    v.verified = check_second_alternative(instance, gamma, part, *v.weights).holds;
    return v;
}

inline GordanVerdict gordan_decide(const ProblemInstance& instance, double gamma, int part, std::uint64_t seed = 0)
{
    return gordan_decide(instance, gamma, part, margin_report(instance), seed);
}

enum class HoffmanVariant { dual_general, dual_simplex, primal };

inline const char* to_string(HoffmanVariant v)
{
    switch (v) {
        case HoffmanVariant::dual_general: return "dual-general";
        case HoffmanVariant::dual_simplex: return "dual-simplex";
        case HoffmanVariant::primal: return "primal";
    }
    return "?";
}

struct HoffmanReport {
    HoffmanVariant variant = HoffmanVariant::dual_general;
    /// The bound being certified (the sharp one for the simplex variant).
    double bound_value = 0.0;
    /// Simplex variant only: 2 ||A p|| / |rho_A^-|.
    double relaxed_bound = 0.0;
    double margin_used = 0.0;  // |rho_A^-| or rho_A^+
    Vector constructed_witness;
    /// Distance from the query point to the constructed witness (l1 for the
    /// dual variants, l2 for the primal one).
    double witness_distance = 0.0;
    double witness_residual = 0.0;
    std::optional<double> exact_distance;
    std::optional<Vector> nearest_point;
    /// Primal variant: value of the dual LP along the optimal direction.
    std::optional<double> dual_chain_value;
    double slack = 0.0;  // bound_value - exact_distance
    bool short_circuit = false;
    bool verified = false;
    std::string note;
};

namespace detail {

inline double negative_margin_magnitude(const MarginReport& rep)
{
    if (rep.rho_affine >= -kIllPosedBand)
        throw Inapplicable("theorem needs |rho_A^-| > 0 (rho_A = " + std::to_string(rep.rho_affine) + ")");
    return -rep.rho_affine;
}

inline void finish(HoffmanReport& r, double scale)
{
    const double tol = kWitnessTolerance * scale;
    r.slack = r.exact_distance ? r.bound_value - *r.exact_distance : 0.0;
    r.verified = r.witness_residual <= tol && r.witness_distance <= r.bound_value + tol &&
                 (!r.exact_distance || *r.exact_distance <= r.bound_value + tol);
    if (!r.verified && r.note.empty()) r.note = "bound or witness check failed";
}

}  // namespace detail

/// l1 error bound for W = {x >= 0 | A x = b}: dist_1(x, W) <= ||A x - b|| / |rho_A^-|.
/// The witness is x + p ||A x - b|| / |rho_A^-| with A p on the inscribed sphere.
inline HoffmanReport hoffman_dual(const ProblemInstance& instance, const Vector& b, const Vector& x,
                                  const MarginReport& rep, bool compute_exact = true)
{
    const Index n = instance.size();
    if (b.size() != instance.dim() || x.size() != n) throw InvalidArgument("b or x has the wrong dimension");
    if (x.minCoeff() < 0.0) throw InvalidArgument("x must be non-negative");
    const double rho = detail::negative_margin_magnitude(rep);
    const double scale = std::max({1.0, b.norm(), x.lpNorm<1>()});

    const Vector bproj = project_to_column_space(instance, b).vector;
    if ((b - bproj).norm() > kWitnessTolerance * scale)
        throw Inapplicable("b is not in lin(A), so W is empty");
    lp::EqualitySystem sys{instance.matrix(), b};
    if (!lp::find_feasible_point(sys, true)) throw Inapplicable("W = {x >= 0 | Ax = b} is empty");

    HoffmanReport r;
    r.variant = HoffmanVariant::dual_general;
    r.margin_used = rho;
    const Vector resid = instance.matrix() * x - b;
    const double viol = resid.norm();
    if (viol <= 1e-12 * scale) {
        r.short_circuit = true;
        r.constructed_witness = x;
        r.witness_residual = viol;
        r.exact_distance = 0.0;
        r.nearest_point = x;
        detail::finish(r, scale);
        return r;
    }
    r.bound_value = viol / rho;
    const Vector v = -rho * resid / viol;
    const auto p = representable(instance, v);
    if (!p) {
        r.note = "point on the inscribed sphere was not representable";
        r.constructed_witness = x;
        r.witness_residual = viol;
        detail::finish(r, scale);
        r.verified = false;
        return r;
    }
    r.constructed_witness = x + p->weights() * r.bound_value;
    r.witness_distance = (r.constructed_witness - x).lpNorm<1>();
    r.witness_residual = std::max((instance.matrix() * r.constructed_witness - b).norm(),
                                  -std::min(0.0, r.constructed_witness.minCoeff()));
    if (compute_exact) {
        const auto proj = lp::dist_l1_to_polyhedron(x, sys, true);
        if (proj.status == lp::LpStatus::optimal) {
            r.exact_distance = proj.distance;
            r.nearest_point = proj.point;
        }
    }
    detail::finish(r, std::max(scale, r.bound_value));
    return r;
}

inline HoffmanReport hoffman_dual(const ProblemInstance& instance, const Vector& b, const Vector& x,
                                  bool compute_exact = true)
{
    return hoffman_dual(instance, b, x, margin_report(instance), compute_exact);
}

/// W = {p in simplex | A p = 0}: dist_1(p, W) <= 2||Ap|| / (||Ap|| + |rho_A^-|) <= 2||Ap|| / |rho_A^-|.
inline HoffmanReport hoffman_simplex(const ProblemInstance& instance, const SimplexPoint& p, const MarginReport& rep,
                                     bool compute_exact = true)
{
    const Index n = instance.size();
    if (p.size() != n) throw InvalidArgument("simplex point has the wrong dimension");
    const double rho = detail::negative_margin_magnitude(rep);

    HoffmanReport r;
    r.variant = HoffmanVariant::dual_simplex;
    r.margin_used = rho;
    const Vector ap = combine(instance, p);
    const double nap = ap.norm();
    lp::EqualitySystem sys;
    sys.matrix = Matrix(instance.dim() + 1, n);
    sys.matrix.topRows(instance.dim()) = instance.matrix();
    sys.matrix.bottomRows(1).setOnes();
    sys.rhs = Vector::Zero(instance.dim() + 1);
    sys.rhs[instance.dim()] = 1.0;

    if (nap <= 1e-12) {
        r.short_circuit = true;
        r.constructed_witness = p.weights();
        r.witness_residual = nap;
        r.exact_distance = 0.0;
        r.nearest_point = p.weights();
        detail::finish(r, 1.0);
        return r;
    }
    r.bound_value = 2.0 * nap / (nap + rho);
    r.relaxed_bound = 2.0 * nap / rho;
    const Vector v = -(rho / nap) * ap;
    const auto pp = representable(instance, v);
    if (!pp) {
        r.note = "point on the inscribed sphere was not representable";
        r.constructed_witness = p.weights();
        r.witness_residual = nap;
        detail::finish(r, 1.0);
        r.verified = false;
        return r;
    }
    const double lambda = nap / (nap + rho);
    r.constructed_witness = lambda * pp->weights() + (1.0 - lambda) * p.weights();
    r.witness_distance = (r.constructed_witness - p.weights()).lpNorm<1>();
    r.witness_residual = std::max({(instance.matrix() * r.constructed_witness).norm(),
                                   std::abs(r.constructed_witness.sum() - 1.0),
                                   -std::min(0.0, r.constructed_witness.minCoeff())});
    if (compute_exact) {
        const auto proj = lp::dist_l1_to_polyhedron(p.weights(), sys, true);
        if (proj.status == lp::LpStatus::optimal) {
            r.exact_distance = proj.distance;
            r.nearest_point = proj.point;
        }
    }
    if (r.relaxed_bound + 1e-12 < r.bound_value) r.note = "sharp bound exceeds relaxed bound";
    detail::finish(r, 1.0);
    return r;
}

inline HoffmanReport hoffman_simplex(const ProblemInstance& instance, const SimplexPoint& p,
                                     bool compute_exact = true)
{
    return hoffman_simplex(instance, p, margin_report(instance), compute_exact);
}

/// Euclidean error bound for S = {y | A^T y >= c}: dist(w, S) <= ||[A^T w - c]^-||_inf / rho_A^+.
/// The witness moves w along the unit margin maximizer.
inline HoffmanReport hoffman_primal(const ProblemInstance& instance, const Vector& c, const Vector& w,
                                    const MarginReport& rep, bool compute_exact = true)
{
    const Index n = instance.size();
    if (c.size() != n || w.size() != instance.dim()) throw InvalidArgument("c or w has the wrong dimension");
    if (rep.rho_affine <= kIllPosedBand)
        throw Inapplicable("theorem needs rho_A^+ > 0 (rho_A = " + std::to_string(rep.rho_affine) + ")");
    const double rho = rep.rho_affine;
    const Vector wbar = rep.witness_direction->vector;
    const double scale = std::max({1.0, c.cwiseAbs().maxCoeff(), w.norm()});

    HoffmanReport r;
    r.variant = HoffmanVariant::primal;
    r.margin_used = rho;
    const Vector gap = (c - instance.matrix().transpose() * w).cwiseMax(0.0);
    const double worst = gap.lpNorm<Eigen::Infinity>();
    if (worst <= 0.0) {
        r.short_circuit = true;
        r.constructed_witness = w;
        r.exact_distance = 0.0;
        r.nearest_point = w;
        detail::finish(r, scale);
        return r;
    }
    r.bound_value = worst / rho;
    r.constructed_witness = w + r.bound_value * wbar;
    r.witness_distance = (r.constructed_witness - w).norm();
    r.witness_residual = (c - instance.matrix().transpose() * r.constructed_witness).cwiseMax(0.0).maxCoeff();
    if (compute_exact && n <= 16) {
        const auto proj = lp::dist_l2_to_halfspaces(instance.matrix(), c, w);
        if (proj.status == lp::LpStatus::optimal) {
            r.exact_distance = proj.distance;
            r.nearest_point = proj.point;
            if (proj.distance > 0.0) {
                const Vector mu = (proj.point - w) / proj.distance;
                const Vector rr = c - instance.matrix().transpose() * w;
                const auto dual = lp::projection_dual_lp(instance.matrix(), rr, mu);
                if (dual.status == lp::LpStatus::optimal) r.dual_chain_value = dual.objective_value;
            }
        }
    }
    detail::finish(r, std::max(scale, r.bound_value));
    if (r.dual_chain_value && r.exact_distance &&
        std::abs(*r.dual_chain_value - *r.exact_distance) > 1e-7 * std::max(1.0, *r.exact_distance)) {
        r.note = "dual LP value disagrees with the projection distance";
        r.verified = false;
    }
    return r;
}

inline HoffmanReport hoffman_primal(const ProblemInstance& instance, const Vector& c, const Vector& w,
                                    bool compute_exact = true)
{
    return hoffman_primal(instance, c, w, margin_report(instance), compute_exact);
}

}  // namespace margins
