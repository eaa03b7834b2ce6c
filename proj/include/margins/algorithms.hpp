#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "margins/error.hpp"
#include "margins/instance.hpp"

namespace margins {

enum class RunMode { primal_feasibility, dual_certificate, margin_maximization };

inline const char* to_string(RunMode m)
{
    switch (m) {
        case RunMode::primal_feasibility: return "primal-feasibility";
        case RunMode::dual_certificate: return "dual-certificate";
        case RunMode::margin_maximization: return "margin-maximization";
    }
    return "?";
}

enum class TieBreak { lowest_index };

struct AlgorithmConfig {
    long max_iters = 10000;
    double target_eps = 0.0;
    RunMode mode = RunMode::primal_feasibility;
    std::uint64_t seed = 0;  // reserved; ties are broken deterministically
    TieBreak tie_break = TieBreak::lowest_index;
    /// Keep w_t and alpha_t in every record (scalars are always kept).
    bool record_vectors = true;

    void validate() const
    {
        if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
        if (!(target_eps >= 0.0)) throw InvalidArgument("target_eps must be non-negative");
    }
};

enum class Termination { primal_feasible, dual_epsilon, max_iters, stalled };

inline const char* to_string(Termination t)
{
    switch (t) {
        case Termination::primal_feasible: return "primal-feasible";
        case Termination::dual_epsilon: return "dual-epsilon";
        case Termination::max_iters: return "max-iters";
        case Termination::stalled: return "stalled";
    }
    return "?";
}

struct IterateRecord {
    long t = 0;
    Vector w;
    Vector alpha;  // empty for the classical perceptron
    double norm_w = 0.0;
    /// min_i (w/||w||).a_i; NaN when w = 0
    double margin = 0.0;
    double loss = 0.0;
    /// column used to produce this iterate; -1 for the starting point
    Index chosen_index = -1;
};

struct IterateTrace {
    std::string algorithm;
    std::vector<IterateRecord> records;
    Termination termination = Termination::max_iters;

    const IterateRecord& last() const { return records.back(); }
    /// Number of updates performed (the t of the final record).
    long updates() const { return records.empty() ? 0 : records.back().t; }
};

enum class CertificateKind { primal_feasible, dual_epsilon };

inline const char* to_string(CertificateKind k)
{
    return k == CertificateKind::primal_feasible ? "primal-feasible" : "dual-epsilon";
}

struct Certificate {
    CertificateKind kind = CertificateKind::primal_feasible;
    Vector w;                        // primal payload
    std::optional<SimplexPoint> p;   // dual payload
    double epsilon = 0.0;            // ||A p|| for dual, min_i w.a_i for primal
    long iterations = 0;
};

struct RunResult {
    std::optional<Certificate> certificate;  // empty means failure
    IterateTrace trace;
};

/// L(w) = 1/2 ||w||^2 - min_i w.a_i
inline double loss(const ProblemInstance& instance, const Vector& w)
{
    if (w.size() != instance.dim()) throw InvalidArgument("vector dimension does not match instance");
    return 0.5 * w.squaredNorm() - min_dot(instance, w).first;
}

namespace detail {

inline void require_unit_columns(const ProblemInstance& instance, const char* who)
{
    if (!instance.has_unit_columns())
        throw InvalidArgument(std::string(who) + " requires unit-norm columns");
}

inline IterateRecord make_record(const ProblemInstance& instance, long t, const Vector& w, const Vector* alpha,
                                 Index chosen, bool keep_vectors)
{
    IterateRecord rec;
    rec.t = t;
    rec.norm_w = w.norm();
    const double md = min_dot(instance, w).first;
    rec.margin = rec.norm_w > 0.0 ? md / rec.norm_w : std::numeric_limits<double>::quiet_NaN();
    rec.loss = 0.5 * w.squaredNorm() - md;
    rec.chosen_index = chosen;
    if (keep_vectors) {
        rec.w = w;
        if (alpha) rec.alpha = *alpha;
    }
    return rec;
}

// Shared stopping rule for the averaging methods.
inline std::optional<Termination> check_stop(const ProblemInstance& instance, const AlgorithmConfig& cfg,
                                             const Vector& w)
{
    switch (cfg.mode) {
        case RunMode::primal_feasibility:
            if (min_dot(instance, w).first > 0.0) return Termination::primal_feasible;
            break;
        case RunMode::dual_certificate:
            if (w.norm() <= cfg.target_eps) return Termination::dual_epsilon;
            break;
        case RunMode::margin_maximization:
            break;
    }
    return std::nullopt;
}

inline std::optional<Certificate> certificate_for(const ProblemInstance& instance, const Vector& w,
                                                  const Vector& alpha, long t, Termination why, double eps)
{
    const double md = min_dot(instance, w).first;
    if (why == Termination::dual_epsilon || (why == Termination::stalled && w.norm() <= eps)) {
        Certificate c;
        c.kind = CertificateKind::dual_epsilon;
        c.w = w;
        c.p = SimplexPoint::from_approximate(alpha);
        c.epsilon = w.norm();
        c.iterations = t;
        return c;
    }
    if (md > 0.0) {
        Certificate c;
        c.kind = CertificateKind::primal_feasible;
        c.w = w;
        c.epsilon = md;
        c.iterations = t;
        return c;
    }
    return std::nullopt;
}

}  // namespace detail

/// Classical perceptron: start at a_1, add the lowest-index column with
/// w.a_i <= 0 until none remains.
inline RunResult perceptron_classic(const ProblemInstance& instance, const AlgorithmConfig& cfg = {})
{
    cfg.validate();
    detail::require_unit_columns(instance, "perceptron");
    const Matrix& a = instance.matrix();
    RunResult res;
    res.trace.algorithm = "perceptron";
    Vector w = a.col(0);
    res.trace.records.push_back(detail::make_record(instance, 0, w, nullptr, -1, cfg.record_vectors));
    for (long t = 1;; ++t) {
        const Vector dots = a.transpose() * w;
        Index mistake = -1;
        for (Index i = 0; i < dots.size(); ++i) {
            if (dots[i] <= 0.0) {
                mistake = i;
                break;
            }
        }
        if (mistake < 0) {
            res.trace.termination = Termination::primal_feasible;
            Certificate c;
            c.kind = CertificateKind::primal_feasible;
            c.w = w;
            c.epsilon = dots.minCoeff();
            c.iterations = t - 1;
            res.certificate = c;
            return res;
        }
        if (t > cfg.max_iters) {
            res.trace.termination = Termination::max_iters;
            return res;
        }
        w += a.col(mistake);
        res.trace.records.push_back(detail::make_record(instance, t, w, nullptr, mistake, cfg.record_vectors));
    }
}

/// Normalized perceptron: w_t = (1 - 1/t) w_{t-1} + (1/t) a_i with a_i the
/// worst mistake; a subgradient method on L(w) whose iterates stay in conv(A).
inline RunResult perceptron_normalized(const ProblemInstance& instance, const AlgorithmConfig& cfg = {})
{
    cfg.validate();
    detail::require_unit_columns(instance, "normalized perceptron");
    const Matrix& a = instance.matrix();
    const Index n = instance.size();
    RunResult res;
    res.trace.algorithm = "np";
    Vector w = a.col(0);
    Vector alpha = Vector::Zero(n);
    alpha[0] = 1.0;
    res.trace.records.push_back(detail::make_record(instance, 0, w, &alpha, -1, cfg.record_vectors));

    long t = 0;
    std::optional<Termination> stop = detail::check_stop(instance, cfg, w);
    while (!stop) {
        if (t >= cfg.max_iters) {
            stop = Termination::max_iters;
            break;
        }
        ++t;
        const Index i = min_dot(instance, w).second;
        const double step = 1.0 / static_cast<double>(t);
        w = (1.0 - step) * w + step * a.col(i);
        alpha *= (1.0 - step);
        alpha[i] += step;
        res.trace.records.push_back(detail::make_record(instance, t, w, &alpha, i, cfg.record_vectors));
        stop = detail::check_stop(instance, cfg, w);
    }
    res.trace.termination = *stop;
    res.certificate = detail::certificate_for(instance, w, alpha, t, *stop, cfg.target_eps);
    return res;
}

/// Von Neumann-Gilbert: move toward the furthest column with an exact line
/// search on ||lambda w + (1 - lambda) a_i||. Frank-Wolfe on min ||A p||.
inline RunResult vng(const ProblemInstance& instance, const AlgorithmConfig& cfg = {})
{
    cfg.validate();
    detail::require_unit_columns(instance, "von Neumann-Gilbert");
    const Matrix& a = instance.matrix();
    const Index n = instance.size();
    RunResult res;
    res.trace.algorithm = "vng";
    Vector w = a.col(0);
    Vector alpha = Vector::Zero(n);
    alpha[0] = 1.0;
    res.trace.records.push_back(detail::make_record(instance, 0, w, &alpha, -1, cfg.record_vectors));

    long t = 0;
    std::optional<Termination> stop = detail::check_stop(instance, cfg, w);
    while (!stop) {
        if (t >= cfg.max_iters) {
            stop = Termination::max_iters;
            break;
        }
        // furthest column, lowest index on ties
        Index far = 0;
        double far_d = -1.0;
        for (Index i = 0; i < n; ++i) {
            const double dist = (w - a.col(i)).squaredNorm();
            if (dist > far_d) {
                far_d = dist;
                far = i;
            }
        }
        const Vector v = a.col(far);
        const Vector diff = w - v;
        const double denom = diff.squaredNorm();
        double lambda = 1.0;
        if (denom > 0.0) lambda = std::clamp(-v.dot(diff) / denom, 0.0, 1.0);
        if (lambda >= 1.0) {
            stop = Termination::stalled;
            break;
        }
        ++t;
        w = lambda * w + (1.0 - lambda) * v;
        alpha *= lambda;
        alpha[far] += 1.0 - lambda;
        res.trace.records.push_back(detail::make_record(instance, t, w, &alpha, far, cfg.record_vectors));
        stop = detail::check_stop(instance, cfg, w);
    }
    res.trace.termination = *stop;
    res.certificate = detail::certificate_for(instance, w, alpha, t, *stop, cfg.target_eps);
    return res;
}

struct MarginInterval {
    double lower = 0.0;
    double upper = 0.0;
    long iterations = 0;
};

/// Runs the normalized perceptron for ceil(4/eps^2) steps; for strictly
/// feasible instances [||w_t|| - eps, ||w_t||] contains rho_A^+.
inline MarginInterval margin_estimate_np(const ProblemInstance& instance, double eps)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    AlgorithmConfig cfg;
    cfg.mode = RunMode::margin_maximization;
    cfg.max_iters = static_cast<long>(std::ceil(4.0 / (eps * eps)));
    cfg.record_vectors = false;
    const RunResult res = perceptron_normalized(instance, cfg);
    const double nw = res.trace.last().norm_w;
    return MarginInterval{nw - eps, nw, res.trace.updates()};
}

}  // namespace margins
