#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "margins/algorithms.hpp"
#include "margins/lp.hpp"
#include "margins/margin.hpp"

namespace margins {

/// One inequality replayed over a trace.
struct BoundCheck {
    std::string name;
    std::string statement;
    long checked = 0;
    long failed = 0;
    double worst_violation = 0.0;  // max of lhs - rhs over failures
    bool passed() const { return failed == 0; }

    void record(double lhs, double rhs)
    {
        ++checked;
        if (lhs > rhs) {
            ++failed;
            worst_violation = std::max(worst_violation, lhs - rhs);
        }
    }

    void require(bool ok, double amount)
    {
        ++checked;
        if (!ok) {
            ++failed;
            worst_violation = std::max(worst_violation, amount);
        }
    }
};

struct RunSummary {
    std::string instance;
    std::string algorithm;
    RunMode mode = RunMode::primal_feasibility;
    long iterations = 0;
    Termination termination = Termination::max_iters;
    std::optional<Certificate> certificate;
    std::optional<MarginReport> oracle;
    std::vector<BoundCheck> checks;
    std::string note;

    bool all_passed() const
    {
        for (const auto& c : checks)
            if (!c.passed()) return false;
        return true;
    }
};

/// Slack granted to the rate inequalities for rounding in long runs.
inline constexpr double kRateSlack = 1e-7;

/// Replays every bound that applies to this algorithm and this instance's
/// margin sign. Rate checks need the exact margins, so they are skipped when
/// `oracle` is empty. Records must carry w_t (and alpha_t for the averaging methods).
inline RunSummary summarize(const ProblemInstance& instance, const std::optional<MarginReport>& oracle,
                            const RunResult& run, const AlgorithmConfig& cfg)
{
    RunSummary s;
    s.instance = instance.name();
    s.algorithm = run.trace.algorithm;
    s.mode = cfg.mode;
    s.iterations = run.trace.updates();
    s.termination = run.trace.termination;
    s.certificate = run.certificate;
    s.oracle = oracle;
    const auto& recs = run.trace.records;
    const bool averaging = s.algorithm != "perceptron";

    auto add = [&](std::string name, std::string statement, const std::function<void(BoundCheck&)>& body) {
        BoundCheck c{std::move(name), std::move(statement)};
        body(c);
        if (c.checked > 0) s.checks.push_back(std::move(c));
    };

    if (run.certificate) {
        add("certificate", "primal: min_i w.a_i > 0; dual: p in simplex and ||A p|| <= eps", [&](BoundCheck& c) {
            const Certificate& cert = *run.certificate;
            if (cert.kind == CertificateKind::primal_feasible) {
                const double m = min_dot(instance, cert.w).first;
                c.require(m > 0.0, -m);
            } else {
                c.record(combine(instance, *cert.p).norm(), cfg.target_eps);
            }
        });
    }
    if (averaging) {
        add("iterates in hull", "||A alpha_t - w_t|| <= 1e-9", [&](BoundCheck& c) {
            for (const auto& r : recs)
                if (r.alpha.size() > 0) c.record((instance.matrix() * r.alpha - r.w).norm(), 1e-9);
        });
        add("unit ball", "||w_t|| <= 1", [&](BoundCheck& c) {
            for (const auto& r : recs)
                if (r.t >= 1) c.record(r.norm_w, 1.0 + 1e-12);
        });
    }
    if (s.algorithm == "vng") {
        add("monotone norm", "||w_{t+1}|| <= ||w_t||", [&](BoundCheck& c) {
            for (std::size_t k = 1; k < recs.size(); ++k) c.record(recs[k].norm_w, recs[k - 1].norm_w + 1e-15);
        });
    }
    if (!oracle) {
        s.note = "instance exceeds the enumeration budget; margin-dependent bounds were not checked";
        return s;
    }

    const double rho = oracle->rho_affine;
    if (rho > kIllPosedBand && s.algorithm != "vng") {
        const long bound = static_cast<long>(std::ceil(1.0 / (rho * rho)));
        add("mistake bound", "first strictly feasible iterate within ceil(1/rho^2) updates", [&](BoundCheck& c) {
            long first = -1;
            for (const auto& r : recs) {
                if (min_dot(instance, r.w).first > 0.0) {
                    first = r.t;
                    break;
                }
            }
            if (first >= 0) {
                c.record(static_cast<double>(first), static_cast<double>(bound));
            } else if (run.trace.updates() >= bound) {
                c.record(static_cast<double>(run.trace.updates() + 1), static_cast<double>(bound));
            }
        });
    }
    if (rho > kIllPosedBand && s.algorithm == "np") {
        const Vector center = combine(instance, *oracle->witness_weights);
        const Vector wstar = center / rho;
        add("margin rate", "rho - rho_t <= ||w_t/||w_t|| - w*|| <= 4/(rho sqrt t)", [&](BoundCheck& c) {
            for (const auto& r : recs) {
                if (r.t < 1) continue;
                const double gap = (r.w / r.norm_w - wstar).norm();
                c.record(rho - r.margin, gap + kRateSlack);
                c.record(gap, 4.0 / (rho * std::sqrt(static_cast<double>(r.t))) + kRateSlack);
            }
        });
        add("center rate", "||w_t - rho w*|| <= 2/sqrt t", [&](BoundCheck& c) {
            for (const auto& r : recs)
                if (r.t >= 1) c.record((r.w - center).norm(), 2.0 / std::sqrt(static_cast<double>(r.t)) + 1e-12);
        });
        add("norm sandwich", "rho <= ||w_t|| <= rho + 2/sqrt t", [&](BoundCheck& c) {
            for (const auto& r : recs) {
                if (r.t < 1) continue;
                c.record(rho, r.norm_w + 1e-12);
                c.record(r.norm_w, rho + 2.0 / std::sqrt(static_cast<double>(r.t)) + 1e-12);
            }
        });
    }
    if (rho <= kIllPosedBand && s.algorithm == "np") {
        add("dual rate", "||A alpha_t|| <= 1/sqrt t", [&](BoundCheck& c) {
            for (const auto& r : recs)
                if (r.t >= 1) c.record(r.norm_w, 1.0 / std::sqrt(static_cast<double>(r.t)) + 1e-12);
        });
    }
    if (rho < -kIllPosedBand && s.algorithm == "np") {
        const double mag = -rho;
        lp::EqualitySystem w{Matrix(instance.dim() + 1, instance.size()), Vector::Zero(instance.dim() + 1)};
        w.matrix.topRows(instance.dim()) = instance.matrix();
        w.matrix.bottomRows(1).setOnes();
        w.rhs[instance.dim()] = 1.0;
        add("dual witness distance", "dist_1(alpha_t, W) <= 2/(|rho-| sqrt t) at t = 10, 100, 1000",
            [&](BoundCheck& c) {
                for (long t : {10L, 100L, 1000L}) {
                    if (t >= static_cast<long>(recs.size())) break;
                    const auto d = lp::dist_l1_to_polyhedron(recs[static_cast<std::size_t>(t)].alpha, w, true);
                    if (d.status != lp::LpStatus::optimal) continue;
                    c.record(d.distance, 2.0 / (mag * std::sqrt(static_cast<double>(t))) + 1e-9);
                }
            });
    }
    if (rho < -kIllPosedBand && s.algorithm == "vng") {
        const double factor = std::sqrt(1.0 - rho * rho);
        add("linear contraction", "||w_{t+1}|| <= ||w_t|| sqrt(1 - rho^2)", [&](BoundCheck& c) {
            for (std::size_t k = 1; k < recs.size(); ++k)
                c.record(recs[k].norm_w, recs[k - 1].norm_w * factor + 1e-12);
        });
    }
    if (!run.certificate && rho <= kIllPosedBand && cfg.mode == RunMode::primal_feasibility)
        s.note = "no strictly feasible w exists: rho_A <= 0, so the dual system Ap = 0, p in the simplex, holds";
    return s;
}

}  // namespace margins
