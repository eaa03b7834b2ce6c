// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "margins/margins.hpp"

using namespace margins;

namespace {

struct Outcome {
    long checks = 0;
    long violations = 0;
    double worst = 0.0;  // largest violation amount seen
    std::string detail;

    void expect(bool ok, double amount = 0.0)
    {
        ++checks;
        if (!ok) {
            ++violations;
            worst = std::max(worst, amount);
        }
    }
};

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

long uniform_int(std::mt19937_64& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

double sqrt_t(long t) { return std::sqrt(static_cast<double>(t)); }

GeneratedInstance planted_positive(std::mt19937_64& rng, std::uint64_t seed)
{
    GeneratorSpec s;
    s.kind = GeneratorKind::planted_positive;
    s.d = uniform_int(rng, 2, 5);
    s.n = uniform_int(rng, 2, 10);
    s.target_margin = uniform(rng, 0.1, 0.5);
    s.seed = seed;
    return generate(s);
}

GeneratedInstance planted_negative(std::mt19937_64& rng, std::uint64_t seed)
{
    GeneratorSpec s;
    s.kind = GeneratorKind::planted_negative;
    s.d = uniform_int(rng, 2, 5);
    s.n = uniform_int(rng, s.d + 1, 10);
    const double inradius = detail::negative_template(s.d, s.n).second;
    s.target_margin = -uniform(rng, 0.05, 0.9 * inradius);
    s.jitter = 0.1;
    s.seed = seed;
    return generate(s);
}

// planted-positive, planted-negative, rank-deficient, near-ill-posed and raw gaussian columns
ProblemInstance mixed_instance(std::mt19937_64& rng, int k)
{
    const auto seed = static_cast<std::uint64_t>(k);
    switch (k % 5) {
        case 0: return planted_positive(rng, seed).instance;
        case 1: return planted_negative(rng, seed).instance;
        case 2: {
            GeneratorSpec s;
            s.kind = GeneratorKind::rank_deficient;
            s.d = uniform_int(rng, 2, 5);
            const Index inner = s.d - 1;
            s.n = uniform_int(rng, std::max<Index>(inner + 1, inner == 2 ? 3 : 2), 10);
            if (k % 2 == 0) {
                s.target_margin = uniform(rng, 0.1, 0.5);
            } else {
                const double inradius = detail::negative_template(inner, s.n).second;
                s.target_margin = -uniform(rng, 0.05, 0.9 * inradius);
                s.jitter = inner >= 2 ? 0.1 : 0.0;
            }
            s.seed = seed;
            return generate(s).instance;
        }
        case 3: {
            GeneratorSpec s;
            s.kind = GeneratorKind::near_ill_posed;
            s.d = uniform_int(rng, 2, 5);
            s.n = uniform_int(rng, 2, 10);
            s.seed = seed;
            return generate(s).instance;
        }
        default: {
            const Index d = uniform_int(rng, 1, 5), n = uniform_int(rng, 1, 10);
            Matrix a(d, n);
            std::normal_distribution<double> g;
            for (Index i = 0; i < n; ++i) {
                for (Index j = 0; j < d; ++j) a(j, i) = g(rng);
                a.col(i).normalize();
            }
            return ProblemInstance(a, "gaussian-" + std::to_string(k), true);
        }
    }
}

SimplexPoint random_simplex_point(std::mt19937_64& rng, Index n)
{
    std::exponential_distribution<double> e;
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = e(rng);
    return SimplexPoint::from_approximate(w / w.sum());
}

lp::EqualitySystem simplex_kernel(const ProblemInstance& inst)
{
    lp::EqualitySystem w{Matrix(inst.dim() + 1, inst.size()), Vector::Zero(inst.dim() + 1)};
    w.matrix.topRows(inst.dim()) = inst.matrix();
    w.matrix.bottomRows(1).setOnes();
    w.rhs[inst.dim()] = 1.0;
    return w;
}

AlgorithmConfig config(RunMode mode, long max_iters, double eps = 0.0)
{
    AlgorithmConfig c;
    c.mode = mode;
    c.max_iters = max_iters;
    c.target_eps = eps;
    return c;
}

// ---------------------------------------------------------------------------

Outcome gordan_exclusivity()
{
    std::mt19937_64 rng(1001);
    Outcome out;
    long refused = 0;
    for (int k = 0; k < 1000; ++k) {
        const ProblemInstance inst = mixed_instance(rng, k);
        const MarginReport rep = margin_report(inst);
        const double r = std::abs(rep.rho_affine);
        for (int part = 1; part <= 3; ++part) {
            for (double gamma : {0.0, 0.5 * r, 2.0 * r}) {
                if (part == 1 && gamma != 0.0) continue;
                const double thr = part == 1 ? 0.0 : part == 2 ? gamma : -gamma;
                if (std::abs(rep.rho_affine - thr) <= kIllPosedBand) {
                    ++refused;
                    continue;
                }
                const GordanVerdict v = gordan_decide(inst, gamma, part, rep, static_cast<std::uint64_t>(k));
                // the held alternative, checked from its witness alone
                bool held_ok = false;
                double residual = 0.0;
                if (v.alternative_held == Alternative::first) {
                    const auto c = check_first_alternative(inst, gamma, part, v.direction->vector);
                    held_ok = c.holds;
                    residual = -c.slack;
                } else if (part == 3) {
                    for (const auto& s : v.samples) residual = std::max(residual, s.residual);
                    held_ok = !v.samples.empty() && residual <= kWitnessTolerance && r >= gamma;
                } else {
                    const auto c = check_second_alternative(inst, gamma, part, *v.weights);
                    held_ok = c.holds;
                    residual = -c.slack;
                }
                // the other alternative must fail on its best candidate
                bool other_ok = false;
                if (v.alternative_held == Alternative::first) {
                    if (part == 3) {
                        const std::vector<Vector> dir{-v.direction->vector};
                        other_ok = check_ball_representation(inst, gamma, dir).holds;
                    } else {
                        other_ok = check_second_alternative(inst, gamma, part, *rep.witness_weights).holds;
                    }
                } else {
                    other_ok = check_first_alternative(inst, gamma, part, rep.witness_direction->vector).holds;
                }
                out.expect(held_ok && !other_ok && v.verified, residual);
            }
        }
    }
    out.detail = std::to_string(out.checks) + " verdicts, " + std::to_string(refused) + " in the ill-posed band";
    return out;
}

Outcome mistake_bound()
{
    std::mt19937_64 rng(2002);
    Outcome out;
    long worst_ratio_num = 0, worst_ratio_den = 1;
    for (int k = 0; k < 200; ++k) {
        const auto g = planted_positive(rng, static_cast<std::uint64_t>(k));
        const double rho = *g.oracle_rho_affine;
        const long bound = static_cast<long>(std::ceil(1.0 / (rho * rho)));
        for (const auto& res : {perceptron_classic(g.instance, config(RunMode::primal_feasibility, bound + 10)),
                                perceptron_normalized(g.instance, config(RunMode::primal_feasibility, bound + 10))}) {
            const bool ok = res.certificate && res.certificate->kind == CertificateKind::primal_feasible &&
                            min_dot(g.instance, res.certificate->w).first > 0.0 && res.trace.updates() <= bound;
            out.expect(ok, static_cast<double>(res.trace.updates() - bound));
            if (res.trace.updates() * worst_ratio_den > worst_ratio_num * bound) {
                worst_ratio_num = res.trace.updates();
                worst_ratio_den = bound;
            }
        }
    }
    out.detail = "max updates/bound = " + std::to_string(worst_ratio_num) + "/" + std::to_string(worst_ratio_den);
    return out;
}

Outcome np_dual_certificate()
{
    std::mt19937_64 rng(3003);
    Outcome out;
    double tightest = 0.0;
    for (int k = 0; k < 200; ++k) {
        ProblemInstance inst = k % 4 == 3 ? mixed_instance(rng, 5 * k + 2) : planted_negative(rng, 10000 + k).instance;
        if (margin_report(inst).rho_affine >= 0.0) inst = planted_negative(rng, 20000 + k).instance;
        for (double eps : {0.5, 0.2, 0.1}) {
            const long t = static_cast<long>(std::ceil(1.0 / (eps * eps)));
            const auto res = perceptron_normalized(inst, config(RunMode::margin_maximization, t));
            const double achieved = (inst.matrix() * res.trace.last().alpha).norm();
            out.expect(res.trace.updates() == t && achieved <= eps, achieved - eps);
            tightest = std::max(tightest, achieved / eps);
        }
    }
    out.detail = "max ||A alpha_t|| / eps = " + std::to_string(tightest);
    return out;
}

struct PositiveRun {
    double rho;
    Vector wstar;
    RunResult np;
    ProblemInstance instance;
};

std::vector<PositiveRun> positive_battery()
{
    std::mt19937_64 rng(4004);
    std::vector<PositiveRun> runs;
    for (int k = 0; k < 100; ++k) {
        const auto g = planted_positive(rng, 30000 + static_cast<std::uint64_t>(k));
        const double rho = *g.oracle_rho_affine;
        const Vector wstar = minimum_enclosing_ball(g.instance).center / rho;
        runs.push_back({rho, wstar, perceptron_normalized(g.instance, config(RunMode::margin_maximization, 10000)),
                        g.instance});
    }
    return runs;
}

Outcome margin_maximization(const std::vector<PositiveRun>& runs)
{
    Outcome out;
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& run : runs) {
        for (const auto& rec : run.np.trace.records) {
            if (rec.t < 1) continue;
            const double gap = (rec.w / rec.norm_w - run.wstar).norm();
            const double lhs = run.rho - rec.margin;
            const double rhs = 4.0 / (run.rho * sqrt_t(rec.t));
            out.expect(lhs <= gap + 1e-7, lhs - gap);
            out.expect(gap <= rhs + 1e-7, gap - rhs);
            min_slack = std::min(min_slack, rhs - gap);
        }
    }
    out.detail = std::to_string(out.checks) + " inequalities, min slack of the rate bound " + std::to_string(min_slack);
    return out;
}

Outcome meb_convergence(const std::vector<PositiveRun>& runs)
{
    Outcome out;
    for (const auto& run : runs) {
        for (const auto& rec : run.np.trace.records) {
            if (rec.t < 1) continue;
            const double r2 = 2.0 / sqrt_t(rec.t);
            const double dist = (rec.w - run.rho * run.wstar).norm();
            out.expect(dist <= r2 + 1e-12, dist - r2);
            out.expect(rec.norm_w >= run.rho - 1e-12, run.rho - rec.norm_w);
            out.expect(rec.norm_w <= run.rho + r2 + 1e-12, rec.norm_w - run.rho - r2);
        }
        for (double eps : {0.5, 0.1}) {
            const auto iv = margin_estimate_np(run.instance, eps);
            out.expect(iv.lower <= run.rho && run.rho <= iv.upper + 1e-12,
                       std::max(iv.lower - run.rho, run.rho - iv.upper));
        }
    }
    out.detail = std::to_string(out.checks) + " inequalities";
    return out;
}

std::vector<GeneratedInstance> negative_battery()
{
    std::mt19937_64 rng(6006);
    std::vector<GeneratedInstance> out;
    for (int k = 0; k < 100; ++k) out.push_back(planted_negative(rng, 40000 + static_cast<std::uint64_t>(k)));
    return out;
}

Outcome dual_witness_distance(const std::vector<GeneratedInstance>& battery)
{
    Outcome out;
    double worst_ratio = 0.0;
    for (const auto& g : battery) {
        const double r = -*g.oracle_rho_affine;
        const auto res = perceptron_normalized(g.instance, config(RunMode::margin_maximization, 1000));
        const auto w = simplex_kernel(g.instance);
        for (long t : {10L, 100L, 1000L}) {
            const Vector& alpha = res.trace.records[static_cast<std::size_t>(t)].alpha;
            const auto d = lp::dist_l1_to_polyhedron(alpha, w, true);
            const double bound = 2.0 / (r * sqrt_t(t));
            out.expect(d.status == lp::LpStatus::optimal && d.distance <= bound + 1e-9, d.distance - bound);
            worst_ratio = std::max(worst_ratio, d.distance / bound);
        }
    }
    out.detail = "max dist/bound = " + std::to_string(worst_ratio);
    return out;
}

Outcome vng_linear_convergence(const std::vector<GeneratedInstance>& battery)
{
    Outcome out;
    long over_budget = 0;
    double worst_use = 0.0;
    for (const auto& g : battery) {
        const double r = -*g.oracle_rho_affine;
        const long budget = static_cast<long>(std::ceil(std::log(1e6) / (r * r))) + 1;
        const auto res = vng(g.instance, config(RunMode::dual_certificate, budget, 1e-6));
        const double factor = std::sqrt(1.0 - r * r);
        const auto& recs = res.trace.records;
        for (std::size_t k = 1; k < recs.size(); ++k) {
            const double allowed = recs[k - 1].norm_w * factor + 1e-12;
            out.expect(recs[k].norm_w <= allowed, recs[k].norm_w - allowed);
        }
        const bool reached = res.trace.last().norm_w <= 1e-6;
        if (!reached) ++over_budget;
        out.expect(reached, res.trace.last().norm_w);
        worst_use = std::max(worst_use, static_cast<double>(res.trace.updates()) / static_cast<double>(budget));
    }
    out.detail = std::to_string(over_budget) + " runs missed 1e-6 within the step budget; max steps/budget = " +
                 std::to_string(worst_use);
    return out;
}

Outcome hoffman_bounds()
{
    std::mt19937_64 rng(8008);
    std::normal_distribution<double> gauss;
    Outcome out;
    int counts[3] = {0, 0, 0};
    auto record = [&](const HoffmanReport& r) {
        const bool exact_ok = !r.exact_distance || *r.exact_distance <= r.bound_value + 1e-9;
        out.expect(r.verified && r.witness_residual <= 1e-9 && exact_ok && r.exact_distance.has_value(),
                   std::max(r.witness_residual, r.exact_distance ? *r.exact_distance - r.bound_value : 1.0));
    };
    for (int k = 0; counts[0] < 100 || counts[1] < 100 || counts[2] < 100; ++k) {
        const bool negative = (k % 2 == 0);
        const auto g = negative ? planted_negative(rng, 50000 + static_cast<std::uint64_t>(k))
                                : planted_positive(rng, 50000 + static_cast<std::uint64_t>(k));
        const ProblemInstance& inst = g.instance;
        const MarginReport rep = margin_report(inst);
        const Index n = inst.size(), d = inst.dim();
        if (negative) {
            if (counts[0] < 100) {
                const Vector x = uniform(rng, 0.1, 3.0) * random_simplex_point(rng, n).weights();
                const Vector b = uniform(rng, 0.0, 2.0) * combine(inst, random_simplex_point(rng, n));
                record(hoffman_dual(inst, b, x, rep));
                ++counts[0];
            }
            if (counts[1] < 100) {
                record(hoffman_simplex(inst, random_simplex_point(rng, n), rep));
                ++counts[1];
            }
        } else if (counts[2] < 100) {
            Vector c(n), w(d);
            for (Index i = 0; i < n; ++i) c[i] = gauss(rng);
            for (Index i = 0; i < d; ++i) w[i] = gauss(rng);
            const auto r = hoffman_primal(inst, c, w, rep);
            record(r);
            // the projection and the dual chain must agree as well
            if (!r.short_circuit) out.expect(r.dual_chain_value.has_value());
            ++counts[2];
        }
    }
    // worked tight examples
    const auto pair = ingest(Matrix((Matrix(2, 2) << 1, -1, 0, 0).finished()), true, "pair");
    const auto tight_dual = hoffman_dual(pair, Vector::Zero(2), (Vector(2) << 1, 0).finished());
    out.expect(std::abs(tight_dual.bound_value - 1.0) <= 1e-9 && tight_dual.exact_distance &&
                   std::abs(*tight_dual.exact_distance - tight_dual.bound_value) <= 1e-9,
               1.0);
    const auto ortho = ingest(Matrix(Matrix::Identity(2, 2)), true, "ortho");
    const auto tight_primal = hoffman_primal(ortho, Vector::Ones(2), Vector::Zero(2));
    out.expect(std::abs(tight_primal.bound_value - std::sqrt(2.0)) <= 1e-9 && tight_primal.exact_distance &&
                   std::abs(*tight_primal.exact_distance - tight_primal.bound_value) <= 1e-9,
               1.0);
    out.detail = "300 random triples plus 2 tight examples";
    return out;
}

Outcome geometry_oracles()
{
    std::mt19937_64 rng(9009);
    std::normal_distribution<double> gauss;
    Outcome out;
    // minimum enclosing ball: measured radius and the optimality condition
    for (int k = 0; k < 200; ++k) {
        const auto g = planted_positive(rng, 60000 + static_cast<std::uint64_t>(k));
        const double rho = *g.oracle_rho_affine;
        const BallReport ball = minimum_enclosing_ball(g.instance);
        double reach = 0.0;
        for (Index i = 0; i < g.instance.size(); ++i)
            reach = std::max(reach, (g.instance.column(i) - ball.center).norm());
        out.expect(std::abs(reach * reach + rho * rho - 1.0) <= 1e-9, std::abs(reach * reach + rho * rho - 1.0));
        // center is a convex combination of columns on the sphere of radius `reach`
        bool supported = (combine(g.instance, ball.support_weights) - ball.center).norm() <= 1e-9;
        for (Index i : ball.support_weights.support())
            supported = supported && std::abs((g.instance.column(i) - ball.center).norm() - reach) <= 1e-9;
        out.expect(supported, 1.0);
    }
    // inscribed ball by representability sampling
    for (int k = 0; k < 100; ++k) {
        const auto g = planted_negative(rng, 70000 + static_cast<std::uint64_t>(k));
        const double r = -*g.oracle_rho_affine;
        const MarginReport rep = margin_report(g.instance);
        for (int s = 0; s < 16; ++s) {
            Vector v(g.instance.dim());
            for (Index j = 0; j < v.size(); ++j) v[j] = gauss(rng);
            v = project_to_column_space(g.instance, v).vector;
            v *= uniform(rng, 0.0, 0.99) * r / v.norm();
            out.expect(representable(g.instance, v).has_value(), 1.0);
        }
        const Vector outside = -(1.0 + 1e-3) * r * rep.witness_direction->vector;
        out.expect(!representable(g.instance, outside).has_value(), 1.0);
    }
    // grid against enumeration
    for (int k = 0; k < 200; ++k) {
        const ProblemInstance inst = mixed_instance(rng, k);
        if (inst.rank() > 3) continue;
        const int res = inst.rank() == 3 ? 90 : 2000;
        const double exact = margin_report(inst).rho_affine;
        const double grid = margin_grid_estimate(inst, res);
        const double tol = 2.0 * std::numbers::pi / res;
        out.expect(std::abs(grid - exact) <= tol, std::abs(grid - exact) - tol);
    }
    out.detail = std::to_string(out.checks) + " checks";
    return out;
}

Outcome lp_soundness()
{
    using namespace margins::testing;
    std::mt19937_64 rng(10010);
    std::uniform_int_distribution<int> coef(-3, 3), rhs(-2, 6);
    Outcome out;
    int by_status[3] = {0, 0, 0};
    for (int k = 0; k < 500; ++k) {
        const Index n = uniform_int(rng, 1, 8);
        const Index rows = uniform_int(rng, 1, 8);
        const Index me = uniform_int(rng, 0, std::min<Index>(rows, std::min<Index>(n, 3)));
        const Index mi = rows - me;
        lp::LinearProgram prog;
        prog.objective = Vector(n);
        for (Index j = 0; j < n; ++j) prog.objective[j] = coef(rng);
        prog.eq_matrix = Matrix(me, n);
        prog.eq_rhs = Vector(me);
        prog.ineq_matrix = Matrix(mi, n);
        prog.ineq_rhs = Vector(mi);
        for (Index i = 0; i < me; ++i) {
            for (Index j = 0; j < n; ++j) prog.eq_matrix(i, j) = coef(rng);
            prog.eq_rhs[i] = rhs(rng);
        }
        for (Index i = 0; i < mi; ++i) {
            for (Index j = 0; j < n; ++j) prog.ineq_matrix(i, j) = coef(rng);
            prog.ineq_rhs[i] = rhs(rng);
        }
        const auto s = lp::solve(prog);
        const auto b = brute_force_lp(prog.eq_matrix, prog.eq_rhs, prog.ineq_matrix, prog.ineq_rhs, prog.objective);
        ++by_status[static_cast<int>(b.status)];
        const bool same = static_cast<int>(s.status) == static_cast<int>(b.status);
        const double gap = b.status == BruteStatus::optimal && same ? std::abs(s.objective_value - b.value) : 0.0;
        out.expect(same && gap <= 1e-8, same ? gap : 1.0);
    }
    out.detail = std::to_string(by_status[0]) + " optimal, " + std::to_string(by_status[1]) + " infeasible, " +
                 std::to_string(by_status[2]) + " unbounded";
    return out;
}

}  // namespace

int main()
{
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        std::string error;
        try {
            o = fn();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = error.empty() && o.violations == 0 && o.checks > 0;
        if (!pass) ++failed;
        std::printf("%s  [%2d] %-32s %ld/%ld checks ok", pass ? "PASS" : "FAIL", id, name, o.checks - o.violations,
                    o.checks);
        if (o.violations > 0) std::printf(", worst violation %.3e", o.worst);
        if (!error.empty()) std::printf(", error: %s", error.c_str());
        std::printf(" (%s; %.1fs)\n", o.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, "gordan exclusivity", gordan_exclusivity);
    report(2, "perceptron mistake bound", mistake_bound);
    report(3, "np dual certificate", np_dual_certificate);
    std::vector<PositiveRun> positive;
    report(4, "margin maximization", [&] {
        positive = positive_battery();
        return margin_maximization(positive);
    });
    report(5, "meb convergence and sandwich", [&] { return meb_convergence(positive); });
    std::vector<GeneratedInstance> negative;
    report(6, "dual witness distance", [&] {
        negative = negative_battery();
        return dual_witness_distance(negative);
    });
    report(7, "vng linear convergence", [&] { return vng_linear_convergence(negative); });
    report(8, "hoffman bounds", hoffman_bounds);
    report(9, "geometry oracles", geometry_oracles);
    report(10, "lp oracle soundness", lp_soundness);

    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
