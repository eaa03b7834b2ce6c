#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "margins/error.hpp"
#include "margins/instance.hpp"

namespace margins::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Every tolerance used by the simplex code lives here so callers can tighten them.
struct LpOptions {
    double feasibility = 1e-9;
    double reduced_cost = 1e-9;
    double pivot = 1e-11;
    /// Bland's rule takes over after this many degenerate pivots per (rows + cols).
    int bland_factor = 50;
    Index max_variables = 100;
    Index max_rows = 100;
};

/// min c^T x  s.t.  E x = f,  G x <= h,  lower <= x <= upper.
///
/// Empty matrices are allowed for either constraint block. Bounds default to
/// x >= 0 when left empty.
struct LinearProgram {
    Vector objective;
    Matrix eq_matrix;
    Vector eq_rhs;
    Matrix ineq_matrix;
    Vector ineq_rhs;
    Vector lower;
    Vector upper;

    Index num_variables() const { return objective.size(); }
    Index num_rows() const { return eq_matrix.rows() + ineq_matrix.rows(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s)
{
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    /// Basic columns of the internal standard form at termination.
    std::vector<Index> basis;
    int pivots = 0;
    bool used_bland = false;
};

namespace detail {

// Dense tableau over min c^T z, A z = b (b >= 0), z >= 0, with one
// artificial per row appended after the structural columns.
class Tableau {
public:
    Tableau(const Matrix& a, const Vector& b, const LpOptions& opt)
        : opt_(opt), m_(a.rows()), nstruct_(a.cols())
    {
        t_ = Matrix::Zero(m_ + 1, nstruct_ + m_ + 1);
        t_.topLeftCorner(m_, nstruct_) = a;
        t_.block(0, nstruct_, m_, m_).setIdentity();
        t_.topRightCorner(m_, 1) = b;
        basis_.resize(static_cast<std::size_t>(m_));
        for (Index r = 0; r < m_; ++r) basis_[static_cast<std::size_t>(r)] = nstruct_ + r;
        active_.assign(static_cast<std::size_t>(m_), true);
        degenerate_limit_ = static_cast<long>(opt_.bland_factor) * static_cast<long>(m_ + nstruct_);
    }

    Index rhs_col() const { return nstruct_ + m_; }
    bool is_artificial(Index j) const { return j >= nstruct_ && j < nstruct_ + m_; }

    // Loads a cost vector over all columns and prices out the basis.
    void set_costs(const Vector& cost)
    {
        t_.row(m_).setZero();
        t_.row(m_).head(nstruct_ + m_) = cost.transpose();
        for (Index r = 0; r < m_; ++r) {
            if (!active_[static_cast<std::size_t>(r)]) continue;
            const double cb = cost[basis_[static_cast<std::size_t>(r)]];
            if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
        }
    }

    // Runs simplex iterations; returns false on unboundedness.
    bool optimize(bool allow_artificial)
    {
        for (;;) {
            const Index e = entering(allow_artificial);
            if (e < 0) return true;
            const Index r = leaving(e);
            if (r < 0) return false;
            if (t_(r, rhs_col()) <= opt_.feasibility) ++degenerate_;
            if (degenerate_ > degenerate_limit_) bland_ = true;
            pivot(r, e);
            if (++pivots_ > 100000) throw Error("simplex iteration limit exceeded");
        }
    }

    double objective() const { return -t_(m_, rhs_col()); }

    // After phase 1: pivot artificials out of the basis or drop their rows.
    void expel_artificials()
    {
        for (Index r = 0; r < m_; ++r) {
            if (!active_[static_cast<std::size_t>(r)] || !is_artificial(basis_[static_cast<std::size_t>(r)])) continue;
            Index best = -1;
            double best_abs = opt_.pivot;
            for (Index j = 0; j < nstruct_; ++j) {
                const double v = std::abs(t_(r, j));
                if (v > best_abs) {
                    best_abs = v;
                    best = j;
                }
            }
            if (best >= 0)
                pivot(r, best);
            else
                active_[static_cast<std::size_t>(r)] = false;  // redundant row
        }
    }

    Vector structural_solution() const
    {
        Vector z = Vector::Zero(nstruct_);
        for (Index r = 0; r < m_; ++r) {
            if (!active_[static_cast<std::size_t>(r)]) continue;
            const Index j = basis_[static_cast<std::size_t>(r)];
            if (j < nstruct_) z[j] = std::max(0.0, t_(r, rhs_col()));
        }
        return z;
    }

    std::vector<Index> basis() const
    {
        std::vector<Index> out;
        for (Index r = 0; r < m_; ++r)
            if (active_[static_cast<std::size_t>(r)]) out.push_back(basis_[static_cast<std::size_t>(r)]);
        return out;
    }

    int pivots() const { return pivots_; }
    bool used_bland() const { return bland_; }

private:
    Index entering(bool allow_artificial) const
    {
        Index best = -1;
        double best_val = -opt_.reduced_cost;
        for (Index j = 0; j < nstruct_ + m_; ++j) {
            if (!allow_artificial && is_artificial(j)) continue;
            const double rc = t_(m_, j);
            if (bland_) {
                if (rc < -opt_.reduced_cost) return j;
            } else if (rc < best_val) {
                best_val = rc;
                best = j;
            }
        }
        return best;
    }

    Index leaving(Index e) const
    {
        Index best = -1;
        double best_ratio = kInf;
        for (Index r = 0; r < m_; ++r) {
            if (!active_[static_cast<std::size_t>(r)]) continue;
            const double a = t_(r, e);
            if (a <= opt_.pivot) continue;
            const double ratio = std::max(0.0, t_(r, rhs_col())) / a;
            if (best < 0 || ratio < best_ratio - 1e-14) {
                best = r;
                best_ratio = ratio;
            } else if (ratio <= best_ratio + 1e-14) {
                // ties: Bland picks the lowest basic index, otherwise the larger pivot
                const auto br = static_cast<std::size_t>(best);
                const auto rr = static_cast<std::size_t>(r);
                if (bland_ ? basis_[rr] < basis_[br] : a > t_(best, e)) {
                    best = r;
                    best_ratio = std::min(best_ratio, ratio);
                }
            }
        }
        return best;
    }

    void pivot(Index r, Index e)
    {
        t_.row(r) /= t_(r, e);
        for (Index k = 0; k <= m_; ++k) {
            if (k == r) continue;
            if (k < m_ && !active_[static_cast<std::size_t>(k)]) continue;
            const double f = t_(k, e);
            if (f != 0.0) t_.row(k) -= f * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = e;
    }

    LpOptions opt_;
    Index m_;
    Index nstruct_;
    Matrix t_;
    std::vector<Index> basis_;
    std::vector<bool> active_;
    long degenerate_ = 0;
    long degenerate_limit_ = 0;
    bool bland_ = false;
    int pivots_ = 0;
};

}  // namespace detail

/// Two-phase dense tableau simplex.
inline LpSolution solve(const LinearProgram& lp, const LpOptions& opt = {})
{
    const Index n = lp.num_variables();
    const Index me = lp.eq_matrix.rows();
    const Index mi = lp.ineq_matrix.rows();
    if (n > opt.max_variables || lp.num_rows() > opt.max_rows)
        throw BudgetExceeded("linear program exceeds the dense solver budget (" + std::to_string(n) + " variables, " +
                             std::to_string(lp.num_rows()) + " rows)");
    if (!lp.objective.allFinite()) throw InvalidArgument("objective has non-finite entries");
    if (me > 0 && (lp.eq_matrix.cols() != n || lp.eq_rhs.size() != me))
        throw InvalidArgument("equality block has inconsistent dimensions");
    if (mi > 0 && (lp.ineq_matrix.cols() != n || lp.ineq_rhs.size() != mi))
        throw InvalidArgument("inequality block has inconsistent dimensions");

    const Vector lower = lp.lower.size() == n ? lp.lower : Vector::Zero(n);
    const Vector upper = lp.upper.size() == n ? lp.upper : Vector::Constant(n, kInf);

    // x = offset + map * y with y >= 0
    std::vector<Index> col_of(static_cast<std::size_t>(n));
    Index ny = 0;
    for (Index j = 0; j < n; ++j) {
        if (lower[j] > upper[j]) {
            LpSolution s;
            s.status = LpStatus::infeasible;
            return s;
        }
        col_of[static_cast<std::size_t>(j)] = ny;
        ny += (std::isinf(lower[j]) && std::isinf(upper[j])) ? 2 : 1;
    }
    Matrix map = Matrix::Zero(n, ny);
    Vector offset = Vector::Zero(n);
    std::vector<std::pair<Index, double>> bound_rows;  // y_k <= width
    for (Index j = 0; j < n; ++j) {
        const Index k = col_of[static_cast<std::size_t>(j)];
        if (std::isfinite(lower[j])) {
            offset[j] = lower[j];
            map(j, k) = 1.0;
            if (std::isfinite(upper[j])) bound_rows.emplace_back(k, upper[j] - lower[j]);
        } else if (std::isfinite(upper[j])) {
            offset[j] = upper[j];
            map(j, k) = -1.0;
        } else {
            map(j, k) = 1.0;
            map(j, k + 1) = -1.0;
        }
    }

    const Index mb = static_cast<Index>(bound_rows.size());
    const Index nslack = mi + mb;
    const Index m = me + mi + mb;
    const Index nz = ny + nslack;
    Matrix a = Matrix::Zero(m, nz);
    Vector b = Vector::Zero(m);
    if (me > 0) {
        a.block(0, 0, me, ny) = lp.eq_matrix * map;
        b.head(me) = lp.eq_rhs - lp.eq_matrix * offset;
    }
    if (mi > 0) {
        a.block(me, 0, mi, ny) = lp.ineq_matrix * map;
        a.block(me, ny, mi, mi).setIdentity();
        b.segment(me, mi) = lp.ineq_rhs - lp.ineq_matrix * offset;
    }
    for (Index r = 0; r < mb; ++r) {
        a(me + mi + r, bound_rows[static_cast<std::size_t>(r)].first) = 1.0;
        a(me + mi + r, ny + mi + r) = 1.0;
        b[me + mi + r] = bound_rows[static_cast<std::size_t>(r)].second;
    }
    for (Index r = 0; r < m; ++r) {
        if (b[r] < 0.0) {
            a.row(r) *= -1.0;
            b[r] = -b[r];
        }
    }
    Vector cost = Vector::Zero(nz);
    cost.head(ny) = map.transpose() * lp.objective;

    LpSolution sol;
    detail::Tableau tab(a, b, opt);

    Vector phase1 = Vector::Zero(nz + m);
    phase1.tail(m).setOnes();
    tab.set_costs(phase1);
    tab.optimize(true);
    const double bscale = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
    if (tab.objective() > opt.feasibility * bscale) {
        sol.status = LpStatus::infeasible;
        sol.pivots = tab.pivots();
        return sol;
    }
    tab.expel_artificials();

    Vector phase2 = Vector::Zero(nz + m);
    phase2.head(nz) = cost;
    tab.set_costs(phase2);
    const bool bounded = tab.optimize(false);
    sol.pivots = tab.pivots();
    sol.used_bland = tab.used_bland();
    sol.basis = tab.basis();
    if (!bounded) {
        sol.status = LpStatus::unbounded;
        sol.objective_value = -kInf;
        return sol;
    }
    const Vector z = tab.structural_solution();
    sol.x = offset + map * z.head(ny);
    sol.objective_value = lp.objective.dot(sol.x);
    sol.status = LpStatus::optimal;
    return sol;
}

/// A system E x = f.
struct EqualitySystem {
    Matrix matrix;
    Vector rhs;
};

struct L1Projection {
    LpStatus status = LpStatus::infeasible;
    double distance = std::numeric_limits<double>::quiet_NaN();
    Vector point;
};

/// Nearest point in l1 to x0 over {x | E x = f, x >= 0 if nonneg}.
inline L1Projection dist_l1_to_polyhedron(const Vector& x0, const EqualitySystem& sys, bool nonneg,
                                          const LpOptions& opt = {})
{
    const Index n = x0.size();
    if (sys.matrix.cols() != n || sys.matrix.rows() != sys.rhs.size())
        throw InvalidArgument("equality system does not match the point dimension");
    // variables (x, t): minimize sum t with |x - x0| <= t
    LinearProgram lp;
    lp.objective = Vector::Zero(2 * n);
    lp.objective.tail(n).setOnes();
    lp.eq_matrix = Matrix::Zero(sys.matrix.rows(), 2 * n);
    lp.eq_matrix.leftCols(n) = sys.matrix;
    lp.eq_rhs = sys.rhs;
    lp.ineq_matrix = Matrix::Zero(2 * n, 2 * n);
    lp.ineq_rhs = Vector::Zero(2 * n);
    for (Index i = 0; i < n; ++i) {
        lp.ineq_matrix(i, i) = 1.0;
        lp.ineq_matrix(i, n + i) = -1.0;
        lp.ineq_rhs[i] = x0[i];
        lp.ineq_matrix(n + i, i) = -1.0;
        lp.ineq_matrix(n + i, n + i) = -1.0;
        lp.ineq_rhs[n + i] = -x0[i];
    }
    lp.lower = Vector::Zero(2 * n);
    if (!nonneg) lp.lower.head(n).setConstant(-kInf);
    lp.upper = Vector::Constant(2 * n, kInf);

    const LpSolution s = solve(lp, opt);
    L1Projection out;
    out.status = s.status;
    if (s.status == LpStatus::optimal) {
        out.point = s.x.head(n);
        if (nonneg) out.point = out.point.cwiseMax(0.0);
        out.distance = (out.point - x0).lpNorm<1>();
    }
    return out;
}

/// Finds some x >= 0 (or free) with E x = f, or nothing if the set is empty.
inline std::optional<Vector> find_feasible_point(const EqualitySystem& sys, bool nonneg, const LpOptions& opt = {})
{
    const Index n = sys.matrix.cols();
    LinearProgram lp;
    lp.objective = Vector::Zero(n);
    lp.eq_matrix = sys.matrix;
    lp.eq_rhs = sys.rhs;
    lp.lower = nonneg ? Vector::Zero(n) : Vector::Constant(n, -kInf);
    lp.upper = Vector::Constant(n, kInf);
    const LpSolution s = solve(lp, opt);
    if (s.status != LpStatus::optimal) return std::nullopt;
    return nonneg ? Vector(s.x.cwiseMax(0.0)) : s.x;
}

struct FaceSolution {
    double norm = 0.0;
    Vector weights;  // sums to one, may have negative entries
};

/// min ||A_S q|| subject to sum(q) = 1, via the bordered Gram system.
/// Returns nothing when the columns are affinely dependent.
inline std::optional<FaceSolution> min_norm_on_face(const Matrix& face_columns)
{
    const Index k = face_columns.cols();
    if (k == 0) return std::nullopt;
    Matrix bordered = Matrix::Zero(k + 1, k + 1);
    bordered.topLeftCorner(k, k) = face_columns.transpose() * face_columns;
    bordered.block(0, k, k, 1).setOnes();
    bordered.block(k, 0, 1, k).setOnes();
    Vector rhs = Vector::Zero(k + 1);
    rhs[k] = 1.0;
    Eigen::FullPivLU<Matrix> lu(bordered);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) return std::nullopt;
    const Vector sol = lu.solve(rhs);
    FaceSolution out;
    out.weights = sol.head(k);
    if (!out.weights.allFinite()) return std::nullopt;
    if ((bordered * sol - rhs).norm() > 1e-8) return std::nullopt;
    out.norm = (face_columns * out.weights).norm();
    return out;
}

struct L2Projection {
    LpStatus status = LpStatus::infeasible;
    double distance = std::numeric_limits<double>::quiet_NaN();
    Vector point;        // nearest point of S
    Vector multipliers;  // p >= 0 with ||A p|| <= 1 and p^T r = distance
    double dual_value = std::numeric_limits<double>::quiet_NaN();
};

/// Euclidean distance from w to S = {y | A^T y >= c} by exhaustive active-set
/// enumeration of the projection QP. The multipliers returned are a dual
/// certificate: any p >= 0 with ||A p|| <= 1 gives p^T (c - A^T w) <= dist.
inline L2Projection dist_l2_to_halfspaces(const Matrix& a, const Vector& c, const Vector& w,
                                          Index max_constraints = 16, double tol = 1e-9)
{
    const Index n = a.cols();
    if (c.size() != n || w.size() != a.rows()) throw InvalidArgument("halfspace system dimensions do not match");
    if (n > max_constraints)
        throw BudgetExceeded("active-set enumeration limited to " + std::to_string(max_constraints) + " constraints");
    const Vector r = c - a.transpose() * w;  // need A^T z >= r for z = y - w
    L2Projection best;
    const Index maxk = std::min(n, a.rows());
    const double scale = 1.0 + r.cwiseAbs().maxCoeff();

    std::vector<Index> subset;
    auto consider = [&](const std::vector<Index>& s) {
        const Index k = static_cast<Index>(s.size());
        Vector z = Vector::Zero(a.rows());
        Vector lam = Vector::Zero(n);
        if (k > 0) {
            Matrix as(a.rows(), k);
            Vector rs(k);
            for (Index i = 0; i < k; ++i) {
                as.col(i) = a.col(s[static_cast<std::size_t>(i)]);
                rs[i] = r[s[static_cast<std::size_t>(i)]];
            }
            Eigen::FullPivLU<Matrix> lu(as.transpose() * as);
            lu.setThreshold(1e-10);
            if (!lu.isInvertible()) return;
            const Vector ls = lu.solve(rs);
            z = as * ls;
            for (Index i = 0; i < k; ++i) lam[s[static_cast<std::size_t>(i)]] = ls[i];
        }
        if ((a.transpose() * z - r).minCoeff() < -tol * scale) return;
        const double dist = z.norm();
        if (best.status != LpStatus::optimal || dist < best.distance) {
            best.status = LpStatus::optimal;
            best.distance = dist;
            best.point = w + z;
            best.multipliers = lam;
        }
    };
    // enumerate subsets of size 0..maxk in lexicographic order
    for (Index k = 0; k <= maxk; ++k) {
        subset.resize(static_cast<std::size_t>(k));
        for (Index i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
        for (;;) {
            consider(subset);
            Index i = k - 1;
            while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - k + i) --i;
            if (i < 0) break;
            ++subset[static_cast<std::size_t>(i)];
            for (Index j = i + 1; j < k; ++j)
                subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    if (best.status == LpStatus::optimal) {
        if (best.distance > 0.0) {
            Vector p = best.multipliers.cwiseMax(0.0) / best.distance;
            best.dual_value = p.dot(r);
            best.multipliers = p;
        } else {
            best.multipliers = Vector::Zero(n);
            best.dual_value = 0.0;
        }
    }
    return best;
}

/// Inner LP of the duality chain for the projection QP: for a unit
/// direction mu, sup { p^T r | A p = mu, p >= 0 } equals min { mu^T z | A^T z >= r }.
inline LpSolution projection_dual_lp(const Matrix& a, const Vector& r, const Vector& mu, const LpOptions& opt = {})
{
    LinearProgram lp;
    lp.objective = -r;
    lp.eq_matrix = a;
    lp.eq_rhs = mu;
    lp.lower = Vector::Zero(a.cols());
    lp.upper = Vector::Constant(a.cols(), kInf);
    LpSolution s = solve(lp, opt);
    if (s.status == LpStatus::optimal) s.objective_value = -s.objective_value;
    return s;
}

}  // namespace margins::lp
