#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "margins/error.hpp"

namespace margins {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative rank cutoff; the absolute cutoff is this times the largest column norm.
inline constexpr double kDefaultRankRelTol = 1e-10;

/// G = A^T A together with the semi-norm it induces on coefficient vectors.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(const Matrix& columns) : entries_(columns.transpose() * columns) {}

    const Matrix& entries() const { return entries_; }
    Index size() const { return entries_.rows(); }
    double operator()(Index i, Index j) const { return entries_(i, j); }

    /// ||alpha||_G = sqrt(alpha^T G alpha), clamped at zero against round-off.
    double seminorm(const Vector& alpha) const
    {
        return std::sqrt(std::max(0.0, alpha.dot(entries_ * alpha)));
    }

private:
    Matrix entries_;
};

/// Orthonormal basis of lin(A) obtained from a column-pivoted QR.
struct ColumnSpaceBasis {
    Matrix basis;  // d x rank, orthonormal columns
    Index rank = 0;
    double tolerance = 0.0;

    /// Coordinates of x in the basis (B^T x).
    Vector coordinates(const Vector& x) const { return basis.transpose() * x; }
};

inline ColumnSpaceBasis column_space_basis(const Matrix& columns, double tol)
{
    if (!(tol > 0.0)) throw InvalidArgument("rank tolerance must be positive");
    const Index d = columns.rows();
    Eigen::ColPivHouseholderQR<Matrix> qr(columns);
    const Matrix& r = qr.matrixQR();
    const Index diag = std::min(r.rows(), r.cols());
    Index rank = 0;
    // pivoting makes |R_ii| non-increasing
    while (rank < diag && std::abs(r(rank, rank)) > tol) ++rank;

    ColumnSpaceBasis out;
    out.rank = rank;
    out.tolerance = tol;
    if (rank > 0) {
        Matrix q = qr.householderQ() * Matrix::Identity(d, rank);
        out.basis = std::move(q);
    } else {
        out.basis = Matrix::Zero(d, 0);
    }
    return out;
}

/// n points a_1..a_n in R^d stored as the columns of a d x n matrix.
///
/// Immutable after construction; the Gram matrix and the column-space basis
/// are computed once in the constructor so instances can be shared freely
/// across threads.
class ProblemInstance {
public:
    ProblemInstance(Matrix columns, std::string name, bool normalized,
                    double rank_rel_tol = kDefaultRankRelTol)
        : columns_(std::move(columns)), name_(std::move(name)), normalized_(normalized),
          rank_rel_tol_(rank_rel_tol)
    {
        if (columns_.rows() < 1 || columns_.cols() < 1)
            throw InvalidArgument("instance needs at least one column of dimension >= 1");
        if (!columns_.allFinite()) throw InvalidArgument("instance has non-finite entries");
        if (!(rank_rel_tol_ > 0.0)) throw InvalidArgument("rank tolerance must be positive");
        if (normalized_) {
            for (Index i = 0; i < columns_.cols(); ++i) {
                if (std::abs(columns_.col(i).norm() - 1.0) > 1e-12)
                    throw InvalidArgument("column " + std::to_string(i) +
                                          " is flagged normalized but is not unit norm");
            }
        }
        gram_ = GramMatrix(columns_);
        basis_ = column_space_basis(columns_, rank_tolerance());
    }

    const Matrix& matrix() const { return columns_; }
    auto column(Index i) const { return columns_.col(i); }
    Index dim() const { return columns_.rows(); }
    Index size() const { return columns_.cols(); }
    const std::string& name() const { return name_; }
    bool normalized() const { return normalized_; }

    const GramMatrix& gram() const { return gram_; }
    const ColumnSpaceBasis& basis() const { return basis_; }
    Index rank() const { return basis_.rank; }

    double rank_rel_tol() const { return rank_rel_tol_; }
    /// Absolute rank cutoff: relative tolerance times the largest column norm.
    double rank_tolerance() const
    {
        const double scale = columns_.colwise().norm().maxCoeff();
        return rank_rel_tol_ * std::max(scale, 1e-300);
    }

    /// True if every column has unit norm within tol, regardless of the flag.
    bool has_unit_columns(double tol = 1e-10) const
    {
        for (Index i = 0; i < size(); ++i)
            if (std::abs(columns_.col(i).norm() - 1.0) > tol) return false;
        return true;
    }

private:
    Matrix columns_;
    std::string name_;
    bool normalized_ = false;
    double rank_rel_tol_ = kDefaultRankRelTol;
    GramMatrix gram_;
    ColumnSpaceBasis basis_;
};

/// Builds an instance from a list of columns, optionally rescaling each to
/// unit norm. Rejects ragged input and, under normalization, zero columns.
inline ProblemInstance ingest(const std::vector<std::vector<double>>& raw_columns, bool normalize,
                              std::string name = {}, double rank_rel_tol = kDefaultRankRelTol)
{
    if (raw_columns.empty()) throw InvalidArgument("instance has no columns");
    const std::size_t d = raw_columns.front().size();
    if (d == 0) throw InvalidArgument("column 0 is empty");
    Matrix a(static_cast<Index>(d), static_cast<Index>(raw_columns.size()));
    for (std::size_t i = 0; i < raw_columns.size(); ++i) {
        if (raw_columns[i].size() != d)
            throw InvalidArgument("column " + std::to_string(i) + " has dimension " +
                                  std::to_string(raw_columns[i].size()) + ", expected " +
                                  std::to_string(d));
        for (std::size_t k = 0; k < d; ++k) a(static_cast<Index>(k), static_cast<Index>(i)) = raw_columns[i][k];
    }
    if (!a.allFinite()) throw InvalidArgument("instance has non-finite entries");
    if (normalize) {
        for (Index i = 0; i < a.cols(); ++i) {
            const double nrm = a.col(i).norm();
            if (nrm == 0.0) throw InvalidArgument("column " + std::to_string(i) + " is zero and cannot be normalized");
            // leave columns that are unit up to rounding alone so saved instances reload bit-for-bit
            if (std::abs(nrm - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) a.col(i) /= nrm;
        }
    }
    return ProblemInstance(std::move(a), std::move(name), normalize, rank_rel_tol);
}

inline ProblemInstance ingest(const Matrix& columns, bool normalize, std::string name = {},
                              double rank_rel_tol = kDefaultRankRelTol)
{
    std::vector<std::vector<double>> raw(static_cast<std::size_t>(columns.cols()));
    for (Index i = 0; i < columns.cols(); ++i)
        raw[static_cast<std::size_t>(i)].assign(columns.col(i).data(), columns.col(i).data() + columns.rows());
    return ingest(raw, normalize, std::move(name), rank_rel_tol);
}

inline GramMatrix gram(const ProblemInstance& instance) { return instance.gram(); }

inline ColumnSpaceBasis column_space_basis(const ProblemInstance& instance, double tol)
{
    return column_space_basis(instance.matrix(), tol);
}

inline ColumnSpaceBasis column_space_basis(const ProblemInstance& instance) { return instance.basis(); }

/// A point of the probability simplex over the n columns.
///
/// Entries within the clamp tolerance of zero are stored as exact zeros so
/// that support sets are deterministic.
class SimplexPoint {
public:
    static constexpr double kTolerance = 1e-12;

    SimplexPoint() = default;

    /// Validating constructor: weights must be >= -1e-12 and sum to 1 within 1e-12.
    explicit SimplexPoint(Vector weights) : weights_(std::move(weights))
    {
        if (weights_.size() == 0) throw InvalidArgument("simplex point needs at least one weight");
        if (!weights_.allFinite()) throw InvalidArgument("simplex point has non-finite weights");
        for (Index i = 0; i < weights_.size(); ++i) {
            if (weights_[i] < -kTolerance)
                throw InvalidArgument("simplex weight " + std::to_string(i) + " is negative");
        }
        if (std::abs(weights_.sum() - 1.0) > kTolerance)
            throw InvalidArgument("simplex weights do not sum to 1");
        clamp_and_renormalize();
    }

    /// Cleans a solver output: entries >= -slack are clamped, then the vector
    /// is rescaled onto the simplex. Throws if it is further off than slack.
    static SimplexPoint from_approximate(Vector raw, double slack = 1e-9)
    {
        if (raw.size() == 0 || !raw.allFinite()) throw InvalidArgument("bad simplex weights");
        for (Index i = 0; i < raw.size(); ++i) {
            if (raw[i] < -slack) throw InvalidArgument("weight " + std::to_string(i) + " is negative");
            if (raw[i] < 0.0) raw[i] = 0.0;
        }
        const double s = raw.sum();
        if (std::abs(s - 1.0) > std::max(slack, 1e-12) * static_cast<double>(raw.size()) || s <= 0.0)
            throw InvalidArgument("weights do not sum to 1");
        SimplexPoint p;
        p.weights_ = raw / s;
        p.clamp_and_renormalize();
        return p;
    }

    static SimplexPoint vertex(Index n, Index i)
    {
        SimplexPoint p;
        p.weights_ = Vector::Zero(n);
        p.weights_[i] = 1.0;
        return p;
    }

    static SimplexPoint uniform(Index n)
    {
        SimplexPoint p;
        p.weights_ = Vector::Constant(n, 1.0 / static_cast<double>(n));
        return p;
    }

    const Vector& weights() const { return weights_; }
    Index size() const { return weights_.size(); }
    double operator[](Index i) const { return weights_[i]; }

    std::vector<Index> support() const
    {
        std::vector<Index> s;
        for (Index i = 0; i < weights_.size(); ++i)
            if (weights_[i] != 0.0) s.push_back(i);
        return s;
    }

private:
    void clamp_and_renormalize()
    {
        for (Index i = 0; i < weights_.size(); ++i)
            if (std::abs(weights_[i]) <= kTolerance) weights_[i] = 0.0;
        weights_ /= weights_.sum();
    }

    Vector weights_;
};

/// A direction w in R^d, tagged with whether it lies in lin(A).
struct PrimalDirection {
    Vector vector;
    bool in_column_space = false;

    double norm() const { return vector.norm(); }
};

/// Returns A p.
inline Vector combine(const ProblemInstance& instance, const SimplexPoint& p)
{
    if (p.size() != instance.size())
        throw InvalidArgument("simplex point has " + std::to_string(p.size()) + " weights, instance has " +
                              std::to_string(instance.size()) + " columns");
    return instance.matrix() * p.weights();
}

/// Orthogonal projection onto lin(A).
inline PrimalDirection project_to_column_space(const ProblemInstance& instance, const Vector& w)
{
    if (w.size() != instance.dim()) throw InvalidArgument("vector dimension does not match instance");
    const Matrix& b = instance.basis().basis;
    return PrimalDirection{b * (b.transpose() * w), true};
}

/// min_i w . a_i together with the lowest index attaining it.
inline std::pair<double, Index> min_dot(const ProblemInstance& instance, const Vector& w)
{
    const Vector dots = instance.matrix().transpose() * w;
    Index arg = 0;
    for (Index i = 1; i < dots.size(); ++i)
        if (dots[i] < dots[arg]) arg = i;
    return {dots[arg], arg};
}

}  // namespace margins
