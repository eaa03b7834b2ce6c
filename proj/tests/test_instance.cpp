#include <gtest/gtest.h>

#include <random>

#include "margins/instance.hpp"
#include "test_support.hpp"

using namespace margins;
using namespace margins::testing;

TEST(Ingest, NormalizesColumns)
{
    const auto inst = make({{2, 0}, {0, 3}}, true);
    EXPECT_TRUE(inst.normalized());
    EXPECT_TRUE(inst.matrix().isApprox(Matrix::Identity(2, 2)));
}

TEST(Ingest, KeepsRawColumnsWhenAsked)
{
    const auto inst = make({{1, 0}}, false);
    EXPECT_EQ(inst.size(), 1);
    EXPECT_EQ(inst.dim(), 2);
    EXPECT_EQ(inst.rank(), 1);
    EXPECT_FALSE(inst.normalized());
}

TEST(Ingest, RejectsZeroColumnUnderNormalization)
{
    try {
        make({{0, 0}, {1, 0}}, true);
        FAIL() << "expected rejection";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("column 0"), std::string::npos);
    }
    EXPECT_NO_THROW(make({{0, 0}, {1, 0}}, false));
}

TEST(Ingest, RejectsRaggedAndEmptyInput)
{
    EXPECT_THROW(make({{1, 0}, {1, 0, 0}}), InvalidArgument);
    EXPECT_THROW(ingest(std::vector<std::vector<double>>{}, true), InvalidArgument);
    EXPECT_THROW(make({{1.0, std::nan("")}}, false), InvalidArgument);
}

TEST(Gram, Examples)
{
    EXPECT_TRUE(gram(e1e2()).entries().isApprox(Matrix::Identity(2, 2)));
    Matrix expect(2, 2);
    expect << 1, -1, -1, 1;
    EXPECT_TRUE(gram(e1_minus_e1()).entries().isApprox(expect));
    const auto g = gram(make({{1, 0}, {1, 1}}));
    EXPECT_NEAR(g(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(g(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ColumnSpace, Examples)
{
    const auto b1 = column_space_basis(e1_minus_e1());
    EXPECT_EQ(b1.rank, 1);
    EXPECT_NEAR(std::abs(b1.basis(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(b1.basis(1, 0), 0.0, 1e-15);

    EXPECT_EQ(make({{1, 0, 0}, {0, 1, 0}}).rank(), 2);

    const auto near = make({{1, 1}, {1, 1 + 1e-14}});
    EXPECT_EQ(near.rank(), 1);
    // an explicit, much smaller tolerance resolves the second direction
    EXPECT_EQ(column_space_basis(near, 1e-16).rank, 2);
    EXPECT_THROW(column_space_basis(near, 0.0), InvalidArgument);
}

TEST(Combine, Examples)
{
    const Vector mid = combine(e1e2(), SimplexPoint(vec({0.5, 0.5})));
    EXPECT_TRUE(mid.isApprox(vec({0.5, 0.5})));
    const auto tri = triangle();
    for (Index i = 0; i < 3; ++i) EXPECT_TRUE(combine(tri, SimplexPoint::vertex(3, i)).isApprox(tri.matrix().col(i)));
    EXPECT_NEAR(combine(e1_minus_e1(), SimplexPoint::uniform(2)).norm(), 0.0, 1e-16);
    EXPECT_THROW(combine(e1e2(), SimplexPoint::uniform(3)), InvalidArgument);
}

TEST(Project, Examples)
{
    const auto inst = e1_minus_e1();
    EXPECT_NEAR(project_to_column_space(inst, vec({0, 1})).vector.norm(), 0.0, 1e-15);
    const auto p = project_to_column_space(inst, vec({3, 4}));
    EXPECT_TRUE(p.in_column_space);
    EXPECT_NEAR((p.vector - vec({3, 0})).norm(), 0.0, 1e-12);
    const auto q = project_to_column_space(e1e2(), vec({0.3, -2}));
    EXPECT_NEAR((q.vector - vec({0.3, -2})).norm(), 0.0, 1e-12);
}

TEST(SimplexPointType, ClampsAndValidates)
{
    const SimplexPoint p(vec({0.5 + 5e-13, 0.5 - 5e-13, 1e-13 - 1e-13}));
    EXPECT_EQ(p[2], 0.0);
    EXPECT_NEAR(p.weights().sum(), 1.0, 1e-12);
    EXPECT_EQ(p.support(), (std::vector<Index>{0, 1}));
    EXPECT_THROW(SimplexPoint(vec({1.1, -0.1})), InvalidArgument);
    EXPECT_THROW(SimplexPoint(vec({0.5, 0.4})), InvalidArgument);
    const SimplexPoint q(vec({1.0, 1e-13}));
    EXPECT_EQ(q[1], 0.0);
}

// property: ||Ap|| = ||p||_G, projections idempotent and non-expanding,
// Gram PSD with unit diagonal, basis orthonormal and reconstructing
TEST(InstanceProperties, RandomInstances)
{
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> dd(1, 6), nn(1, 12);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 300; ++trial) {
        const Index d = dd(rng), n = nn(rng);
        Matrix a = random_unit_columns(rng, d, n);
        if (trial % 3 == 0 && d > 1) {
            // make it rank-deficient
            a.row(d - 1).setZero();
            for (Index i = 0; i < n; ++i) a.col(i).normalize();
        }
        const auto inst = ingest(a, true);
        const auto& G = inst.gram().entries();
        EXPECT_LE((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((G.diagonal() - Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::LDLT<Matrix> ldlt(G);
        EXPECT_GE(ldlt.vectorD().minCoeff(), -1e-10);

        const auto p = random_simplex_point(rng, n);
        const double lhs = combine(inst, p).norm();
        EXPECT_NEAR(lhs, inst.gram().seminorm(p.weights()), 1e-10 * std::max(1.0, lhs));

        Vector alpha(n);
        for (Index i = 0; i < n; ++i) alpha[i] = g(rng);
        EXPECT_GE(alpha.dot(G * alpha), -1e-10);

        const auto& B = inst.basis();
        EXPECT_LE((B.basis.transpose() * B.basis - Matrix::Identity(B.rank, B.rank)).cwiseAbs().maxCoeff(), 1e-10);
        for (Index i = 0; i < n; ++i) {
            const Vector ai = inst.matrix().col(i);
            EXPECT_LE((B.basis * (B.basis.transpose() * ai) - ai).norm(), 1e-8 * std::max(1.0, ai.norm()));
        }

        Vector w(d);
        for (Index k = 0; k < d; ++k) w[k] = g(rng);
        const Vector pw = project_to_column_space(inst, w).vector;
        EXPECT_LE(pw.norm(), w.norm() + 1e-12);
        EXPECT_LE((project_to_column_space(inst, pw).vector - pw).norm(), 1e-12 * std::max(1.0, w.norm()));
    }
}
