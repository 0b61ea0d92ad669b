#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "iif/embedding.hpp"
#include "iif/error.hpp"
#include "iif/rng.hpp"

using namespace iif::embedding;
using iif::Matrix;

namespace {

iif::FeatureSet all_columns(Eigen::Index p) {
    iif::FeatureSet f;
    f.indices.resize(static_cast<std::size_t>(p));
    std::iota(f.indices.begin(), f.indices.end(), std::size_t{0});
    return f;
}

Matrix random_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    iif::Rng rng(seed);
    Matrix m(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.normal();
    }
    return m;
}

// Largest principal-angle sine between the column spans of a and b.
double subspace_distance(const Matrix& a, const Matrix& b) {
    const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(a.rows(), a.cols());
    const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() * Matrix::Identity(b.rows(), b.cols());
    const Matrix residual = qa - qb * (qb.transpose() * qa);
    return Eigen::JacobiSVD<Matrix>(residual).singularValues()(0);
}

SparseMatrix from_dense(const Matrix& a) {
    SparseMatrix s = a.sparseView();
    s.makeCompressed();
    return s;
}

}  // namespace

TEST(ColumnStandardize, HandExample) {
    Matrix x(3, 1);
    x << 1, 2, 3;
    const auto w = column_standardize(x, all_columns(1));
    EXPECT_NEAR(w.values(0, 0), -std::sqrt(1.5), 1e-15);
    EXPECT_NEAR(w.values(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(w.values(2, 0), std::sqrt(1.5), 1e-15);
}

TEST(ColumnStandardize, Idempotent) {
    const Matrix x = random_matrix(40, 6, 3);
    const auto once = column_standardize(x, all_columns(6));
    const auto twice = column_standardize(once.values, all_columns(6));
    EXPECT_LE((once.values - twice.values).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index j = 0; j < 6; ++j) {
        EXPECT_NEAR(once.values.col(j).mean(), 0.0, 1e-9);
        EXPECT_NEAR(once.values.col(j).squaredNorm() / 40.0, 1.0, 1e-6);
    }
}

TEST(ColumnStandardize, ConstantColumnDropped) {
    Matrix x = random_matrix(10, 3, 4);
    x.col(1).setConstant(2.5);
    const auto w = column_standardize(x, all_columns(3));
    EXPECT_EQ(w.feature_ids, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(w.dropped, (std::vector<std::size_t>{1}));
    EXPECT_EQ(w.values.cols(), 2);

    Matrix flat = Matrix::Constant(5, 2, 1.0);
    EXPECT_THROW(column_standardize(flat, all_columns(2)), iif::DegenerateError);

    iif::FeatureSet bad;
    bad.indices = {7};
    EXPECT_THROW(column_standardize(x, bad), iif::DomainError);
}

TEST(Pca, RankOneRecoversLeftVector) {
    Eigen::VectorXd a(4), b(3);
    a << 0.1, -0.7, 0.5, 0.5;
    b << 0.6, 0.0, -0.8;
    a.normalize();
    const Matrix w = 3.0 * a * b.transpose();
    const auto e = pca_embed(w, 1);
    // The largest-magnitude entry of a is negative, so the convention flips it.
    EXPECT_LE((e.coords.col(0) + a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(e.eigenvalues[0], 3.0, 1e-12);
}

TEST(Pca, OrthonormalColumnsAndSignConvention) {
    const Matrix w = random_matrix(50, 20, 5);
    const auto e = pca_embed(w, 4);
    EXPECT_LE((e.coords.transpose() * e.coords - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index c = 0; c < 4; ++c) {
        Eigen::Index arg = 0;
        e.coords.col(c).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(e.coords(arg, c), 0.0);
    }
    EXPECT_EQ(e.padded_columns, 0);
}

TEST(Pca, RetainedSubspaceReconstructs) {
    const Matrix w = random_matrix(30, 10, 6);
    const auto e = pca_embed(w, 3);
    Eigen::JacobiSVD<Matrix> oracle(w, Eigen::ComputeThinU);
    EXPECT_LE(subspace_distance(e.coords, oracle.matrixU().leftCols(3)), 1e-8);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(e.eigenvalues[c], oracle.singularValues()(c), 1e-10);
}

TEST(Pca, SeparatesDuplicatedRows) {
    Matrix x(4, 3);
    x << 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0;
    const auto w = column_standardize(x, all_columns(3));
    EXPECT_EQ(w.values.cols(), 2);
    const auto e = pca_embed(w.values, 2);
    EXPECT_LE((e.coords.row(0) - e.coords.row(1)).norm(), 1e-12);
    EXPECT_LE((e.coords.row(2) - e.coords.row(3)).norm(), 1e-12);
    EXPECT_GT((e.coords.row(0) - e.coords.row(2)).norm(), 0.1);
}

TEST(Pca, PadsPastRank) {
    Matrix w(4, 2);
    w << 1, 2, 2, 4, -1, -2, 0, 0;
    const auto e = pca_embed(w, 3);
    EXPECT_EQ(e.coords.cols(), 3);
    EXPECT_EQ(e.padded_columns, 2);
    EXPECT_EQ(e.coords.rightCols(2).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(pca_embed(w, 0), iif::DomainError);
}

TEST(CosineAffinity, ClosedForms) {
    Matrix w(4, 2);
    w << 1, 0, 2, 0, -1, 0, 0, 3;
    const Matrix a = cosine_affinity(w, 1.0);
    EXPECT_DOUBLE_EQ(a(0, 1), 1.0);
    EXPECT_NEAR(a(0, 2), std::exp(-4.0), 1e-15);
    EXPECT_NEAR(a(0, 3), 0.36787944117144233, 1e-15);
    EXPECT_NEAR(cosine_affinity(w, 0.5)(0, 2), std::exp(-2.0), 1e-15);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a(i, i), 1.0);
    EXPECT_TRUE(a == a.transpose());
    EXPECT_THROW(cosine_affinity(w, 0.0), iif::DomainError);
}

TEST(CosineAffinity, ZeroRowConnectsOnlyToItself) {
    Matrix w(3, 2);
    w << 1, 1, 0, 0, 1, -1;
    const Matrix a = cosine_affinity(w, 1.0);
    EXPECT_EQ(a(1, 1), 1.0);
    EXPECT_EQ(a(1, 0), 0.0);
    EXPECT_EQ(a(2, 1), 0.0);
}

TEST(KnnSparsify, FullyConnectedWhenKIsNMinusOne) {
    const Matrix a = cosine_affinity(random_matrix(6, 4, 7), 1.0);
    const Matrix s = Matrix(knn_sparsify(a, 5));
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) EXPECT_EQ(s(i, j), i == j ? 0.0 : a(i, j));
    }
}

TEST(KnnSparsify, BlockPattern) {
    // Rows 0-4 point along e1, rows 5-9 along e2, with small jitter.
    iif::Rng rng(8);
    Matrix w(10, 2);
    for (int i = 0; i < 10; ++i) {
        w(i, 0) = (i < 5 ? 1.0 : 0.0) + 0.01 * rng.normal();
        w(i, 1) = (i < 5 ? 0.0 : 1.0) + 0.01 * rng.normal();
    }
    const Matrix s = Matrix(knn_sparsify(cosine_affinity(w, 1.0), 3));
    for (int i = 0; i < 10; ++i) {
        int within = 0;
        for (int j = 0; j < 10; ++j) {
            if ((i < 5) != (j < 5)) {
                EXPECT_EQ(s(i, j), 0.0);
            }
            within += s(i, j) > 0.0;
        }
        EXPECT_GE(within, 3);
    }
}

TEST(KnnSparsify, ExactlySymmetric) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = cosine_affinity(random_matrix(25, 5, 100 + seed), 1.0);
        const Matrix s = Matrix(knn_sparsify(a, 4));
        EXPECT_TRUE(s == s.transpose());
        EXPECT_EQ(s.diagonal().cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(s.minCoeff(), 0.0);
    }
    EXPECT_THROW(knn_sparsify(Matrix::Identity(3, 3), 3), iif::DomainError);
}

TEST(Laplacian, TwoDisconnectedCliques) {
    Matrix a = Matrix::Zero(8, 8);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            if (i != j && (i < 4) == (j < 4)) a(i, j) = 1.0;
        }
    }
    const auto e = laplacian_embed(from_dense(a), 1, 1e-8);
    EXPECT_NEAR(e.eigenvalues[0], 0.0, 1e-10);
    for (int i = 1; i < 4; ++i) {
        EXPECT_NEAR(e.coords(i, 0), e.coords(0, 0), 1e-10);
        EXPECT_NEAR(e.coords(4 + i, 0), e.coords(4, 0), 1e-10);
    }
    EXPECT_GT(std::fabs(e.coords(0, 0) - e.coords(4, 0)), 0.1);
}

TEST(Laplacian, ThreeNodePath) {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = 1.0;
    const auto spec = laplacian_spectrum(from_dense(a), 2, 1e-8);
    EXPECT_NEAR(spec.eigenvalues[0], 1.0, 1e-12);
    EXPECT_NEAR(spec.eigenvalues[1], 2.0, 1e-12);

    // Dense oracle: eigenvalues of I - D^-1/2 A D^-1/2 with D = diag(1, 2, 1).
    Matrix lap = Matrix::Identity(3, 3);
    const double h = 1.0 / std::sqrt(2.0);
    lap(0, 1) = lap(1, 0) = lap(1, 2) = lap(2, 1) = -h;
    Eigen::SelfAdjointEigenSolver<Matrix> oracle(lap);
    EXPECT_NEAR(oracle.eigenvalues()(0), 0.0, 1e-12);
    EXPECT_NEAR(oracle.eigenvalues()(1), 1.0, 1e-12);
    EXPECT_NEAR(oracle.eigenvalues()(2), 2.0, 1e-12);

    // The two end entries tie up to rounding, so only the sign-free form is fixed.
    const auto e = laplacian_embed(from_dense(a), 1, 1e-8);
    const double sign = e.coords(0, 0) > 0.0 ? 1.0 : -1.0;
    EXPECT_NEAR(sign * e.coords(0, 0), h, 1e-12);
    EXPECT_NEAR(e.coords(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(sign * e.coords(2, 0), -h, 1e-12);
}

TEST(Laplacian, CompleteGraphResiduals) {
    const int n = 12;
    Matrix a = Matrix::Ones(n, n) - Matrix::Identity(n, n);
    const auto spec = laplacian_spectrum(from_dense(a), 4, 1e-8);
    Matrix lap = Matrix::Identity(n, n) - a / (n - 1.0);
    for (int c = 0; c < 4; ++c) {
        EXPECT_NEAR(spec.eigenvalues[c], n / (n - 1.0), 1e-12);
        const Eigen::VectorXd v = spec.vectors.col(c);
        EXPECT_LE((lap * v - spec.eigenvalues[c] * v).norm(), 1e-8);
        EXPECT_NEAR(v.sum(), 0.0, 1e-10);
    }
}

TEST(Laplacian, IsolatedNodeGetsSelfLoop) {
    Matrix a = Matrix::Zero(4, 4);
    a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = 1.0;
    const auto spec = laplacian_spectrum(from_dense(a), 2, 1e-8);
    EXPECT_DOUBLE_EQ(spec.degree(3), 1e-8);
}

TEST(Laplacian, MatchesDenseEigendecomposition) {
    iif::Rng rng(77);
    int checked = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const auto n = static_cast<Eigen::Index>(8 + rng.below(23));
        const int k = 2 + static_cast<int>(rng.below(5));
        const int d = 1 + static_cast<int>(rng.below(4));
        const Matrix w = random_matrix(n, 3 + static_cast<Eigen::Index>(rng.below(6)), rng.next_u64());
        const SparseMatrix graph = knn_sparsify(cosine_affinity(w, 1.0), std::min<int>(k, static_cast<int>(n) - 1));

        // Independent dense construction of L_sym and its full spectrum.
        const Matrix a = Matrix(graph);
        const Eigen::VectorXd deg = a.rowwise().sum();
        const Eigen::VectorXd inv_sqrt = deg.array().rsqrt();
        const Matrix lap = Matrix::Identity(n, n) - inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> oracle(lap);
        const Eigen::VectorXd& lambda = oracle.eigenvalues();
        // Skip disconnected graphs and instances whose subspace boundary is degenerate.
        if (lambda(1) < 1e-6 || lambda(d + 1) - lambda(d) < 1e-3) continue;
        ++checked;

        const auto spec = laplacian_spectrum(graph, d, 1e-8);
        const Matrix expected = oracle.eigenvectors().middleCols(1, d);
        EXPECT_LE(subspace_distance(spec.vectors, expected), 1e-6) << "rep " << rep;
        for (int c = 0; c < d; ++c) EXPECT_NEAR(spec.eigenvalues[c], lambda(c + 1), 1e-10);

        const auto e = laplacian_embed(graph, d, 1e-8);
        EXPECT_LE(subspace_distance(e.coords, inv_sqrt.asDiagonal() * expected), 1e-6) << "rep " << rep;
        for (int c = 0; c < d; ++c) EXPECT_NEAR(e.coords.col(c).norm(), 1.0, 1e-12);
    }
    EXPECT_GE(checked, 30);
}

TEST(Laplacian, Deterministic) {
    const Matrix w = random_matrix(60, 8, 9);
    StandardizedMatrix s;
    s.values = w;
    const EmbeddingConfig cfg;
    const auto a = embed(s, Method::laplacian, 4, cfg);
    const auto b = embed(s, Method::laplacian, 4, cfg);
    EXPECT_TRUE(a.coords == b.coords);
    const auto c = embed(s, Method::pca, 4, cfg);
    const auto d = embed(s, Method::pca, 4, cfg);
    EXPECT_TRUE(c.coords == d.coords);
}

TEST(Laplacian, RejectsBadArguments) {
    const SparseMatrix g = from_dense(Matrix::Ones(3, 3) - Matrix::Identity(3, 3));
    EXPECT_THROW(laplacian_spectrum(g, 3, 1e-8), iif::DomainError);
    EXPECT_THROW(laplacian_spectrum(g, 0, 1e-8), iif::DomainError);
    EXPECT_THROW(laplacian_spectrum(g, 1, 0.0), iif::DomainError);
}
