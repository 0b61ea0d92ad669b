#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Sparse>

#include "iif/types.hpp"

namespace iif::embedding {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Post-selection data with every retained column at mean 0 and variance 1.
struct StandardizedMatrix {
    Matrix values;                         // n x s
    std::vector<std::size_t> feature_ids;  // original column of each retained column
    std::vector<std::size_t> dropped;      // requested columns removed for zero variance
};

/// Standardizes the columns of X listed in `subset` (population divisor).
/// Constant columns are dropped and reported; throws DegenerateError when
/// nothing is left.
StandardizedMatrix column_standardize(const Matrix& x, const FeatureSet& subset);

/// Standardizes every column in place; constant columns become zero and are
/// flagged in `constant`.
Matrix standardize_all(const Matrix& x, std::vector<bool>& constant);

enum class Method { pca, laplacian };

struct Embedding {
    Matrix coords;  // n x d
    Method method = Method::pca;
    int d = 0;
    int padded_columns = 0;            // trailing zero columns added past the rank
    std::vector<double> eigenvalues;   // singular values (pca) or Laplacian eigenvalues
};

struct EmbeddingConfig {
    double gamma = 1.0;
    int n_neighbors = 8;
    double eig_tol = 1e-8;
};

/// Flips each column so that its entry of largest magnitude is positive
/// (first such entry on ties).
void apply_sign_convention(Matrix& vectors);

/// Top-d left singular vectors of W.
Embedding pca_embed(const Matrix& w, int d);

/// exp(-gamma * d_ij^2) with d_ij the cosine distance between rows i and j.
/// Zero rows only connect to themselves.
Matrix cosine_affinity(const Matrix& w, double gamma);

/// Keeps A_ij when j is among the k largest affinities of row i or vice versa.
/// The diagonal is removed and zero weights are not stored.
SparseMatrix knn_sparsify(const Matrix& affinity, int k);

/// Nontrivial low end of the spectrum of I - D^-1/2 A D^-1/2.
struct LaplacianSpectrum {
    Matrix vectors;                  // n x d, orthonormal, orthogonal to D^1/2 1
    std::vector<double> eigenvalues; // ascending
    Eigen::VectorXd degree;          // including self-loops added for isolated nodes
};

/// The d smallest eigenpairs of L_sym after deflating the trivial eigenvector
/// D^1/2 1. Isolated nodes receive a self-loop of weight eig_tol. Throws
/// ConvergenceError if the solver fails or a residual exceeds eig_tol.
LaplacianSpectrum laplacian_spectrum(const SparseMatrix& affinity, int d, double eig_tol);

/// Laplacian eigenmap: D^-1/2 times the spectrum vectors, columns at unit norm.
Embedding laplacian_embed(const SparseMatrix& affinity, int d, double eig_tol);

/// Dispatches to pca_embed or the cosine / kNN / Laplacian chain.
Embedding embed(const StandardizedMatrix& w, Method method, int d, const EmbeddingConfig& cfg);

}  // namespace iif::embedding
