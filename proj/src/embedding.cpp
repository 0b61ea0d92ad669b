#include "iif/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "iif/error.hpp"

namespace iif::embedding {

namespace {

// Mean and population standard deviation of column j.
std::pair<double, double> column_moments(const Matrix& x, Eigen::Index j) {
    const double n = static_cast<double>(x.rows());
    const double mean = x.col(j).sum() / n;
    const double ss = (x.col(j).array() - mean).square().sum();
    return {mean, std::sqrt(ss / n)};
}

Embedding padded(Matrix coords, int d, Method method, int valid, std::vector<double> values) {
    Embedding e;
    e.method = method;
    e.d = d;
    e.padded_columns = d - valid;
    e.coords = Matrix::Zero(coords.rows(), d);
    e.coords.leftCols(valid) = coords.leftCols(valid);
    e.eigenvalues = std::move(values);
    return e;
}

}  // namespace

StandardizedMatrix column_standardize(const Matrix& x, const FeatureSet& subset) {
    StandardizedMatrix out;
    std::vector<std::size_t> keep;
    keep.reserve(subset.size());
    for (std::size_t j : subset.indices) {
        if (j >= static_cast<std::size_t>(x.cols())) {
            throw DomainError("column_standardize: feature index " + std::to_string(j) + " out of range");
        }
        const auto [mean, sd] = column_moments(x, static_cast<Eigen::Index>(j));
        if (sd > 0.0) {
            keep.push_back(j);
        } else {
            out.dropped.push_back(j);
        }
    }
    if (keep.empty()) throw DegenerateError("column_standardize: no non-constant columns in subset");
    out.values.resize(x.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const auto j = static_cast<Eigen::Index>(keep[c]);
        const auto [mean, sd] = column_moments(x, j);
        out.values.col(static_cast<Eigen::Index>(c)) = (x.col(j).array() - mean) / sd;
    }
    out.feature_ids = std::move(keep);
    return out;
}

Matrix standardize_all(const Matrix& x, std::vector<bool>& constant) {
    Matrix w(x.rows(), x.cols());
    constant.assign(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto [mean, sd] = column_moments(x, j);
        if (sd > 0.0) {
            w.col(j) = (x.col(j).array() - mean) / sd;
        } else {
            w.col(j).setZero();
            constant[static_cast<std::size_t>(j)] = true;
        }
    }
    return w;
}

void apply_sign_convention(Matrix& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double m = std::fabs(vectors(r, c));
            if (m > best) {
                best = m;
                arg = r;
            }
        }
        if (vectors.rows() > 0 && vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
    }
}

Embedding pca_embed(const Matrix& w, int d) {
    if (d < 1) throw DomainError("pca_embed: dimension must be positive");
    if (w.rows() < 1 || w.cols() < 1) throw DomainError("pca_embed: empty matrix");
    Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = static_cast<double>(std::max(w.rows(), w.cols())) *
                       std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    const int valid = std::min(d, rank);
    Matrix u = svd.matrixU().leftCols(valid);
    apply_sign_convention(u);
    std::vector<double> values(sv.data(), sv.data() + valid);
    return padded(std::move(u), d, Method::pca, valid, std::move(values));
}

Matrix cosine_affinity(const Matrix& w, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("cosine_affinity: gamma must be positive");
    const Eigen::Index n = w.rows();
    const Eigen::VectorXd norms = w.rowwise().norm();
    const Matrix gram = w * w.transpose();
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        if (norms(i) == 0.0) continue;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (norms(j) == 0.0) continue;
            const double cosine = std::clamp(gram(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
            const double dist = 1.0 - cosine;
            const double v = std::exp(-gamma * dist * dist);
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

SparseMatrix knn_sparsify(const Matrix& affinity, int k) {
    const Eigen::Index n = affinity.rows();
    if (affinity.cols() != n) throw DomainError("knn_sparsify: affinity must be square");
    if (k < 1 || k >= n) throw DomainError("knn_sparsify: need 1 <= k < n");
    std::vector<std::vector<bool>> keep(static_cast<std::size_t>(n),
                                        std::vector<bool>(static_cast<std::size_t>(n), false));
    std::vector<Eigen::Index> others(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t pos = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) others[pos++] = j;
        }
        std::partial_sort(others.begin(), others.begin() + k, others.end(),
                          [&](Eigen::Index a, Eigen::Index b) {
                              if (affinity(i, a) != affinity(i, b)) return affinity(i, a) > affinity(i, b);
                              return a < b;
                          });
        for (int t = 0; t < k; ++t) {
            const auto j = static_cast<std::size_t>(others[static_cast<std::size_t>(t)]);
            keep[static_cast<std::size_t>(i)][j] = true;
            keep[j][static_cast<std::size_t>(i)] = true;
        }
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || !keep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
            // The union is symmetric; read the upper triangle so both halves agree bitwise.
            const double v = i < j ? affinity(i, j) : affinity(j, i);
            if (v > 0.0) triplets.emplace_back(i, j, v);
        }
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

LaplacianSpectrum laplacian_spectrum(const SparseMatrix& affinity, int d, double eig_tol) {
    const Eigen::Index n = affinity.rows();
    if (affinity.cols() != n) throw DomainError("laplacian_spectrum: affinity must be square");
    if (d < 1) throw DomainError("laplacian_spectrum: dimension must be positive");
    if (d > n - 1) throw DomainError("laplacian_spectrum: need d <= n - 1");
    if (!(eig_tol > 0.0)) throw DomainError("laplacian_spectrum: eig_tol must be positive");

    Matrix a = Matrix(affinity);
    Eigen::VectorXd degree = a.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (degree(i) <= 0.0) {
            a(i, i) = eig_tol;
            degree(i) = eig_tol;
        }
    }
    const Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
    Matrix lap = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
    lap.diagonal().array() += 1.0;
    lap = 0.5 * (lap + lap.transpose()).eval();

    // D^1/2 1 is an exact null vector; lifting it above the spectrum (which
    // lies in [0, 2]) leaves the nontrivial eigenvectors at the bottom.
    Eigen::VectorXd trivial = degree.array().sqrt();
    trivial.normalize();
    Matrix deflated = lap;
    deflated.noalias() += 3.0 * trivial * trivial.transpose();

    Eigen::SelfAdjointEigenSolver<Matrix> solver(deflated);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "laplacian_spectrum: symmetric eigensolver did not converge (n=" << n << ", d=" << d << ")";
        throw ConvergenceError(msg.str());
    }
    LaplacianSpectrum out;
    out.vectors = solver.eigenvectors().leftCols(d);
    out.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
    for (int c = 0; c < d; ++c) {
        const double residual =
            (lap * out.vectors.col(c) - out.eigenvalues[static_cast<std::size_t>(c)] * out.vectors.col(c)).norm();
        if (residual > eig_tol) {
            std::ostringstream msg;
            msg << "laplacian_spectrum: eigenpair " << c << " residual " << residual
                << " exceeds tolerance " << eig_tol << " (lambda=" << out.eigenvalues[static_cast<std::size_t>(c)] << ")";
            throw ConvergenceError(msg.str());
        }
    }
    out.degree = std::move(degree);
    return out;
}

Embedding laplacian_embed(const SparseMatrix& affinity, int d, double eig_tol) {
    if (d < 1) throw DomainError("laplacian_embed: dimension must be positive");
    const auto n = static_cast<int>(affinity.rows());
    const int valid = std::min(d, n - 1);
    if (valid < 1) throw DomainError("laplacian_embed: need at least two nodes");
    LaplacianSpectrum spec = laplacian_spectrum(affinity, valid, eig_tol);
    const Eigen::VectorXd inv_sqrt = spec.degree.array().rsqrt();
    Matrix coords = inv_sqrt.asDiagonal() * spec.vectors;
    for (Eigen::Index c = 0; c < coords.cols(); ++c) {
        const double norm = coords.col(c).norm();
        if (norm > 0.0) coords.col(c) /= norm;
    }
    apply_sign_convention(coords);
    return padded(std::move(coords), d, Method::laplacian, valid, std::move(spec.eigenvalues));
}

Embedding embed(const StandardizedMatrix& w, Method method, int d, const EmbeddingConfig& cfg) {
    if (method == Method::pca) return pca_embed(w.values, d);
    const auto n = static_cast<int>(w.values.rows());
    const int k = std::min(cfg.n_neighbors, n - 1);
    const Matrix affinity = cosine_affinity(w.values, cfg.gamma);
    return laplacian_embed(knn_sparsify(affinity, k), d, cfg.eig_tol);
}

}  // namespace iif::embedding
