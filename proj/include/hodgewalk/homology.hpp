#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hodgewalk/simplicial_complex.hpp"

namespace hodgewalk {

/// Relative tolerance below which an eigenvalue or singular value counts as
/// zero (scaled by max(1, spectral radius)).
inline constexpr double kKernelTol = 1e-8;

/// Hard cap on dense symmetric eigensolves / SVDs; larger requests fail
/// loudly instead of switching methods.
inline constexpr int kDenseSolveLimit = 4096;

/// A real k-cochain in the canonical basis of positively oriented k-simplexes.
/// Evaluation on a negatively oriented simplex is the negated coordinate.
struct Cochain {
    int k = 0;
    Eigen::VectorXd values;

    Cochain() = default;
    Cochain(int k_, Eigen::VectorXd v) : k(k_), values(std::move(v)) {}

    double operator()(const OrientedSimplex& s, const SimplicialComplex& c) const {
        auto idx = c.index_of(s.vertices);
        if (!idx || s.dim() != k)
            throw std::invalid_argument("cochain evaluated on simplex outside its basis");
        return s.sign * values[*idx];
    }
};

/// Sparse linear map between cochain spaces; row_dim/col_dim record which
/// X^j_+ indexes each side.
struct SparseOperator {
    int row_dim = 0;
    int col_dim = 0;
    Eigen::SparseMatrix<double> mat;

    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat); }
};

enum class LaplacianPart { Up, Down, Full };

/**
 * Boundary operator C^k -> C^{k-1}.  The column of sigma = [v0..vk] carries
 * (-1)^i in the row of the face omitting v_i; since canonical tuples are
 * ascending, every face already appears in its positive orientation and no
 * extra sign adjustment is needed.  Entries are exact small integers.
 */
inline SparseOperator boundary_matrix(const SimplicialComplex& c, int k) {
    if (k < 1 || k > c.dimension())
        throw std::invalid_argument("boundary_matrix: k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c.dimension()) + "]");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(c.size(k)) * (k + 1));
    for (int i = 0; i < c.size(k); ++i) {
        const auto& f = c.faces(k, i);
        for (std::size_t t = 0; t < f.size(); ++t)
            trips.emplace_back(f[t], i, (t % 2 == 0) ? 1.0 : -1.0);
    }
    SparseOperator op;
    op.row_dim = k - 1;
    op.col_dim = k;
    op.mat.resize(c.size(k - 1), c.size(k));
    op.mat.setFromTriplets(trips.begin(), trips.end());
    return op;
}

/// Coboundary C^k -> C^{k+1}: the transpose of the boundary one level up.
inline SparseOperator coboundary_matrix(const SimplicialComplex& c, int k) {
    if (k < 0 || k > c.dimension() - 1)
        throw std::invalid_argument("coboundary_matrix: k = " + std::to_string(k) +
                                    " out of range [0, " + std::to_string(c.dimension() - 1) + "]");
    SparseOperator b = boundary_matrix(c, k + 1);
    SparseOperator op;
    op.row_dim = k + 1;
    op.col_dim = k;
    op.mat = b.mat.transpose();
    return op;
}

/**
 * Combinatorial k-Laplacian: up part boundary*coboundary, down part
 * coboundary*boundary, full their sum.  The up part is the zero matrix at the
 * top dimension (no fillings above); the down part needs k >= 1.
 */
inline SparseOperator laplacian(const SimplicialComplex& c, int k, LaplacianPart part) {
    int d = c.dimension();
    if (k < 0 || k > d)
        throw std::invalid_argument("laplacian: k = " + std::to_string(k) + " out of range [0, " +
                                    std::to_string(d) + "]");
    if (part == LaplacianPart::Down && k < 1)
        throw std::invalid_argument("laplacian: down part requires k >= 1");

    int n = c.size(k);
    SparseOperator op;
    op.row_dim = k;
    op.col_dim = k;
    op.mat.resize(n, n);
    if (part != LaplacianPart::Down && k <= d - 1) {
        Eigen::SparseMatrix<double> b = boundary_matrix(c, k + 1).mat;
        op.mat = op.mat + Eigen::SparseMatrix<double>(b * Eigen::SparseMatrix<double>(b.transpose()));
    }
    if (part != LaplacianPart::Up && k >= 1) {
        Eigen::SparseMatrix<double> b = boundary_matrix(c, k).mat;
        op.mat = op.mat + Eigen::SparseMatrix<double>(Eigen::SparseMatrix<double>(b.transpose()) * b);
    }
    return op;
}

/**
 * Weighted k-Laplacian for strictly positive diagonal weights per dimension:
 *   up   = W_k^{-1/2} * boundary_{k+1} * W_{k+1} * coboundary_k * W_k^{-1/2}
 *   down = W_k^{1/2} * coboundary_{k-1} * W_{k-1}^{-1} * boundary_k * W_k^{1/2}
 * Reduces to the unweighted Laplacian at identity weights.  Constructor-level
 * only; downstream walks consume the result through the generic framework.
 */
inline SparseOperator weighted_laplacian(const SimplicialComplex& c, int k,
                                         const Eigen::VectorXd& w_km1, const Eigen::VectorXd& w_k,
                                         const Eigen::VectorXd& w_kp1,
                                         LaplacianPart part = LaplacianPart::Full) {
    int d = c.dimension();
    if (k < 0 || k > d)
        throw std::invalid_argument("weighted_laplacian: k out of range");
    if (part == LaplacianPart::Down && k < 1)
        throw std::invalid_argument("weighted_laplacian: down part requires k >= 1");

    auto check = [](const Eigen::VectorXd& w, int expect, const char* name) {
        if (w.size() != expect)
            throw std::invalid_argument(std::string("weighted_laplacian: ") + name +
                                        " has wrong length");
        for (Eigen::Index i = 0; i < w.size(); ++i)
            if (!(w[i] > 0.0))
                throw std::invalid_argument(std::string("weighted_laplacian: ") + name +
                                            " must be strictly positive");
    };
    check(w_k, c.size(k), "W_k");
    if (k >= 1) check(w_km1, c.size(k - 1), "W_{k-1}");
    if (k <= d - 1) check(w_kp1, c.size(k + 1), "W_{k+1}");

    int n = c.size(k);
    Eigen::VectorXd wk_isqrt = w_k.cwiseSqrt().cwiseInverse();
    Eigen::VectorXd wk_sqrt = w_k.cwiseSqrt();

    SparseOperator op;
    op.row_dim = k;
    op.col_dim = k;
    op.mat.resize(n, n);
    if (part != LaplacianPart::Down && k <= d - 1) {
        Eigen::SparseMatrix<double> b = boundary_matrix(c, k + 1).mat;
        Eigen::SparseMatrix<double> up =
            wk_isqrt.asDiagonal() * b * w_kp1.asDiagonal() *
            Eigen::SparseMatrix<double>(b.transpose()) * wk_isqrt.asDiagonal();
        op.mat = op.mat + up;
    }
    if (part != LaplacianPart::Up && k >= 1) {
        Eigen::SparseMatrix<double> b = boundary_matrix(c, k).mat;
        Eigen::SparseMatrix<double> down =
            wk_sqrt.asDiagonal() * Eigen::SparseMatrix<double>(b.transpose()) *
            w_km1.cwiseInverse().asDiagonal() * b * wk_sqrt.asDiagonal();
        op.mat = op.mat + down;
    }
    return op;
}

namespace detail {

inline void check_dense_size(Eigen::Index n, const char* who) {
    if (n > kDenseSolveLimit)
        throw std::runtime_error(std::string(who) + ": dense solve limited to " +
                                 std::to_string(kDenseSolveLimit) + " rows, got " +
                                 std::to_string(n));
}

inline void check_symmetric(const Eigen::MatrixXd& a, const char* who) {
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw std::invalid_argument(std::string(who) + ": matrix is not symmetric (deviation " +
                                    std::to_string(asym) + ")");
}

/// Orthonormal basis of the right null space of A (columns).
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a) {
    if (a.rows() == 0 || a.cols() == 0)
        return Eigen::MatrixXd::Identity(a.cols(), a.cols());
    check_dense_size(std::max(a.rows(), a.cols()), "null_space");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double tol = kKernelTol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

/// Orthonormal basis of the column space of A.
inline Eigen::MatrixXd range_space(const Eigen::MatrixXd& a) {
    if (a.rows() == 0 || a.cols() == 0) return Eigen::MatrixXd::Zero(a.rows(), 0);
    check_dense_size(std::max(a.rows(), a.cols()), "range_space");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    double tol = kKernelTol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

inline Eigen::MatrixXd kernel_of_symmetric(const Eigen::MatrixXd& a) {
    check_dense_size(a.rows(), "kernel_of_symmetric");
    if (a.rows() == 0) return Eigen::MatrixXd::Zero(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const auto& ev = es.eigenvalues();
    double tol = kKernelTol * std::max(1.0, ev.cwiseAbs().maxCoeff());
    int dim = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) < tol) ++dim;
    Eigen::MatrixXd basis(a.rows(), dim);
    int col = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) < tol) basis.col(col++) = es.eigenvectors().col(i);
    return basis;
}

}  // namespace detail

/**
 * Smallest eigenvalue of the down k-Laplacian restricted to the orthogonal
 * complement of the image of the (k+1)-boundary; zero exactly when the k-th
 * homology is nontrivial.  Defined as 0 at k = 0 (the down map vanishes).
 */
inline double lambda_k(const SimplicialComplex& c, int k) {
    if (k == 0) return 0.0;
    if (k < 1 || k > c.dimension()) throw std::invalid_argument("lambda_k: k out of range");
    Eigen::MatrixXd down = laplacian(c, k, LaplacianPart::Down).dense();
    detail::check_dense_size(down.rows(), "lambda_k");
    Eigen::MatrixXd complement;
    if (k + 1 > c.dimension()) {
        complement = Eigen::MatrixXd::Identity(down.rows(), down.rows());
    } else {
        // orthogonal complement of im boundary_{k+1} = ker of its transpose
        complement = detail::null_space(boundary_matrix(c, k + 1).dense().transpose());
    }
    if (complement.cols() == 0)
        throw std::runtime_error("lambda_k: image of the boundary fills the cochain space");
    Eigen::MatrixXd restricted = complement.transpose() * down * complement;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(restricted);
    return es.eigenvalues().minCoeff();
}

struct SpectralSummary {
    Eigen::VectorXd eigenvalues;        // ascending
    double lambda_k = 0.0;              // deflated minimum of the down Laplacian
    std::vector<Cochain> kernel_basis;  // orthonormal
    double lambda_max = 0.0;            // spectral upper bound used downstream
};

/// Full dense symmetric spectrum of op on C^k, plus the kernel basis and
/// lambda_k of the underlying complex.
inline SpectralSummary spectral_summary(const SparseOperator& op, const SimplicialComplex& c,
                                        int k) {
    Eigen::MatrixXd a = op.dense();
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_summary: matrix not square");
    detail::check_dense_size(a.rows(), "spectral_summary");
    detail::check_symmetric(a, "spectral_summary");

    SpectralSummary s;
    if (a.rows() == 0) return s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    s.eigenvalues = es.eigenvalues();
    s.lambda_max = s.eigenvalues.maxCoeff();
    double tol = kKernelTol * std::max(1.0, s.eigenvalues.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
        if (std::abs(s.eigenvalues[i]) < tol)
            s.kernel_basis.emplace_back(k, es.eigenvectors().col(i));
    s.lambda_k = lambda_k(c, k);
    return s;
}

/// Betti number over the reals: dimension of the kernel of the full
/// k-Laplacian.
inline int betti(const SimplicialComplex& c, int k) {
    if (k < 0 || k > c.dimension()) throw std::invalid_argument("betti: k out of range");
    Eigen::MatrixXd l = laplacian(c, k, LaplacianPart::Full).dense();
    detail::check_dense_size(l.rows(), "betti");
    if (l.rows() == 0) return 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
    double tol = kKernelTol * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    int dim = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()[i]) < tol) ++dim;
    return dim;
}

enum class HodgeSubspace { KerBoundary, KerCoboundary, KerLaplacian, ImBoundary, ImCoboundary };

/**
 * Orthogonal projection of a k-cochain onto one summand (or partial sum) of
 * the Hodge decomposition  C^k = im boundary_{k+1} (+) ker L_k (+) im
 * coboundary_{k-1}.
 */
inline Cochain hodge_project(const SimplicialComplex& c, const Cochain& f, HodgeSubspace target) {
    int k = f.k;
    if (k < 0 || k > c.dimension()) throw std::invalid_argument("hodge_project: k out of range");
    if (f.values.size() != c.size(k))
        throw std::invalid_argument("hodge_project: cochain length does not match |X^k|");
    int d = c.dimension();

    Eigen::MatrixXd basis;
    switch (target) {
        case HodgeSubspace::KerBoundary:
            if (k == 0) return f;  // the 0-boundary is the zero map
            basis = detail::null_space(boundary_matrix(c, k).dense());
            break;
        case HodgeSubspace::KerCoboundary:
            if (k == d) return f;
            basis = detail::null_space(boundary_matrix(c, k + 1).dense().transpose());
            break;
        case HodgeSubspace::KerLaplacian:
            basis = detail::kernel_of_symmetric(laplacian(c, k, LaplacianPart::Full).dense());
            break;
        case HodgeSubspace::ImBoundary:
            if (k == d) return Cochain(k, Eigen::VectorXd::Zero(c.size(k)));
            basis = detail::range_space(boundary_matrix(c, k + 1).dense());
            break;
        case HodgeSubspace::ImCoboundary:
            if (k == 0) return Cochain(k, Eigen::VectorXd::Zero(c.size(k)));
            basis = detail::range_space(boundary_matrix(c, k).dense().transpose());
            break;
    }
    return Cochain(k, basis * (basis.transpose() * f.values));
}

}  // namespace hodgewalk
