#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hodgewalk/homology.hpp"
#include "hodgewalk/simplicial_complex.hpp"

namespace hodgewalk {

/// A state of an absorbing k-walk: an oriented simplex (index into X^k plus a
/// sign) or the death state Theta.
struct AbsorbingState {
    int simplex = -1;  // -1 encodes Theta
    int sign = 1;

    static AbsorbingState theta() { return AbsorbingState{}; }
    static AbsorbingState oriented(int index, int sign) {
        AbsorbingState s;
        s.simplex = index;
        s.sign = sign >= 0 ? 1 : -1;
        return s;
    }
    bool is_theta() const { return simplex < 0; }
};

/**
 * Left-stochastic transition matrix of an absorbing chain on
 * S = X^k_± ∪ {Theta}.  Columns are source states; states are indexed as
 * sigma_i^+ -> i, sigma_i^- -> m+i, Theta -> 2m with m = |X^k|.
 */
struct TransitionMatrix {
    int k = 0;
    double p = 0.0;
    Eigen::MatrixXd entries;

    int n_simplexes() const { return static_cast<int>((entries.rows() - 1) / 2); }
    int state_count() const { return static_cast<int>(entries.rows()); }

    int state_index(const AbsorbingState& s) const {
        int m = n_simplexes();
        if (s.is_theta()) return 2 * m;
        if (s.simplex >= m) throw std::invalid_argument("state index out of range");
        return s.sign > 0 ? s.simplex : m + s.simplex;
    }
};

namespace detail {

inline void check_lazy_probability(double p, const char* who) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument(std::string(who) + ": lazy probability p = " +
                                    std::to_string(p) + " must lie in [0,1)");
}

inline void check_walk_dimension(const SimplicialComplex& c, int k, const char* who) {
    if (k < 1 || k > c.dimension())
        throw std::invalid_argument(std::string(who) + ": k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c.dimension()) +
                                    "] (k = 0 walks are not supported)");
}

}  // namespace detail

/**
 * Transition matrix of the p-lazy Dirichlet k-walk.  From an oriented
 * k-simplex the walk stays put with probability p and moves to each similarly
 * oriented lower-adjacent neighbor with probability (1-p)/((M-1)(k+1)); the
 * residual mass feeds the absorbing death state.
 */
inline TransitionMatrix dirichlet_transition_matrix(const SimplicialComplex& c, int k, double p) {
    detail::check_walk_dimension(c, k, "dirichlet_transition_matrix");
    detail::check_lazy_probability(p, "dirichlet_transition_matrix");
    int m_deg = max_face_degree(c, k);
    if (m_deg < 2)
        throw std::invalid_argument(
            "dirichlet_transition_matrix: maximum face degree M = " + std::to_string(m_deg) +
            " < 2, every k-simplex is isolated");

    int m = c.size(k);
    double q = (1.0 - p) / ((m_deg - 1) * (k + 1));
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * m + 1, 2 * m + 1);
    std::vector<int> all(m);
    for (int i = 0; i < m; ++i) all[i] = i;
    auto pairs = detail::lower_adjacent_pairs(c, k, all);

    for (int i = 0; i < m; ++i) {
        P(i, i) = p;
        P(m + i, m + i) = p;
    }
    std::vector<int> neighbor_count(m, 0);
    for (auto& [a, b, rel] : pairs) {
        if (rel == AdjacencyKind::SimilarLower) {
            P(b, a) = q;          // a+ -> b+
            P(a, b) = q;          // b+ -> a+
            P(m + b, m + a) = q;  // a- -> b-
            P(m + a, m + b) = q;
        } else {
            P(m + b, a) = q;  // a+ -> b-
            P(m + a, b) = q;
            P(b, m + a) = q;  // a- -> b+
            P(a, m + b) = q;
        }
        ++neighbor_count[a];
        ++neighbor_count[b];
    }
    for (int i = 0; i < m; ++i) {
        double death = std::max(0.0, 1.0 - p - neighbor_count[i] * q);
        P(2 * m, i) = death;
        P(2 * m, m + i) = death;
    }
    P(2 * m, 2 * m) = 1.0;  // Theta absorbs

    TransitionMatrix t;
    t.k = k;
    t.p = p;
    t.entries = std::move(P);
    return t;
}

/**
 * The orientation-collapsing transform: maps a function on S = X^k_± ∪ {Theta}
 * to the k-cochain f(sigma+) - f(sigma-), discarding Theta.  Returned as an
 * m x (2m+1) matrix over the state indexing of TransitionMatrix.
 */
inline Eigen::SparseMatrix<double> transform_T(const SimplicialComplex& c, int k) {
    if (k < 0 || k > c.dimension()) throw std::invalid_argument("transform_T: k out of range");
    int m = c.size(k);
    Eigen::SparseMatrix<double> t(m, 2 * m + 1);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * m);
    for (int i = 0; i < m; ++i) {
        trips.emplace_back(i, i, 1.0);
        trips.emplace_back(i, m + i, -1.0);
    }
    t.setFromTriplets(trips.begin(), trips.end());
    return t;
}

/**
 * Propagation matrix B of the Dirichlet k-walk, assembled from the adjacency
 * case table: diagonal p, +q on similarly oriented lower-adjacent pairs, -q
 * on dissimilar ones, q = (1-p)/((M-1)(k+1)).  Satisfies T·P = B·T.
 */
inline Eigen::MatrixXd dirichlet_propagation_matrix(const SimplicialComplex& c, int k, double p) {
    detail::check_walk_dimension(c, k, "dirichlet_propagation_matrix");
    detail::check_lazy_probability(p, "dirichlet_propagation_matrix");
    int m_deg = max_face_degree(c, k);
    if (m_deg < 2)
        throw std::invalid_argument("dirichlet_propagation_matrix: maximum face degree M < 2");

    int m = c.size(k);
    double q = (1.0 - p) / ((m_deg - 1) * (k + 1));
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) b(i, i) = p;
    std::vector<int> all(m);
    for (int i = 0; i < m; ++i) all[i] = i;
    for (auto& [i, j, rel] : detail::lower_adjacent_pairs(c, k, all)) {
        double v = rel == AdjacencyKind::SimilarLower ? q : -q;
        b(i, j) = v;
        b(j, i) = v;
    }
    return b;
}

/// Closed form of the same matrix through the down Laplacian:
/// B = ((p(M-2)+1)/(M-1)) I - ((1-p)/((M-1)(k+1))) L_k^down.
inline Eigen::MatrixXd dirichlet_propagation_matrix_closed_form(const SimplicialComplex& c, int k,
                                                                double p) {
    detail::check_walk_dimension(c, k, "dirichlet_propagation_matrix_closed_form");
    detail::check_lazy_probability(p, "dirichlet_propagation_matrix_closed_form");
    int m_deg = max_face_degree(c, k);
    if (m_deg < 2)
        throw std::invalid_argument(
            "dirichlet_propagation_matrix_closed_form: maximum face degree M < 2");
    int m = c.size(k);
    double c1 = (p * (m_deg - 2) + 1.0) / (m_deg - 1);
    double c2 = (1.0 - p) / ((m_deg - 1) * (k + 1));
    return c1 * Eigen::MatrixXd::Identity(m, m) -
           c2 * laplacian(c, k, LaplacianPart::Down).dense();
}

/// Factor (M-1)/(p(M-2)+1) that rescales the top of B's spectrum to 1.
inline double dirichlet_normalization(const SimplicialComplex& c, int k, double p) {
    int m_deg = max_face_degree(c, k);
    return (m_deg - 1) / (p * (m_deg - 2) + 1.0);
}

inline Eigen::MatrixXd normalize_propagation(const Eigen::MatrixXd& b, const SimplicialComplex& c,
                                             int k, double p) {
    return dirichlet_normalization(c, k, p) * b;
}

/**
 * A symmetric matrix indexed by X^k_+ with non-negative diagonal whose
 * zero-diagonal rows/columns vanish; the common input of the generic walk
 * framework.  D is the diagonal with zeros replaced by 1 and K the largest
 * off-diagonal column sum of |L D^{-1}| (K = 0 is degenerate and rejected).
 */
struct XkMatrix {
    Eigen::MatrixXd L;
    Eigen::VectorXd D;
    double K = 0.0;

    explicit XkMatrix(Eigen::MatrixXd l) : L(std::move(l)) {
        if (L.rows() != L.cols()) throw std::invalid_argument("XkMatrix: matrix not square");
        detail::check_symmetric(L, "XkMatrix");
        double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
        D = Eigen::VectorXd::Ones(L.rows());
        for (Eigen::Index i = 0; i < L.rows(); ++i) {
            double di = L(i, i);
            if (di < -1e-12 * scale)
                throw std::invalid_argument("XkMatrix: negative diagonal entry");
            if (std::abs(di) <= 1e-12 * scale) {
                double row_max = std::max(L.row(i).cwiseAbs().maxCoeff(),
                                          L.col(i).cwiseAbs().maxCoeff());
                if (row_max > 1e-12 * scale)
                    throw std::invalid_argument(
                        "XkMatrix: zero diagonal with nonzero row/column entries");
            } else {
                D[i] = di;
            }
        }
        Eigen::MatrixXd ld = L * D.cwiseInverse().asDiagonal();
        for (Eigen::Index j = 0; j < ld.cols(); ++j) {
            double s = ld.col(j).cwiseAbs().sum() - std::abs(ld(j, j));
            K = std::max(K, s);
        }
        if (K <= 0.0)
            throw std::invalid_argument("XkMatrix: K = 0 is degenerate (no off-diagonal coupling)");
    }

    Eigen::MatrixXd normalized() const { return L * D.cwiseInverse().asDiagonal(); }
};

struct GenericPropagation {
    Eigen::MatrixXd propagation;  // A_{L,p}
    Eigen::MatrixXd normalized;   // A~_{L,p}
    double K = 0.0;
};

/// Propagation matrices of the p-lazy walk related to an X^k_+-matrix:
///   A = ((p(K-1)+1)/K) I - ((1-p)/K) L D^{-1},   A~ = I - ((1-p)/(p(K-1)+1)) L D^{-1}.
/// p = 1 yields the identity propagation.
inline GenericPropagation generic_propagation(const XkMatrix& l, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("generic_propagation: p must lie in [0,1]");
    Eigen::MatrixXd ld = l.normalized();
    Eigen::Index n = ld.rows();
    GenericPropagation g;
    g.K = l.K;
    g.propagation = ((p * (l.K - 1.0) + 1.0) / l.K) * Eigen::MatrixXd::Identity(n, n) -
                    ((1.0 - p) / l.K) * ld;
    g.normalized = Eigen::MatrixXd::Identity(n, n) -
                   ((1.0 - p) / (p * (l.K - 1.0) + 1.0)) * ld;
    return g;
}

/**
 * Transition matrix of the generic walk: positive entries of A drive
 * orientation-preserving moves, negative ones orientation-flipping moves, and
 * the residual column mass feeds Theta.  Satisfies A·T = T·P exactly.
 */
inline TransitionMatrix generic_transition_matrix(const XkMatrix& l, double p, int k) {
    GenericPropagation g = generic_propagation(l, p);
    const Eigen::MatrixXd& a = g.propagation;
    int m = static_cast<int>(a.rows());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * m + 1, 2 * m + 1);
    for (int col = 0; col < m; ++col) {
        double mass = 0.0;
        for (int row = 0; row < m; ++row) {
            // |entries| of A stay below 1 exactly; the min absorbs 1-ulp rounding
            double v = std::min(std::abs(a(row, col)), 1.0);
            if (a(row, col) > 0.0) {
                P(row, col) = v;
                P(m + row, m + col) = v;
            } else if (a(row, col) < 0.0) {
                P(m + row, col) = v;
                P(row, m + col) = v;
            }
            mass += v;
        }
        double death = std::max(0.0, 1.0 - mass);
        P(2 * m, col) = death;
        P(2 * m, m + col) = death;
        if (mass > 1.0 + 1e-9)
            throw std::runtime_error(
                "generic_transition_matrix: column mass " + std::to_string(mass) +
                " exceeds 1; zero-diagonal states with K < 1 do not define a walk");
    }
    P(2 * m, 2 * m) = 1.0;

    TransitionMatrix t;
    t.k = k;
    t.p = p;
    t.entries = std::move(P);
    return t;
}

struct GenericWalk {
    Eigen::MatrixXd propagation;
    Eigen::MatrixXd normalized;
    TransitionMatrix transition;
    double K = 0.0;
};

inline GenericWalk generic_framework(const XkMatrix& l, double p, int k) {
    GenericWalk w;
    GenericPropagation g = generic_propagation(l, p);
    w.propagation = std::move(g.propagation);
    w.normalized = std::move(g.normalized);
    w.K = g.K;
    w.transition = generic_transition_matrix(l, p, k);
    return w;
}

/// Propagation matrix of the Neumann k-walk: the generic propagation of the
/// up Laplacian (K = k+1, per-coneighbor probability (1-p)/((k+1) deg)).
inline Eigen::MatrixXd neumann_propagation_matrix(const SimplicialComplex& c, int k, double p) {
    if (k < 1 || k > c.dimension() - 1)
        throw std::invalid_argument("neumann_propagation_matrix: k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c.dimension() - 1) +
                                    "]");
    detail::check_lazy_probability(p, "neumann_propagation_matrix");
    XkMatrix up(laplacian(c, k, LaplacianPart::Up).dense());
    return generic_propagation(up, p).propagation;
}

/**
 * Transition matrix of the p-lazy Neumann k-walk, realized through the
 * generic framework on the up Laplacian.  Simplexes with no coface keep the
 * walk's stated rule — stay with probability p, die with probability 1-p —
 * which replaces the raw sign-split column at those states.
 */
inline TransitionMatrix neumann_transition_matrix(const SimplicialComplex& c, int k, double p) {
    if (k < 1 || k > c.dimension() - 1)
        throw std::invalid_argument("neumann_transition_matrix: k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c.dimension() - 1) +
                                    "]");
    detail::check_lazy_probability(p, "neumann_transition_matrix");
    XkMatrix up(laplacian(c, k, LaplacianPart::Up).dense());
    TransitionMatrix t = generic_transition_matrix(up, p, k);
    int m = c.size(k);
    for (int i = 0; i < m; ++i) {
        if (!c.cofaces(k, i).empty()) continue;
        t.entries.col(i).setZero();
        t.entries.col(m + i).setZero();
        t.entries(i, i) = p;
        t.entries(m + i, m + i) = p;
        t.entries(2 * m, i) = 1.0 - p;
        t.entries(2 * m, m + i) = 1.0 - p;
    }
    return t;
}

/// One run of a marginal-difference evolution: the iterated matrix, the trace
/// of cochain iterates and, when known in closed form, the limit.
struct WalkEvolution {
    int k = 0;
    double p = 0.0;
    Eigen::MatrixXd propagation;
    Eigen::MatrixXd normalized;
    std::vector<Cochain> trace;
    std::optional<Cochain> limit;
};

/// Repeated multiplication trace: trace[0] = nu0, trace[n+1] = prop·trace[n].
/// A positive stop_tol truncates once successive iterates differ by less.
inline WalkEvolution evolve(const Eigen::MatrixXd& prop, const Cochain& nu0, int n,
                            double stop_tol = 0.0) {
    if (prop.rows() != prop.cols() || prop.cols() != nu0.values.size())
        throw std::invalid_argument("evolve: dimension mismatch between matrix and cochain");
    if (n < 0) throw std::invalid_argument("evolve: negative step count");
    WalkEvolution ev;
    ev.k = nu0.k;
    ev.propagation = prop;
    ev.normalized = prop;
    ev.trace.reserve(n + 1);
    ev.trace.push_back(nu0);
    Eigen::VectorXd v = nu0.values;
    for (int i = 1; i <= n; ++i) {
        Eigen::VectorXd next = prop * v;
        double delta = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        ev.trace.emplace_back(nu0.k, v);
        if (stop_tol > 0.0 && delta < stop_tol) break;
    }
    return ev;
}

namespace detail {

inline Eigen::MatrixXd normalized_dirichlet(const SimplicialComplex& c, int k, double p) {
    return normalize_propagation(dirichlet_propagation_matrix(c, k, p), c, k, p);
}

// Throws when the normalized spectrum touches -1 (the marginal difference
// would not converge); reports the offending eigenvalue.
inline void check_dirichlet_convergence(const SimplicialComplex& c, int k, double p) {
    Eigen::MatrixXd bt = normalized_dirichlet(c, k, p);
    check_dense_size(bt.rows(), "check_dirichlet_convergence");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bt, Eigen::EigenvaluesOnly);
    double low = es.eigenvalues().minCoeff();
    if (low <= -1.0 + 1e-10)
        throw std::runtime_error(
            "normalized propagation spectrum reaches " + std::to_string(low) +
            " <= -1; the normalized marginal difference does not converge at p = " +
            std::to_string(p));
}

inline int index_of_oriented(const SimplicialComplex& c, int k, const OrientedSimplex& tau,
                             const char* who) {
    if (tau.dim() != k)
        throw std::invalid_argument(std::string(who) + ": start simplex has wrong dimension");
    auto idx = c.index_of(tau.vertices);
    if (!idx)
        throw std::invalid_argument(std::string(who) + ": start simplex " +
                                    simplex_str(tau.vertices) + " not in complex");
    return *idx;
}

}  // namespace detail

/**
 * Closed-form limit of the normalized marginal difference started at tau: the
 * orthogonal projection of the indicator cochain onto ker boundary_k.  The
 * convergence precondition (normalized spectrum inside (-1, 1]) is checked,
 * not assumed.
 */
inline Cochain marginal_difference_limit(const SimplicialComplex& c, int k, double p,
                                         const OrientedSimplex& tau) {
    int idx = detail::index_of_oriented(c, k, tau, "marginal_difference_limit");
    detail::check_dirichlet_convergence(c, k, p);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(c.size(k));
    e[idx] = tau.sign;
    return hodge_project(c, Cochain(k, e), HodgeSubspace::KerBoundary);
}

/**
 * Numerical rank of the family of walk limits projected onto ker coboundary_k
 * over all positively oriented starting simplexes; equals the k-th Betti
 * number whenever the walk converges.
 */
inline int homology_rank_from_walks(const SimplicialComplex& c, int k, double p) {
    detail::check_walk_dimension(c, k, "homology_rank_from_walks");
    detail::check_dirichlet_convergence(c, k, p);
    int m = c.size(k);
    Eigen::MatrixXd ker_boundary = detail::null_space(boundary_matrix(c, k).dense());
    Eigen::MatrixXd ker_coboundary =
        k == c.dimension() ? Eigen::MatrixXd::Identity(m, m)
                           : detail::null_space(boundary_matrix(c, k + 1).dense().transpose());
    // columns = proj_{ker coboundary} proj_{ker boundary} 1_{tau+} for every tau+
    Eigen::MatrixXd limits = ker_coboundary * (ker_coboundary.transpose() *
                                               (ker_boundary * ker_boundary.transpose()));
    if (limits.rows() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(limits);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double tol = kKernelTol * std::max(1.0, sv[0]);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    return rank;
}

/// Outcome of a geometric-rate fit against the spectral prediction
/// 1 - (1-p) lambda_k / ((p(M-2)+1)(k+1)).
struct RateCheck {
    double fitted = 0.0;
    double predicted = 0.0;
    int points_used = 0;
    bool exact_at_start = false;  // error sequence identically zero
};

/**
 * Evolves the normalized marginal difference from tau for n_max steps and
 * fits the decay rate of ||E~_n - E~_inf|| by least squares on the log scale,
 * ignoring terms below 1e-13.  Requires p >= 1/2 so the normalized spectrum
 * is non-negative and the prediction is one-sided.
 */
inline RateCheck convergence_rate_check(const SimplicialComplex& c, int k, double p,
                                        const OrientedSimplex& tau, int n_max) {
    if (!(p >= 0.5 && p < 1.0))
        throw std::invalid_argument("convergence_rate_check: requires 0.5 <= p < 1");
    int idx = detail::index_of_oriented(c, k, tau, "convergence_rate_check");
    int m_deg = max_face_degree(c, k);
    Eigen::MatrixXd bt = detail::normalized_dirichlet(c, k, p);

    Eigen::VectorXd e = Eigen::VectorXd::Zero(c.size(k));
    e[idx] = tau.sign;
    Eigen::VectorXd lim =
        hodge_project(c, Cochain(k, e), HodgeSubspace::KerBoundary).values;

    RateCheck r;
    r.predicted = 1.0 - (1.0 - p) * lambda_k(c, k) / ((p * (m_deg - 2) + 1.0) * (k + 1));

    std::vector<double> ns, logs;
    Eigen::VectorXd v = e;
    for (int n = 0; n <= n_max; ++n) {
        double err = (v - lim).norm();
        if (err >= 1e-13) {
            ns.push_back(n);
            logs.push_back(std::log(err));
        }
        if (n < n_max) v = bt * v;
    }
    r.points_used = static_cast<int>(ns.size());
    if (ns.empty()) {
        r.exact_at_start = true;  // converged before the first step
        return r;
    }
    if (ns.size() < 2) {
        r.fitted = 0.0;  // below the noise floor after one step
        return r;
    }
    double nbar = 0.0, lbar = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        nbar += ns[i];
        lbar += logs[i];
    }
    nbar /= ns.size();
    lbar /= ns.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        num += (ns[i] - nbar) * (logs[i] - lbar);
        den += (ns[i] - nbar) * (ns[i] - nbar);
    }
    r.fitted = std::exp(num / den);
    return r;
}

/// Convenience: full Dirichlet evolution with both matrices, the normalized
/// trace and the closed-form limit.
inline WalkEvolution dirichlet_walk_evolution(const SimplicialComplex& c, int k, double p,
                                              const OrientedSimplex& start, int n,
                                              double stop_tol = 0.0) {
    int idx = detail::index_of_oriented(c, k, start, "dirichlet_walk_evolution");
    Eigen::MatrixXd b = dirichlet_propagation_matrix(c, k, p);
    Eigen::MatrixXd bt = normalize_propagation(b, c, k, p);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(c.size(k));
    e[idx] = start.sign;
    WalkEvolution ev = evolve(bt, Cochain(k, e), n, stop_tol);
    ev.k = k;
    ev.p = p;
    ev.propagation = std::move(b);
    ev.normalized = std::move(bt);
    ev.limit = hodge_project(c, Cochain(k, e), HodgeSubspace::KerBoundary);
    return ev;
}

}  // namespace hodgewalk
