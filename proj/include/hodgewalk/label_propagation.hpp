#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hodgewalk/homology.hpp"
#include "hodgewalk/parallel.hpp"
#include "hodgewalk/walks.hpp"

namespace hodgewalk {

enum class EdgeOperatorKind { Up, Down, Full };

/// The three built-in edge operators exposed by the CLI; weighted Laplacians
/// enter as custom XkMatrices.
inline XkMatrix make_edge_operator(const SimplicialComplex& c, EdgeOperatorKind kind) {
    switch (kind) {
        case EdgeOperatorKind::Up:
            return XkMatrix(laplacian(c, 1, LaplacianPart::Up).dense());
        case EdgeOperatorKind::Down:
            return XkMatrix(laplacian(c, 1, LaplacianPart::Down).dense());
        default:
            return XkMatrix(laplacian(c, 1, LaplacianPart::Full).dense());
    }
}

/**
 * A partially labelled oriented-simplex classification instance.  Labels are
 * stored per underlying simplex as a signed class on the positive
 * orientation: a label c on sigma- is the label -c on sigma+.  The engine is
 * dimension-generic through the operator matrix; the CLI only exposes k = 1.
 */
struct LabelProblem {
    const SimplicialComplex* complex = nullptr;
    int k = 1;
    XkMatrix op;                              // operator on X^k_+
    std::vector<std::pair<int, int>> labels;  // (simplex index, signed class)
    int n_classes = 1;
    double p = 0.5;
    int t_iters = 0;
    std::vector<Eigen::VectorXd> f0;  // optional, one per class; empty = psi extended by zero

    LabelProblem(const SimplicialComplex& c_, int k_, XkMatrix op_,
                 std::vector<std::pair<int, int>> labels_, int n_classes_, double p_, int t_iters_,
                 std::vector<Eigen::VectorXd> f0_ = {})
        : complex(&c_),
          k(k_),
          op(std::move(op_)),
          labels(std::move(labels_)),
          n_classes(n_classes_),
          p(p_),
          t_iters(t_iters_),
          f0(std::move(f0_)) {}
};

struct PropagationResult {
    std::vector<Eigen::VectorXd> f_final;                 // per class, after t_iters rounds
    std::vector<std::optional<Eigen::VectorXd>> f_limit;  // closed form where computable
    std::vector<std::string> limit_status;                // "ok" or the blocking reason
    std::vector<int> assigned;                            // per simplex: signed class, 0 = none
    std::vector<bool> kernel_support_ok;                  // per class
    double K = 0.0;
    double lambda_max = 0.0;                     // max eigenvalue of D^-1/2 L D^-1/2
    std::optional<double> p_threshold;           // (Λ-2)/(2K+Λ-2) when the denominator is positive
};

/**
 * True when no kernel vector of L is supported entirely on the given
 * unclassified set, i.e. the kernel basis restricted to the labelled rows has
 * full column rank.
 */
inline bool kernel_support_check(const XkMatrix& l, const std::vector<int>& unlabelled) {
    Eigen::Index n = l.L.rows();
    std::vector<char> is_unlabelled(n, 0);
    for (int i : unlabelled) is_unlabelled.at(i) = 1;
    Eigen::MatrixXd kernel = detail::kernel_of_symmetric(l.L);
    if (kernel.cols() == 0) return true;
    std::vector<int> labelled;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!is_unlabelled[i]) labelled.push_back(static_cast<int>(i));
    if (labelled.empty()) return false;
    Eigen::MatrixXd restricted(labelled.size(), kernel.cols());
    for (std::size_t r = 0; r < labelled.size(); ++r) restricted.row(r) = kernel.row(labelled[r]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(restricted);
    const auto& sv = svd.singularValues();
    double tol = kKernelTol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    return rank == kernel.cols();
}

namespace detail {

struct ProblemView {
    Eigen::MatrixXd a_norm;
    double K = 0.0;
    double lambda_max = 0.0;
    std::optional<double> p_threshold;
    bool p_admissible = false;
};

inline void validate_problem(const LabelProblem& prob) {
    if (!prob.complex) throw std::invalid_argument("label propagation: missing complex");
    const SimplicialComplex& c = *prob.complex;
    if (prob.k < 1 || prob.k > c.dimension())
        throw std::invalid_argument("label propagation: k out of range");
    int m = c.size(prob.k);
    if (prob.op.L.rows() != m)
        throw std::invalid_argument("label propagation: operator size does not match |X^k|");
    if (!(prob.p > 0.0 && prob.p < 1.0))
        throw std::invalid_argument("label propagation: p must lie in (0,1)");
    if (prob.t_iters < 0) throw std::invalid_argument("label propagation: negative iteration count");
    if (prob.labels.empty()) throw std::invalid_argument("label propagation: no labelled simplexes");
    if (prob.n_classes < 1) throw std::invalid_argument("label propagation: need at least one class");
    std::vector<char> seen(m, 0);
    std::vector<char> class_used(prob.n_classes + 1, 0);
    for (auto [idx, cls] : prob.labels) {
        if (idx < 0 || idx >= m)
            throw std::invalid_argument("label propagation: label on unknown simplex");
        if (cls == 0 || std::abs(cls) > prob.n_classes)
            throw std::invalid_argument("label propagation: class out of range");
        if (seen[idx]) throw std::invalid_argument("label propagation: simplex labelled twice");
        seen[idx] = 1;
        class_used[std::abs(cls)] = 1;
    }
    for (int cls = 1; cls <= prob.n_classes; ++cls)
        if (!class_used[cls])
            throw std::invalid_argument("label propagation: class " + std::to_string(cls) +
                                        " has no labels");
    if (!prob.f0.empty()) {
        if (static_cast<int>(prob.f0.size()) != prob.n_classes)
            throw std::invalid_argument("label propagation: f0 must provide one vector per class");
        for (const auto& v : prob.f0)
            if (v.size() != m)
                throw std::invalid_argument("label propagation: f0 length does not match |X^k|");
    }
}

inline ProblemView make_view(const LabelProblem& prob) {
    ProblemView v;
    GenericPropagation g = generic_propagation(prob.op, prob.p);
    v.a_norm = std::move(g.normalized);
    v.K = g.K;
    Eigen::VectorXd dis = prob.op.D.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd sym = dis.asDiagonal() * prob.op.L * dis.asDiagonal();
    check_dense_size(sym.rows(), "label propagation");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    v.lambda_max = es.eigenvalues().maxCoeff();
    double denom = 2.0 * v.K + v.lambda_max - 2.0;
    if (denom > 1e-12) v.p_threshold = (v.lambda_max - 2.0) / denom;
    // convergence condition in product form; the ratio flips sign when the
    // denominator above is non-positive
    v.p_admissible = (1.0 - prob.p) * v.lambda_max < 2.0 * (prob.p * (v.K - 1.0) + 1.0);
    return v;
}

inline std::vector<int> labelled_for_class(const LabelProblem& prob, int cls) {
    std::vector<int> out;
    for (auto [idx, c] : prob.labels)
        if (std::abs(c) == cls) out.push_back(idx);
    std::sort(out.begin(), out.end());
    return out;
}

inline Eigen::VectorXd psi_for_class(const LabelProblem& prob, int cls) {
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(prob.complex->size(prob.k));
    for (auto [idx, c] : prob.labels) {
        if (c == cls) psi[idx] = 1.0;
        if (c == -cls) psi[idx] = -1.0;
    }
    return psi;
}

inline Eigen::VectorXd closed_form_class(const LabelProblem& prob, const ProblemView& view,
                                         int cls) {
    if (!view.p_admissible)
        throw std::runtime_error("closed_form_limit: p = " + std::to_string(prob.p) +
                                 " is at or below the convergence threshold");
    std::vector<int> labelled = labelled_for_class(prob, cls);
    int m = prob.complex->size(prob.k);
    std::vector<char> is_labelled(m, 0);
    for (int i : labelled) is_labelled[i] = 1;
    std::vector<int> unlabelled;
    for (int i = 0; i < m; ++i)
        if (!is_labelled[i]) unlabelled.push_back(i);
    if (!kernel_support_check(prob.op, unlabelled))
        throw std::runtime_error(
            "closed_form_limit: a kernel vector of L is supported on the unclassified set");

    Eigen::VectorXd psi = psi_for_class(prob, cls);
    Eigen::VectorXd full = psi;
    if (!unlabelled.empty()) {
        Eigen::MatrixXd a4(unlabelled.size(), unlabelled.size());
        Eigen::MatrixXd a3(unlabelled.size(), labelled.size());
        for (std::size_t r = 0; r < unlabelled.size(); ++r) {
            for (std::size_t cc = 0; cc < unlabelled.size(); ++cc)
                a4(r, cc) = view.a_norm(unlabelled[r], unlabelled[cc]);
            for (std::size_t cc = 0; cc < labelled.size(); ++cc)
                a3(r, cc) = view.a_norm(unlabelled[r], labelled[cc]);
        }
        Eigen::VectorXd psi_l(labelled.size());
        for (std::size_t i = 0; i < labelled.size(); ++i) psi_l[i] = psi[labelled[i]];

        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(a4.rows(), a4.cols()) - a4;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                              : std::numeric_limits<double>::infinity();
        if (!(cond <= 1e12))
            throw std::runtime_error("closed_form_limit: I - A4 is numerically singular "
                                     "(condition number " + std::to_string(cond) + ")");
        Eigen::VectorXd x = svd.solve(a3 * psi_l);
        for (std::size_t i = 0; i < unlabelled.size(); ++i) full[unlabelled[i]] = x[i];
    }
    return full;
}

inline Eigen::VectorXd iterate_class(const LabelProblem& prob, const ProblemView& view, int cls) {
    Eigen::VectorXd psi = psi_for_class(prob, cls);
    Eigen::VectorXd f =
        prob.f0.empty() ? psi : prob.f0[cls - 1];  // default: psi extended by zero
    auto clamp = [&](Eigen::VectorXd& v) {
        for (auto [idx, c] : prob.labels) {
            if (c == cls) v[idx] = 1.0;
            if (c == -cls) v[idx] = -1.0;
        }
    };
    clamp(f);
    for (int t = 0; t < prob.t_iters; ++t) {
        f = view.a_norm * f;
        clamp(f);
    }
    return f;
}

}  // namespace detail

/**
 * Closed-form limit of the multiply-then-clamp iteration, one cochain per
 * class: the unlabelled block solves (I - A4) x = A3 psi.  Both
 * preconditions — p above the spectral threshold and no kernel vector of L
 * supported on the unclassified set — are checked, not assumed.
 */
inline std::vector<Eigen::VectorXd> closed_form_limit(const LabelProblem& prob) {
    detail::validate_problem(prob);
    detail::ProblemView view = detail::make_view(prob);
    std::vector<Eigen::VectorXd> out;
    out.reserve(prob.n_classes);
    for (int cls = 1; cls <= prob.n_classes; ++cls)
        out.push_back(detail::closed_form_class(prob, view, cls));
    return out;
}

/**
 * Runs t_iters rounds of multiply-then-clamp per class (classes propagate
 * independently and in parallel), attaches closed-form limits where their
 * preconditions hold, and assigns each simplex the oriented class of largest
 * final confidence (ties to the smallest class index, exact zeros left
 * unlabelled).
 */
inline PropagationResult propagate(const LabelProblem& prob) {
    detail::validate_problem(prob);
    detail::ProblemView view = detail::make_view(prob);
    const SimplicialComplex& c = *prob.complex;
    int m = c.size(prob.k);

    PropagationResult res;
    res.K = view.K;
    res.lambda_max = view.lambda_max;
    res.p_threshold = view.p_threshold;
    res.f_final.assign(prob.n_classes, Eigen::VectorXd());
    res.f_limit.assign(prob.n_classes, std::nullopt);
    res.limit_status.assign(prob.n_classes, "");
    res.kernel_support_ok.assign(prob.n_classes, false);

    parallel_for(prob.n_classes, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t ci = lo; ci < hi; ++ci) {
            int cls = static_cast<int>(ci) + 1;
            std::vector<int> labelled = detail::labelled_for_class(prob, cls);
            std::vector<char> is_labelled(m, 0);
            for (int i : labelled) is_labelled[i] = 1;
            std::vector<int> unlabelled;
            for (int i = 0; i < m; ++i)
                if (!is_labelled[i]) unlabelled.push_back(i);
            res.kernel_support_ok[ci] = kernel_support_check(prob.op, unlabelled);
            res.f_final[ci] = detail::iterate_class(prob, view, cls);
            try {
                res.f_limit[ci] = detail::closed_form_class(prob, view, cls);
                res.limit_status[ci] = "ok";
            } catch (const std::exception& e) {
                // ill-conditioned or precondition failure: keep the iterate
                res.limit_status[ci] = e.what();
            }
        }
    });

    res.assigned.assign(m, 0);
    for (int i = 0; i < m; ++i) {
        int best = 0;
        double best_mag = 0.0;
        for (int cls = 1; cls <= prob.n_classes; ++cls) {
            double v = res.f_final[cls - 1][i];
            if (std::abs(v) > best_mag) {
                best_mag = std::abs(v);
                best = v > 0 ? cls : -cls;
            }
        }
        res.assigned[i] = best;  // zero confidence stays unlabelled
    }
    return res;
}

/// Per-edge rendering data: arrow direction (sign of the winning confidence),
/// class color index and magnitude.
struct FlowEdge {
    int edge = 0;
    int direction = 0;  // +1 along ascending vertex order, -1 against, 0 none
    int class_index = 0;
    double magnitude = 0.0;
};

/// Turns a propagation result into oriented arrows for rendering.  Requires
/// drawing coordinates for every vertex.
inline std::vector<FlowEdge> flow_field(const SimplicialComplex& c,
                                        const PropagationResult& res) {
    if (!c.has_coords_for_all_vertices())
        throw std::invalid_argument("flow_field: complex has no drawing coordinates");
    std::vector<FlowEdge> out;
    out.reserve(res.assigned.size());
    for (std::size_t i = 0; i < res.assigned.size(); ++i) {
        FlowEdge fe;
        fe.edge = static_cast<int>(i);
        int cls = res.assigned[i];
        if (cls != 0) {
            fe.direction = cls > 0 ? 1 : -1;
            fe.class_index = std::abs(cls);
            fe.magnitude = std::abs(res.f_final[std::abs(cls) - 1][i]);
        }
        out.push_back(fe);
    }
    return out;
}

}  // namespace hodgewalk
