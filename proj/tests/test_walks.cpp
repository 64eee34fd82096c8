#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support.hpp"

using namespace hodgewalk;
using hwtest::filled_triangle;
using hwtest::hollow_tetrahedron;

namespace {

// stochasticity check shared by every transition-matrix test
void require_stochastic(const TransitionMatrix& t) {
    const Eigen::MatrixXd& P = t.entries;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
        REQUIRE(std::abs(P.col(j).sum() - 1.0) <= 1e-12);
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            REQUIRE(P(i, j) >= 0.0);
            REQUIRE(P(i, j) <= 1.0);
        }
    }
    int theta = t.state_count() - 1;
    REQUIRE(P(theta, theta) == 1.0);
    REQUIRE(P.col(theta).sum() == 1.0);
}

void require_sign_symmetric(const TransitionMatrix& t) {
    int m = t.n_simplexes();
    const Eigen::MatrixXd& P = t.entries;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            REQUIRE(P(i, j) == P(m + i, m + j));
            REQUIRE(P(m + i, j) == P(i, m + j));
        }
}

double intertwining_gap(const SimplicialComplex& c, int k, const Eigen::MatrixXd& prop,
                        const TransitionMatrix& trans) {
    Eigen::MatrixXd t = Eigen::MatrixXd(transform_T(c, k));
    return (t * trans.entries - prop * t).cwiseAbs().maxCoeff();
}

OrientedSimplex plus(const SimplicialComplex& c, int k, int i) {
    return OrientedSimplex(c.simplex(k, i), 1);
}

}  // namespace

TEST_CASE("dirichlet transition probabilities on the filled triangle") {
    SimplicialComplex c = filled_triangle();
    TransitionMatrix t = dirichlet_transition_matrix(c, 1, 0.5);
    // basis [0,1], [0,2], [1,2]; M = 2, per-neighbor probability 1/4
    int e01 = 0, e02 = 1, e12 = 2, m = 3;
    REQUIRE(t.entries(e12, e01) == 0.25);      // similar pair
    REQUIRE(t.entries(m + e02, e01) == 0.25);  // dissimilar pair flips orientation
    REQUIRE(t.entries(e01, e01) == 0.5);
    REQUIRE(t.entries(2 * m, e01) == 0.0);  // two oriented neighbors exhaust the mass
    require_stochastic(t);
    require_sign_symmetric(t);
}

TEST_CASE("an isolated edge sends its free mass to the death state") {
    SimplicialComplex c = hwtest::triangle_plus_isolated_edge();
    TransitionMatrix t = dirichlet_transition_matrix(c, 1, 0.5);
    int m = c.size(1);
    auto idx = c.index_of({5, 6});
    REQUIRE(idx.has_value());
    REQUIRE(t.entries(2 * m, *idx) == 0.5);  // M = 2 from the triangle, no neighbors here
    require_stochastic(t);
}

TEST_CASE("dirichlet constructor validates its inputs") {
    SimplicialComplex c = filled_triangle();
    REQUIRE_THROWS_AS(dirichlet_transition_matrix(c, 1, 1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(dirichlet_transition_matrix(c, 1, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(dirichlet_transition_matrix(c, 0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(dirichlet_transition_matrix(c, 3, 0.5), std::invalid_argument);
    SimplicialComplex lonely = build_complex({{0, 1}});  // M = 1
    REQUIRE_THROWS_AS(dirichlet_transition_matrix(lonely, 1, 0.5), std::invalid_argument);
}

TEST_CASE("the transform collapses orientations and removes Theta") {
    SimplicialComplex c = filled_triangle();
    Eigen::MatrixXd t = Eigen::MatrixXd(transform_T(c, 1));
    int m = 3;
    Eigen::VectorXd theta_mass = Eigen::VectorXd::Zero(2 * m + 1);
    theta_mass[2 * m] = 1.0;
    REQUIRE((t * theta_mass).cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd plus_mass = Eigen::VectorXd::Zero(2 * m + 1);
    plus_mass[0] = 1.0;
    REQUIRE((t * plus_mass - Eigen::VectorXd::Unit(m, 0)).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd minus_mass = Eigen::VectorXd::Zero(2 * m + 1);
    minus_mass[m] = 1.0;
    REQUIRE((t * minus_mass + Eigen::VectorXd::Unit(m, 0)).cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(2 * m + 1, 1.0 / (2 * m));
    uniform[2 * m] = 0.0;
    REQUIRE((t * uniform).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("triangle propagation matrix in both forms") {
    SimplicialComplex c = filled_triangle();
    Eigen::MatrixXd b = dirichlet_propagation_matrix(c, 1, 0.5);
    Eigen::MatrixXd expected(3, 3);
    expected << 0.5, -0.25, 0.25, -0.25, 0.5, -0.25, 0.25, -0.25, 0.5;
    REQUIRE((b - expected).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd closed = dirichlet_propagation_matrix_closed_form(c, 1, 0.5);
    REQUIRE((closed - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("propagation matrix flattens to the identity as p approaches 1") {
    SimplicialComplex c = filled_triangle();
    double p = 0.999;
    Eigen::MatrixXd b = dirichlet_propagation_matrix(c, 1, p);
    // off-diagonal mass scales linearly with 1-p
    REQUIRE((b - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= (1.0 - p) * 2.0);
}

TEST_CASE("tetrahedron propagation matrix has the k=2 closed form") {
    SimplicialComplex c = hollow_tetrahedron();
    Eigen::MatrixXd b = dirichlet_propagation_matrix(c, 2, 0.5);
    Eigen::MatrixXd l2 = laplacian(c, 2, LaplacianPart::Down).dense();
    Eigen::MatrixXd expected =
        Eigen::MatrixXd::Identity(4, 4) - (1.0 / 6.0) * l2;  // M = 2, k+1 = 3
    REQUIRE((b - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("normalization factor and spectrum of the normalized matrix") {
    SimplicialComplex tri = filled_triangle();
    Eigen::MatrixXd b = dirichlet_propagation_matrix(tri, 1, 0.5);
    Eigen::MatrixXd bt = normalize_propagation(b, tri, 1, 0.5);
    REQUIRE((bt - b).cwiseAbs().maxCoeff() == 0.0);  // M = 2 leaves B unchanged

    SimplicialComplex two = hwtest::two_filled_triangles();
    REQUIRE(std::abs(dirichlet_normalization(two, 1, 0.5) - 4.0 / 3.0) < 1e-15);

    // eigenvalue-1 eigenspace of the normalized matrix is the cycle space
    Eigen::MatrixXd bt2 =
        normalize_propagation(dirichlet_propagation_matrix(two, 1, 0.5), two, 1, 0.5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bt2);
    int ones = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()[i] - 1.0) < 1e-10) ++ones;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(boundary_matrix(two, 1).dense());
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-8) ++rank;
    REQUIRE(ones == two.size(1) - rank);
}

TEST_CASE("generic framework on the triangle Laplacian halves") {
    SimplicialComplex c = filled_triangle();

    XkMatrix down(laplacian(c, 1, LaplacianPart::Down).dense());
    REQUIRE(down.K == 1.0);
    GenericWalk g = generic_framework(down, 0.5, 1);
    Eigen::MatrixXd b = dirichlet_propagation_matrix(c, 1, 0.5);
    REQUIRE((g.propagation - b).cwiseAbs().maxCoeff() < 1e-15);  // K = M-1 coincidence

    XkMatrix up(laplacian(c, 1, LaplacianPart::Up).dense());
    REQUIRE(up.K == 2.0);
    GenericWalk gu = generic_framework(up, 0.5, 1);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(3, 3) -
                               (1.0 / 3.0) * laplacian(c, 1, LaplacianPart::Up).dense();
    REQUIRE((gu.normalized - expected).cwiseAbs().maxCoeff() < 1e-15);

    REQUIRE_THROWS_AS(XkMatrix(3.0 * Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("XkMatrix validation") {
    Eigen::MatrixXd bad1(2, 2);
    bad1 << 1.0, 0.5, -0.5, 1.0;  // not symmetric
    REQUIRE_THROWS_AS(XkMatrix(bad1), std::invalid_argument);
    Eigen::MatrixXd bad2(2, 2);
    bad2 << -1.0, 0.5, 0.5, 1.0;  // negative diagonal
    REQUIRE_THROWS_AS(XkMatrix(bad2), std::invalid_argument);
    Eigen::MatrixXd bad3(2, 2);
    bad3 << 0.0, 0.5, 0.5, 1.0;  // zero diagonal with live row
    REQUIRE_THROWS_AS(XkMatrix(bad3), std::invalid_argument);
    REQUIRE_THROWS_AS(
        generic_propagation(
            XkMatrix(Eigen::MatrixXd::Identity(2, 2) + Eigen::MatrixXd::Ones(2, 2)), -0.1),
        std::invalid_argument);
}

TEST_CASE("p = 1 yields the identity propagation in the generic framework") {
    SimplicialComplex c = filled_triangle();
    XkMatrix down(laplacian(c, 1, LaplacianPart::Down).dense());
    GenericWalk g = generic_framework(down, 1.0, 1);
    REQUIRE((g.propagation - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    require_stochastic(g.transition);
}

TEST_CASE("neumann transition probabilities on the filled triangle") {
    SimplicialComplex c = filled_triangle();
    TransitionMatrix t = neumann_transition_matrix(c, 1, 0.5);
    int e01 = 0, e02 = 1, e12 = 2, m = 3;
    // [0,1] and [0,2] both induce -1 on vertex 0: coneighbors
    REQUIRE(t.entries(e02, e01) == 0.25);  // (1-p)/((k+1) deg) = 0.5/2
    REQUIRE(t.entries(m + e12, e01) == 0.25);
    REQUIRE(t.entries(e01, e01) == 0.5);
    REQUIRE(t.entries(2 * m, e01) == 0.0);  // exactly two coneighbors, no death mass
    require_stochastic(t);
    require_sign_symmetric(t);
    REQUIRE_THROWS_AS(neumann_transition_matrix(c, 2, 0.5), std::invalid_argument);
}

TEST_CASE("neumann walk: cofaceless simplexes die at rate 1-p") {
    SimplicialComplex c = hwtest::triangle_plus_isolated_edge();
    TransitionMatrix t = neumann_transition_matrix(c, 1, 0.5);
    int m = c.size(1);
    auto idx = c.index_of({5, 6});
    REQUIRE(t.entries(*idx, *idx) == 0.5);
    REQUIRE(t.entries(2 * m, *idx) == 0.5);
    require_stochastic(t);
}

TEST_CASE("neumann propagation equals per-coneighbor enumeration") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        SimplicialComplex c = hwtest::random_complex(rng);
        if (c.dimension() < 2) continue;
        for (int k = 1; k <= c.dimension() - 1; ++k) {
            double p = 0.3;
            Eigen::MatrixXd a = neumann_propagation_matrix(c, k, p);
            Eigen::MatrixXd up = laplacian(c, k, LaplacianPart::Up).dense();
            int m = c.size(k);
            for (int col = 0; col < m; ++col) {
                int deg = static_cast<int>(c.cofaces(k, col).size());
                for (int row = 0; row < m; ++row) {
                    double expected;
                    if (row == col) {
                        expected = deg > 0 ? p : (p * k + 1.0) / (k + 1.0);
                    } else if (deg == 0) {
                        expected = 0.0;
                    } else {
                        expected = -(1.0 - p) * up(row, col) / ((k + 1.0) * deg);
                    }
                    REQUIRE(std::abs(a(row, col) - expected) < 1e-14);
                }
            }
        }
    }
}

TEST_CASE("evolution traces") {
    SimplicialComplex c = filled_triangle();
    Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0);

    WalkEvolution constant = evolve(Eigen::MatrixXd::Identity(3, 3), Cochain(1, e0), 5);
    REQUIRE(constant.trace.size() == 6);
    for (const auto& step : constant.trace)
        REQUIRE((step.values - e0).cwiseAbs().maxCoeff() == 0.0);

    WalkEvolution ev = dirichlet_walk_evolution(c, 1, 0.5, plus(c, 1, 0), 1);
    REQUIRE(ev.trace.size() == 2);
    REQUIRE(std::abs(ev.trace[1].values[0] - 0.5) < 1e-15);
    REQUIRE(std::abs(ev.trace[1].values[1] + 0.25) < 1e-15);
    REQUIRE(std::abs(ev.trace[1].values[2] - 0.25) < 1e-15);

    WalkEvolution lim = dirichlet_walk_evolution(c, 1, 0.5, plus(c, 1, 0), 60);
    Eigen::VectorXd expected(3);
    expected << 1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0;
    REQUIRE((lim.trace.back().values - expected).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((lim.limit->values - expected).cwiseAbs().maxCoeff() < 1e-12);

    REQUIRE_THROWS_AS(
        evolve(Eigen::MatrixXd::Identity(3, 3), Cochain(1, Eigen::VectorXd::Zero(2)), 1),
        std::invalid_argument);
}

TEST_CASE("closed-form walk limits") {
    SimplicialComplex tri = filled_triangle();
    Cochain lim = marginal_difference_limit(tri, 1, 0.5, plus(tri, 1, 0));
    REQUIRE(std::abs(lim.values[0] - 1.0 / 3.0) < 1e-12);
    REQUIRE(std::abs(lim.values[1] + 1.0 / 3.0) < 1e-12);
    REQUIRE(std::abs(lim.values[2] - 1.0 / 3.0) < 1e-12);
    // norm consistent with the coface growth floor at k = 1
    REQUIRE(std::abs(lim.values.norm() - 1.0 / std::sqrt(3.0)) < 1e-12);

    // negative start orientation negates the limit
    Cochain neg = marginal_difference_limit(tri, 1, 0.5, -plus(tri, 1, 0));
    REQUIRE((neg.values + lim.values).cwiseAbs().maxCoeff() == 0.0);

    SimplicialComplex iso = hwtest::triangle_plus_isolated_edge();
    auto idx = iso.index_of({5, 6});
    Cochain zero =
        marginal_difference_limit(iso, 1, 0.5, OrientedSimplex(iso.simplex(1, *idx), 1));
    REQUIRE(zero.values.cwiseAbs().maxCoeff() < 1e-12);

    SimplicialComplex tet = hollow_tetrahedron();
    Cochain h = marginal_difference_limit(tet, 2, 0.5, plus(tet, 2, 0));
    REQUIRE(h.values.cwiseAbs().maxCoeff() > 1e-3);
    Eigen::MatrixXd l2 = laplacian(tet, 2, LaplacianPart::Full).dense();
    REQUIRE((l2 * h.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the limit refuses to exist at the divergent boundary") {
    // even cycle at p = 0: the normalized spectrum touches -1
    SimplicialComplex c = hwtest::four_cycle();
    REQUIRE_THROWS_WITH(marginal_difference_limit(c, 1, 0.0, plus(c, 1, 0)),
                        Catch::Matchers::ContainsSubstring("-1"));
    // the odd cycle is safe even at p = 0
    SimplicialComplex odd = hwtest::three_cycle();
    REQUIRE_NOTHROW(marginal_difference_limit(odd, 1, 0.0, plus(odd, 1, 0)));
}

TEST_CASE("homology rank from walks matches betti numbers") {
    REQUIRE(homology_rank_from_walks(hollow_tetrahedron(), 2, 0.5) == 1);
    REQUIRE(homology_rank_from_walks(filled_triangle(), 1, 0.5) == 0);
    REQUIRE(homology_rank_from_walks(hwtest::three_cycle(), 1, 0.5) == 1);
    REQUIRE(homology_rank_from_walks(hwtest::wedge_of_two_hollow_triangles(), 1, 0.5) == 2);
    SimplicialComplex two = hwtest::two_filled_triangles();
    REQUIRE(homology_rank_from_walks(two, 1, 0.5) == 0);
    REQUIRE(homology_rank_from_walks(two, 2, 0.5) == 0);
}

TEST_CASE("convergence rate on the triangle is exactly 1/4") {
    SimplicialComplex c = filled_triangle();
    RateCheck r = convergence_rate_check(c, 1, 0.5, plus(c, 1, 0), 18);
    REQUIRE(std::abs(r.predicted - 0.25) < 1e-12);
    REQUIRE(std::abs(r.fitted - 0.25) < 1e-6);
    REQUIRE(!r.exact_at_start);
    REQUIRE_THROWS_AS(convergence_rate_check(c, 1, 0.3, plus(c, 1, 0), 10),
                      std::invalid_argument);
}

TEST_CASE("convergence rate on the tetrahedron uses the deflated eigenvalue") {
    SimplicialComplex c = hollow_tetrahedron();
    double l2 = lambda_k(c, 2);
    RateCheck r = convergence_rate_check(c, 2, 0.5, plus(c, 2, 0), 30);
    REQUIRE(std::abs(r.predicted - (1.0 - 0.5 * l2 / 3.0)) < 1e-12);
    REQUIRE(r.fitted <= r.predicted + 1e-6);
}

TEST_CASE("fitted rates never exceed the prediction") {
    std::mt19937_64 rng(59);
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        SimplicialComplex c = hwtest::random_complex(rng);
        for (int k = 1; k <= c.dimension(); ++k) {
            if (max_face_degree(c, k) < 2) continue;
            RateCheck r = convergence_rate_check(c, k, 0.9, plus(c, k, 0), 40);
            REQUIRE(r.fitted <= r.predicted + 1e-6);
            ++checked;
        }
    }
    REQUIRE(checked > 5);
}

TEST_CASE("intertwining, stochasticity and spectral envelopes on random complexes") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    int tested = 0;
    for (int trial = 0; trial < 15; ++trial) {
        SimplicialComplex c = hwtest::random_complex(rng);
        for (int k = 1; k <= c.dimension(); ++k) {
            bool dirichlet_ok = max_face_degree(c, k) >= 2;
            for (double p : {0.0, 0.3, 0.5, 0.9}) {
                if (dirichlet_ok) {
                    TransitionMatrix t = dirichlet_transition_matrix(c, k, p);
                    Eigen::MatrixXd b = dirichlet_propagation_matrix(c, k, p);
                    REQUIRE(intertwining_gap(c, k, b, t) <= 1e-12);
                    require_stochastic(t);
                    require_sign_symmetric(t);

                    // spectrum of B inside [2p-1, (p(M-2)+1)/(M-1)]
                    int m_deg = max_face_degree(c, k);
                    double hi = (p * (m_deg - 2) + 1.0) / (m_deg - 1);
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
                    REQUIRE(es.eigenvalues().minCoeff() >= 2.0 * p - 1.0 - 1e-12);
                    REQUIRE(es.eigenvalues().maxCoeff() <= hi + 1e-12);
                    ++tested;
                }
                // generic route for each Laplacian flavor plus a weighted one
                std::vector<Eigen::MatrixXd> ls;
                ls.push_back(laplacian(c, k, LaplacianPart::Down).dense());
                if (k <= c.dimension() - 1)
                    ls.push_back(laplacian(c, k, LaplacianPart::Up).dense());
                ls.push_back(laplacian(c, k, LaplacianPart::Full).dense());
                {
                    Eigen::VectorXd wkm1 =
                        Eigen::VectorXd::NullaryExpr(c.size(k - 1), [&] { return weight(rng); });
                    Eigen::VectorXd wk =
                        Eigen::VectorXd::NullaryExpr(c.size(k), [&] { return weight(rng); });
                    Eigen::VectorXd wkp1 =
                        Eigen::VectorXd::NullaryExpr(c.size(k + 1), [&] { return weight(rng); });
                    ls.push_back(weighted_laplacian(c, k, wkm1, wk, wkp1).dense());
                }
                for (const auto& lmat : ls) {
                    try {
                        XkMatrix xk(lmat);
                        GenericWalk g = generic_framework(xk, p, k);
                        REQUIRE(intertwining_gap(c, k, g.propagation, g.transition) <= 1e-12);
                        require_stochastic(g.transition);
                        require_sign_symmetric(g.transition);
                        ++tested;
                    } catch (const std::invalid_argument&) {
                        // degenerate K = 0 happens for adjacency-free levels; skip
                    }
                }
            }
        }
    }
    REQUIRE(tested > 50);
}

TEST_CASE("closed form agrees with the case table on random complexes") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 15; ++trial) {
        SimplicialComplex c = hwtest::random_complex(rng);
        for (int k = 1; k <= c.dimension(); ++k) {
            if (max_face_degree(c, k) < 2) continue;
            for (double p : {0.0, 0.3, 0.5, 0.9}) {
                Eigen::MatrixXd a = dirichlet_propagation_matrix(c, k, p);
                Eigen::MatrixXd b = dirichlet_propagation_matrix_closed_form(c, k, p);
                REQUIRE((a - b).cwiseAbs().maxCoeff() <= 1e-13);
            }
        }
    }
}

TEST_CASE("marginal decay bound and coface growth floor") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        SimplicialComplex c = hwtest::random_complex(rng);
        for (int k = 1; k <= c.dimension(); ++k) {
            int m_deg = max_face_degree(c, k);
            if (m_deg < 2) continue;
            for (double p : {0.3, 0.5, 0.9}) {
                Eigen::MatrixXd b = dirichlet_propagation_matrix(c, k, p);
                double hi = (p * (m_deg - 2) + 1.0) / (m_deg - 1);
                double bound = std::max(std::abs(2.0 * p - 1.0), hi);
                Eigen::VectorXd v = Eigen::VectorXd::Unit(c.size(k), 0);
                bool has_coface = !c.cofaces(k, 0).empty();
                double scale = 1.0;
                for (int n = 1; n <= 12; ++n) {
                    v = b * v;
                    scale *= bound;
                    REQUIRE(v.norm() <= scale + 1e-12);
                    if (has_coface) {
                        double floor = std::pow(hi, n) / std::sqrt(k + 2.0);
                        REQUIRE(v.norm() >= floor * (1.0 - 1e-10) - 1e-15);
                    }
                }
            }
        }
    }
}

TEST_CASE("normalized generic spectrum and limits for constant-diagonal operators") {
    std::mt19937_64 rng(73);
    int tested = 0;
    for (int trial = 0; trial < 12; ++trial) {
        SimplicialComplex c = hwtest::random_complex(rng);
        for (int k = 1; k <= c.dimension(); ++k) {
            Eigen::MatrixXd lmat = laplacian(c, k, LaplacianPart::Down).dense();
            if (lmat.rows() < 2) continue;
            XkMatrix xk(lmat);  // constant diagonal k+1, never degenerate
            Eigen::VectorXd dis = xk.D.cwiseSqrt().cwiseInverse();
            Eigen::MatrixXd sym = dis.asDiagonal() * lmat * dis.asDiagonal();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
            double big = es.eigenvalues().maxCoeff();
            double p = big <= 1.0 ? 0.5 : (big - 1.0) / (xk.K + big - 1.0) + 0.01;
            if (p >= 1.0) continue;
            GenericWalk g = generic_framework(xk, p, k);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esn(g.normalized);
            REQUIRE(esn.eigenvalues().minCoeff() >= -1e-10);
            REQUIRE(esn.eigenvalues().maxCoeff() <= 1.0 + 1e-10);

            // iterated limit is the orthogonal projection onto ker L
            Eigen::VectorXd nu(c.size(k));
            for (int i = 0; i < nu.size(); ++i)
                nu[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
            Eigen::MatrixXd kerL = hodgewalk::detail::kernel_of_symmetric(lmat);
            Eigen::VectorXd proj = kerL * (kerL.transpose() * nu);
            Eigen::VectorXd v = nu;
            for (int n = 0; n < 4000; ++n) {
                v = g.normalized * v;
                if ((v - proj).norm() < 1e-11) break;
            }
            REQUIRE((v - proj).norm() < 1e-8);
            ++tested;
        }
    }
    REQUIRE(tested > 5);
}

TEST_CASE("dirichlet and generic walks coincide when K = M-1") {
    // every vertex of the triangle has the maximum degree, so K = M-1 exactly
    SimplicialComplex c = filled_triangle();
    for (double p : {0.0, 0.3, 0.5, 0.9}) {
        XkMatrix down(laplacian(c, 1, LaplacianPart::Down).dense());
        GenericWalk g = generic_framework(down, p, 1);
        Eigen::MatrixXd b = dirichlet_propagation_matrix(c, 1, p);
        REQUIRE((g.propagation - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // the strip has interior triangles whose edges all reach degree M = 2
    SimplicialComplex strip = hwtest::triangle_strip();
    XkMatrix down2(laplacian(strip, 2, LaplacianPart::Down).dense());
    GenericWalk g2 = generic_framework(down2, 0.5, 2);
    Eigen::MatrixXd b2 = dirichlet_propagation_matrix(strip, 2, 0.5);
    REQUIRE((g2.propagation - b2).cwiseAbs().maxCoeff() <= 1e-12);
}
