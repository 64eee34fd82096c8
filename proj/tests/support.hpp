#pragma once

// Shared test utilities: seeded random complex generation and small fixture
// complexes used across the suites.

#include <random>
#include <set>
#include <vector>

#include "hodgewalk/hodgewalk.hpp"

namespace hwtest {

using hodgewalk::SimplicialComplex;
using hodgewalk::build_complex;

inline SimplicialComplex filled_triangle() { return build_complex({{0, 1, 2}}); }

inline SimplicialComplex hollow_tetrahedron() {
    return build_complex({{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
}

inline SimplicialComplex three_cycle() { return build_complex({{0, 1}, {1, 2}, {0, 2}}); }

inline SimplicialComplex four_cycle() {
    return build_complex({{0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

inline SimplicialComplex two_filled_triangles() { return build_complex({{0, 1, 2}, {1, 2, 3}}); }

inline SimplicialComplex triangle_plus_isolated_edge() {
    return build_complex({{0, 1, 2}, {5, 6}});
}

inline SimplicialComplex wedge_of_two_hollow_triangles() {
    return build_complex({{0, 1}, {1, 2}, {0, 2}, {0, 3}, {3, 4}, {0, 4}});
}

inline SimplicialComplex triangle_strip(int n_triangles = 6) {
    std::vector<std::vector<int>> tris;
    for (int i = 0; i < n_triangles; ++i) tris.push_back({i, i + 1, i + 2});
    return build_complex(tris);
}

/// Random small complex: at most `max_total` simplexes after closure,
/// dimension between 1 and 3.  Deterministic for a seeded engine.
inline SimplicialComplex random_complex(std::mt19937_64& rng, int max_total = 30) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        int n_vertices = 3 + static_cast<int>(rng() % 6);  // 3..8
        int n_maximal = 1 + static_cast<int>(rng() % 5);   // 1..5
        std::vector<std::vector<int>> maximal;
        for (int s = 0; s < n_maximal; ++s) {
            int card = 2 + static_cast<int>(rng() % 3);  // 2..4 vertices (dim 1..3)
            card = std::min(card, n_vertices);
            std::set<int> verts;
            while (static_cast<int>(verts.size()) < card)
                verts.insert(static_cast<int>(rng() % n_vertices));
            maximal.emplace_back(verts.begin(), verts.end());
        }
        SimplicialComplex c = build_complex(maximal);
        if (c.total_size() <= max_total && c.dimension() >= 1) return c;
    }
    return filled_triangle();
}

}  // namespace hwtest
