#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace hodgewalk {

/// A simplex is stored in canonical form: a strictly ascending tuple of
/// non-negative vertex labels.
using Simplex = std::vector<int>;

/// Relation between two oriented simplexes of the same dimension.
/// SimilarLower: share a face and induce opposite orientations on it.
/// DissimilarLower: share a face and induce the same orientation on it.
enum class AdjacencyKind { SimilarLower, DissimilarLower, NotLowerAdjacent };

namespace detail {

inline std::string simplex_str(const Simplex& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ' ';
        os << s[i];
    }
    os << ']';
    return os.str();
}

// Canonicalizes an arbitrary vertex list; throws on duplicates/negatives.
inline Simplex canonical_simplex(std::vector<int> v, const char* who) {
    if (v.empty()) throw std::invalid_argument(std::string(who) + ": empty vertex set");
    for (int x : v)
        if (x < 0) throw std::invalid_argument(std::string(who) + ": negative vertex label");
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
        throw std::invalid_argument(std::string(who) + ": repeated vertex in " + simplex_str(v));
    return v;
}

}  // namespace detail

/**
 * An orientation of a simplex: the canonical ascending tuple together with a
 * sign.  The positive orientation of every simplex is fixed globally as the
 * ascending vertex order, so cochain bases are reproducible across runs.
 */
struct OrientedSimplex {
    Simplex vertices;  // canonical ascending
    int sign = 1;

    OrientedSimplex() = default;
    OrientedSimplex(Simplex v, int s) : vertices(std::move(v)), sign(s >= 0 ? 1 : -1) {
        if (vertices.empty()) throw std::invalid_argument("oriented simplex: empty vertex set");
        if (!std::is_sorted(vertices.begin(), vertices.end()) ||
            std::adjacent_find(vertices.begin(), vertices.end()) != vertices.end())
            throw std::invalid_argument("oriented simplex: tuple not strictly ascending");
    }

    /// Builds an oriented simplex from an arbitrary vertex ordering; the sign
    /// is the parity of the permutation that sorts the ordering.
    static OrientedSimplex from_ordering(const std::vector<int>& ordered) {
        Simplex v = ordered;
        if (v.empty()) throw std::invalid_argument("oriented simplex: empty vertex set");
        int sign = 1;
        // insertion sort, counting transpositions
        for (std::size_t i = 1; i < v.size(); ++i) {
            int x = v[i];
            std::size_t j = i;
            while (j > 0 && v[j - 1] > x) {
                v[j] = v[j - 1];
                --j;
                sign = -sign;
            }
            v[j] = x;
        }
        if (std::adjacent_find(v.begin(), v.end()) != v.end())
            throw std::invalid_argument("oriented simplex: repeated vertex");
        return OrientedSimplex(std::move(v), sign);
    }

    int dim() const { return static_cast<int>(vertices.size()) - 1; }
    OrientedSimplex operator-() const { return OrientedSimplex(vertices, -sign); }
    bool operator==(const OrientedSimplex& o) const = default;
};

/**
 * Finite abstract simplicial complex: closed under inclusion, immutable after
 * construction, safe for concurrent reads.  Simplexes within each dimension
 * are kept in lexicographic order of their ascending vertex tuples; that order
 * is the basis order of every cochain and matrix built on top of the complex.
 */
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    int dimension() const { return static_cast<int>(simplexes_.size()) - 1; }

    /// |X^j|; zero for j outside [0, dimension].
    int size(int j) const {
        if (j < 0 || j > dimension()) return 0;
        return static_cast<int>(simplexes_[j].size());
    }

    int total_size() const {
        int n = 0;
        for (const auto& level : simplexes_) n += static_cast<int>(level.size());
        return n;
    }

    const std::vector<Simplex>& simplexes(int j) const {
        check_dim(j);
        return simplexes_[j];
    }

    const Simplex& simplex(int j, int i) const {
        check_dim(j);
        return simplexes_[j].at(i);
    }

    bool contains(const Simplex& s) const { return index_of(s).has_value(); }

    /// Index of a canonical simplex within its dimension, if present.
    std::optional<int> index_of(const Simplex& s) const {
        int j = static_cast<int>(s.size()) - 1;
        if (j < 0 || j > dimension()) return std::nullopt;
        auto it = index_[j].find(s);
        if (it == index_[j].end()) return std::nullopt;
        return it->second;
    }

    /// Faces of the i-th j-simplex, ordered by omitted vertex position:
    /// faces(j,i)[t] omits the vertex at position t of the ascending tuple.
    const std::vector<int>& faces(int j, int i) const {
        check_dim(j);
        return faces_[j].at(i);
    }

    const std::vector<int>& cofaces(int j, int i) const {
        check_dim(j);
        return cofaces_[j].at(i);
    }

    const std::vector<int>& vertices() const { return vertex_labels_; }

    const std::map<int, std::pair<double, double>>& coords() const { return coords_; }
    bool has_coords_for_all_vertices() const {
        for (int v : vertex_labels_)
            if (!coords_.count(v)) return false;
        return !vertex_labels_.empty();
    }

    bool operator==(const SimplicialComplex& o) const {
        return simplexes_ == o.simplexes_ && coords_ == o.coords_;
    }

private:
    friend SimplicialComplex build_complex(const std::vector<std::vector<int>>&,
                                           std::map<int, std::pair<double, double>>);

    void check_dim(int j) const {
        if (j < 0 || j > dimension())
            throw std::invalid_argument("dimension " + std::to_string(j) +
                                        " out of range for complex of dimension " +
                                        std::to_string(dimension()));
    }

    std::vector<int> vertex_labels_;                       // sorted; position = dense index
    std::vector<std::vector<Simplex>> simplexes_;          // [j] -> lex-ordered tuples
    std::vector<std::map<Simplex, int>> index_;            // [j] -> tuple -> index
    std::vector<std::vector<std::vector<int>>> faces_;     // [j][i] -> face indices
    std::vector<std::vector<std::vector<int>>> cofaces_;   // [j][i] -> coface indices
    std::map<int, std::pair<double, double>> coords_;      // vertex -> (x, y), optional
};

/**
 * Builds the inclusion-closure of the given vertex sets.  The input sets need
 * not be maximal or sorted; each must be nonempty with distinct non-negative
 * labels.  Optional 2-D coordinates (keyed by vertex label) are only used for
 * SVG rendering and must not mention unknown vertices.
 */
inline SimplicialComplex build_complex(const std::vector<std::vector<int>>& maximal_simplexes,
                                       std::map<int, std::pair<double, double>> coords = {}) {
    if (maximal_simplexes.empty())
        throw std::invalid_argument("build_complex: empty input list");

    std::vector<std::set<Simplex>> levels;
    for (const auto& raw : maximal_simplexes) {
        Simplex s = detail::canonical_simplex(raw, "build_complex");
        if (s.size() > 25)
            throw std::invalid_argument("build_complex: simplex with more than 25 vertices");
        int n = static_cast<int>(s.size());
        if (static_cast<int>(levels.size()) < n) levels.resize(n);
        // every nonempty subset, by bitmask
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            Simplex sub;
            for (int b = 0; b < n; ++b)
                if (mask & (1u << b)) sub.push_back(s[b]);
            levels[sub.size() - 1].insert(std::move(sub));
        }
    }
    while (!levels.empty() && levels.back().empty()) levels.pop_back();

    SimplicialComplex c;
    int dim = static_cast<int>(levels.size()) - 1;
    c.simplexes_.resize(dim + 1);
    c.index_.resize(dim + 1);
    c.faces_.resize(dim + 1);
    c.cofaces_.resize(dim + 1);
    for (int j = 0; j <= dim; ++j) {
        c.simplexes_[j].assign(levels[j].begin(), levels[j].end());
        for (int i = 0; i < static_cast<int>(c.simplexes_[j].size()); ++i)
            c.index_[j][c.simplexes_[j][i]] = i;
        c.faces_[j].resize(c.simplexes_[j].size());
        c.cofaces_[j].resize(c.simplexes_[j].size());
    }
    for (const Simplex& s : c.simplexes_[0]) c.vertex_labels_.push_back(s[0]);

    for (int j = 1; j <= dim; ++j) {
        for (int i = 0; i < static_cast<int>(c.simplexes_[j].size()); ++i) {
            const Simplex& s = c.simplexes_[j][i];
            auto& f = c.faces_[j][i];
            f.reserve(s.size());
            for (std::size_t omit = 0; omit < s.size(); ++omit) {
                Simplex face;
                face.reserve(s.size() - 1);
                for (std::size_t t = 0; t < s.size(); ++t)
                    if (t != omit) face.push_back(s[t]);
                int fi = c.index_[j - 1].at(face);
                f.push_back(fi);
                c.cofaces_[j - 1][fi].push_back(i);
            }
        }
    }

    for (const auto& [v, xy] : coords) {
        if (!c.index_[0].count(Simplex{v}))
            throw std::invalid_argument("build_complex: coordinates for unknown vertex " +
                                        std::to_string(v));
    }
    c.coords_ = std::move(coords);
    return c;
}

/// Number of cofaces of sigma.  sigma must belong to the complex.
inline int degree(const SimplicialComplex& c, const Simplex& sigma) {
    Simplex s = detail::canonical_simplex(sigma, "degree");
    auto idx = c.index_of(s);
    if (!idx) throw std::invalid_argument("degree: simplex " + detail::simplex_str(s) +
                                          " not in complex");
    int j = static_cast<int>(s.size()) - 1;
    return static_cast<int>(c.cofaces(j, *idx).size());
}

/// M = max degree over (k-1)-simplexes; the branching number of the k-walk.
inline int max_face_degree(const SimplicialComplex& c, int k) {
    if (k < 1 || k > c.dimension())
        throw std::invalid_argument("max_face_degree: k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c.dimension()) + "]");
    int m = 0;
    for (int i = 0; i < c.size(k - 1); ++i)
        m = std::max(m, static_cast<int>(c.cofaces(k - 1, i).size()));
    return m;
}

/**
 * Sign of the orientation induced by sigma on one of its codimension-1 faces:
 * (-1)^i for the face omitting position i of the ascending tuple, composed
 * with sigma's own sign.
 */
inline int induced_orientation_sign(const OrientedSimplex& sigma, const Simplex& face) {
    const Simplex& s = sigma.vertices;
    if (face.size() + 1 != s.size())
        throw std::invalid_argument("induced_orientation_sign: not a codimension-1 face");
    int omitted = -1;
    std::size_t fi = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (fi < face.size() && face[fi] == s[t]) {
            ++fi;
        } else if (omitted < 0) {
            omitted = static_cast<int>(t);
        } else {
            omitted = -2;
            break;
        }
    }
    if (omitted < 0 || fi != face.size())
        throw std::invalid_argument("induced_orientation_sign: " + detail::simplex_str(face) +
                                    " is not a face of " + detail::simplex_str(s));
    return ((omitted % 2 == 0) ? 1 : -1) * sigma.sign;
}

/**
 * Classifies two distinct oriented simplexes of equal dimension.  They are
 * lower adjacent when they share a codimension-1 face (necessarily unique);
 * similar when they induce opposite orientations on it.
 */
inline AdjacencyKind lower_adjacency(const OrientedSimplex& a, const OrientedSimplex& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("lower_adjacency: dimension mismatch");
    if (a.vertices == b.vertices)
        throw std::invalid_argument("lower_adjacency: identical underlying simplexes");
    if (a.dim() < 1) return AdjacencyKind::NotLowerAdjacent;

    Simplex common;
    std::set_intersection(a.vertices.begin(), a.vertices.end(), b.vertices.begin(),
                          b.vertices.end(), std::back_inserter(common));
    if (common.size() != a.vertices.size() - 1) return AdjacencyKind::NotLowerAdjacent;

    int sa = induced_orientation_sign(a, common);
    int sb = induced_orientation_sign(b, common);
    return sa * sb < 0 ? AdjacencyKind::SimilarLower : AdjacencyKind::DissimilarLower;
}

/// One equivalence class of k-simplexes under lower adjacency, together with
/// the subcomplex it induces (the closure of its members).
struct KComponent {
    std::vector<int> simplices;  // indices into X^k, ascending
    SimplicialComplex subcomplex;
};

inline std::vector<KComponent> k_connected_components(const SimplicialComplex& c, int k) {
    if (k < 1 || k > c.dimension())
        throw std::invalid_argument("k_connected_components: k = " + std::to_string(k) +
                                    " out of range [1, " + std::to_string(c.dimension()) + "]");
    int n = c.size(k);
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    // every (k-1)-simplex glues its cofaces into one class
    for (int f = 0; f < c.size(k - 1); ++f) {
        const auto& up = c.cofaces(k - 1, f);
        for (std::size_t t = 1; t < up.size(); ++t) {
            int a = find(up[0]), b = find(up[t]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::map<int, std::vector<int>> classes;
    for (int i = 0; i < n; ++i) classes[find(i)].push_back(i);

    std::vector<KComponent> out;
    out.reserve(classes.size());
    for (auto& [root, members] : classes) {
        KComponent comp;
        comp.simplices = std::move(members);
        std::vector<std::vector<int>> gens;
        gens.reserve(comp.simplices.size());
        for (int i : comp.simplices) gens.push_back(c.simplex(k, i));
        std::map<int, std::pair<double, double>> sub_coords;
        for (const auto& g : gens)
            for (int v : g) {
                auto it = c.coords().find(v);
                if (it != c.coords().end()) sub_coords[v] = it->second;
            }
        comp.subcomplex = build_complex(gens, std::move(sub_coords));
        out.push_back(std::move(comp));
    }
    return out;
}

namespace detail {

// Lower-adjacent pairs within a set of k-simplexes, each pair once, with the
// relation of their canonical (positive) orientations.
inline std::vector<std::tuple<int, int, AdjacencyKind>> lower_adjacent_pairs(
    const SimplicialComplex& c, int k, const std::vector<int>& members) {
    std::vector<char> in_set(c.size(k), 0);
    for (int i : members) in_set.at(i) = 1;
    std::vector<std::tuple<int, int, AdjacencyKind>> pairs;
    for (int f = 0; f < c.size(k - 1); ++f) {
        const auto& up = c.cofaces(k - 1, f);
        for (std::size_t a = 0; a < up.size(); ++a) {
            if (!in_set[up[a]]) continue;
            for (std::size_t b = a + 1; b < up.size(); ++b) {
                if (!in_set[up[b]]) continue;
                // slot parity of the shared face inside each coface
                const auto& fa = c.faces(k, up[a]);
                const auto& fb = c.faces(k, up[b]);
                int ta = static_cast<int>(std::find(fa.begin(), fa.end(), f) - fa.begin());
                int tb = static_cast<int>(std::find(fb.begin(), fb.end(), f) - fb.begin());
                AdjacencyKind rel = ((ta + tb) % 2 != 0) ? AdjacencyKind::SimilarLower
                                                         : AdjacencyKind::DissimilarLower;
                pairs.emplace_back(up[a], up[b], rel);
            }
        }
    }
    return pairs;
}

}  // namespace detail

/**
 * Searches for a sign assignment on one d-connected component that makes every
 * lower-adjacent pair dissimilarly oriented (2-coloring of the sign graph).
 * Returns the signs aligned with the component's ascending member order, or
 * nullopt when no such assignment exists.  Any assignment found is re-checked
 * pairwise before it is returned.
 */
inline std::optional<std::vector<int>> disorientation(const SimplicialComplex& c,
                                                      const std::vector<int>& component) {
    int d = c.dimension();
    if (d < 1) throw std::invalid_argument("disorientation: complex has no positive dimension");
    std::vector<int> sorted = component;
    std::sort(sorted.begin(), sorted.end());
    auto parts = k_connected_components(c, d);
    const KComponent* match = nullptr;
    for (const auto& p : parts)
        if (p.simplices == sorted) match = &p;
    if (!match)
        throw std::invalid_argument("disorientation: input is not a single d-connected component");

    std::map<int, int> pos;
    for (std::size_t i = 0; i < sorted.size(); ++i) pos[sorted[i]] = static_cast<int>(i);
    auto pairs = detail::lower_adjacent_pairs(c, d, sorted);

    std::vector<std::vector<std::pair<int, int>>> graph(sorted.size());
    for (auto& [a, b, rel] : pairs) {
        int want = rel == AdjacencyKind::DissimilarLower ? 1 : -1;  // sign product
        graph[pos[a]].push_back({pos[b], want});
        graph[pos[b]].push_back({pos[a], want});
    }
    std::vector<int> sign(sorted.size(), 0);
    std::queue<int> bfs;
    sign[0] = 1;
    bfs.push(0);
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        for (auto [v, want] : graph[u]) {
            int need = sign[u] * want;
            if (sign[v] == 0) {
                sign[v] = need;
                bfs.push(v);
            } else if (sign[v] != need) {
                return std::nullopt;  // odd cycle in the sign graph
            }
        }
    }
    // full pairwise dissimilarity re-check with the signs applied
    for (auto& [a, b, rel] : pairs) {
        int product = sign[pos[a]] * sign[pos[b]];
        AdjacencyKind flipped =
            product > 0 ? rel
                        : (rel == AdjacencyKind::SimilarLower ? AdjacencyKind::DissimilarLower
                                                              : AdjacencyKind::SimilarLower);
        if (flipped != AdjacencyKind::DissimilarLower) return std::nullopt;
    }
    return sign;
}

/// A complex is disorientable when every top-dimensional component admits a
/// disorientation.
inline bool disorientable(const SimplicialComplex& c) {
    if (c.dimension() < 1) return false;
    for (const auto& comp : k_connected_components(c, c.dimension()))
        if (!disorientation(c, comp.simplices)) return false;
    return true;
}

/**
 * True when the spectrum of the down k-Laplacian attains its upper bound
 * (k+1)*M: k must be the top dimension and some d-component must be
 * disorientable with all its (d-1)-faces at the global maximum degree M.
 */
inline bool attains_down_spectral_bound(const SimplicialComplex& c, int k) {
    if (k != c.dimension() || k < 1) return false;
    int m = max_face_degree(c, k);
    for (const auto& comp : k_connected_components(c, k)) {
        bool constant_at_max = true;
        std::set<int> face_set;
        for (int i : comp.simplices)
            for (int f : c.faces(k, i)) face_set.insert(f);
        for (int f : face_set)
            if (static_cast<int>(c.cofaces(k - 1, f).size()) != m) {
                constant_at_max = false;
                break;
            }
        if (constant_at_max && disorientation(c, comp.simplices)) return true;
    }
    return false;
}

}  // namespace hodgewalk
