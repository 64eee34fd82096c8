#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hodgewalk/homology.hpp"
#include "hodgewalk/label_propagation.hpp"
#include "hodgewalk/simplicial_complex.hpp"

namespace hodgewalk {

/// Filesystem-level failure (missing file, unwritable output).  The CLI maps
/// this to exit code 2; everything else exits 1.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// All numeric output goes through this: 17 significant digits, enough to
/// round-trip any double, and byte-deterministic.
inline std::string fmt_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in output");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// complex files (.scx)
//
// line grammar:   # comment
//                 coord v x y
//                 simplex v0 v1 ... vj
// ---------------------------------------------------------------------------

inline SimplicialComplex parse_complex(const std::string& text) {
    std::vector<std::vector<int>> simplexes;
    std::map<int, std::pair<double, double>> coords;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank
        if (tok[0] == '#') continue;
        if (tok == "coord") {
            long v;
            double x, y;
            if (!(ls >> v >> x >> y) || v < 0) fail("malformed coord line");
            std::string rest;
            if (ls >> rest) fail("trailing tokens on coord line");
            if (coords.count(static_cast<int>(v)))
                fail("duplicate coord for vertex " + std::to_string(v));
            coords[static_cast<int>(v)] = {x, y};
        } else if (tok == "simplex") {
            std::vector<int> s;
            long v;
            while (ls >> v) {
                if (v < 0) fail("negative vertex label");
                s.push_back(static_cast<int>(v));
            }
            if (!ls.eof()) fail("malformed simplex line");
            if (s.empty()) fail("simplex line with no vertices");
            std::set<int> uniq(s.begin(), s.end());
            if (uniq.size() != s.size()) fail("repeated vertex in simplex");
            simplexes.push_back(std::move(s));
        } else {
            fail("unknown directive '" + tok + "'");
        }
    }
    if (simplexes.empty()) throw std::invalid_argument("complex file lists no simplexes");
    for (const auto& [v, xy] : coords) {
        bool known = false;
        for (const auto& s : simplexes)
            if (std::find(s.begin(), s.end(), v) != s.end()) known = true;
        if (!known) throw std::invalid_argument("coord for vertex " + std::to_string(v) +
                                                " that no simplex mentions");
    }
    return build_complex(simplexes, std::move(coords));
}

/// Canonical serialization: coords sorted by vertex, then the maximal
/// simplexes (those with no coface) in (dimension, lexicographic) order.
/// parse(serialize(c)) reconstructs an identical complex.
inline std::string serialize_complex(const SimplicialComplex& c) {
    std::ostringstream out;
    for (const auto& [v, xy] : c.coords())
        out << "coord " << v << ' ' << fmt_double(xy.first) << ' ' << fmt_double(xy.second)
            << '\n';
    for (int j = 0; j <= c.dimension(); ++j) {
        for (int i = 0; i < c.size(j); ++i) {
            if (!c.cofaces(j, i).empty()) continue;
            out << "simplex";
            for (int v : c.simplex(j, i)) out << ' ' << v;
            out << '\n';
        }
    }
    return out.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_error("read failure on " + path);
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw io_error("write failure on " + path);
}

inline SimplicialComplex load_complex(const std::string& path) {
    return parse_complex(read_file(path));
}

// ---------------------------------------------------------------------------
// label files (.lbl):   label v_a v_b class
// The pair order encodes orientation (ascending = positive), so
// "label 2 1 3" labels the negative orientation of edge {1,2} with class 3.
// ---------------------------------------------------------------------------

inline std::vector<std::pair<int, int>> parse_labels(const std::string& text,
                                                     const SimplicialComplex& c) {
    std::vector<std::pair<int, int>> out;
    std::set<int> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok[0] == '#') continue;
        if (tok != "label") fail("unknown directive '" + tok + "'");
        long a, b, cls;
        if (!(ls >> a >> b >> cls) || a < 0 || b < 0) fail("malformed label line");
        std::string rest;
        if (ls >> rest) fail("trailing tokens on label line");
        if (a == b) fail("degenerate edge");
        if (cls == 0) fail("class must be nonzero");
        Simplex edge{static_cast<int>(std::min(a, b)), static_cast<int>(std::max(a, b))};
        auto idx = c.index_of(edge);
        if (!idx || edge.size() != 2) fail("edge " + detail::simplex_str(edge) + " not in complex");
        if (seen.count(*idx)) fail("edge labelled twice");
        seen.insert(*idx);
        int signed_class = a < b ? static_cast<int>(cls) : -static_cast<int>(cls);
        out.emplace_back(*idx, signed_class);
    }
    if (out.empty()) throw std::invalid_argument("label file lists no labels");
    return out;
}

// ---------------------------------------------------------------------------
// JSON writing.  A thin streaming writer so numeric formatting (17
// significant digits) and key order are fully pinned down.
// ---------------------------------------------------------------------------

class JsonWriter {
public:
    JsonWriter& begin_object() { return open('{'); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array() { return open('['); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& key(std::string_view k) {
        comma();
        out_ += '"';
        escape(k);
        out_ += "\": ";
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) { return raw(fmt_double(v)); }
    JsonWriter& value(int v) { return raw(std::to_string(v)); }
    JsonWriter& value(long long v) { return raw(std::to_string(v)); }
    JsonWriter& value(std::size_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
    JsonWriter& value_null() { return raw("null"); }
    JsonWriter& value(std::string_view s) {
        comma();
        out_ += '"';
        escape(s);
        out_ += '"';
        pending_value_ = false;
        return *this;
    }
    JsonWriter& value(const char* s) { return value(std::string_view(s)); }

    template <typename Seq>
    JsonWriter& number_array(const Seq& xs) {
        begin_array();
        for (const auto& x : xs) value(static_cast<double>(x));
        return end_array();
    }

    std::string str() const { return out_ + "\n"; }

private:
    JsonWriter& open(char ch) {
        comma();
        out_ += ch;
        depth_first_.push_back(true);
        pending_value_ = false;
        return *this;
    }
    JsonWriter& close(char ch) {
        out_ += ch;
        depth_first_.pop_back();
        return *this;
    }
    JsonWriter& raw(const std::string& s) {
        comma();
        out_ += s;
        pending_value_ = false;
        return *this;
    }
    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;  // value follows its key directly
        }
        if (!depth_first_.empty()) {
            if (!depth_first_.back())
                out_ += ", ";
            else
                depth_first_.back() = false;
        }
    }
    void escape(std::string_view s) {
        for (char ch : s) {
            switch (ch) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                        out_ += buf;
                    } else {
                        out_ += ch;
                    }
            }
        }
    }

    std::string out_;
    std::vector<bool> depth_first_;
    bool pending_value_ = false;
};

// ---------------------------------------------------------------------------
// basis labels and CSV
// ---------------------------------------------------------------------------

inline std::string simplex_label(const Simplex& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(s[i]);
    }
    return out;
}

/// Names of the positively oriented k-simplexes, in basis order.
inline std::vector<std::string> basis_labels(const SimplicialComplex& c, int k) {
    std::vector<std::string> out;
    out.reserve(c.size(k));
    for (int i = 0; i < c.size(k); ++i) out.push_back(simplex_label(c.simplex(k, i)));
    return out;
}

/// Names of the walk states sigma+, sigma-, Theta in matrix order.
inline std::vector<std::string> state_labels(const SimplicialComplex& c, int k) {
    std::vector<std::string> out;
    out.reserve(2 * c.size(k) + 1);
    for (int i = 0; i < c.size(k); ++i) out.push_back("+" + simplex_label(c.simplex(k, i)));
    for (int i = 0; i < c.size(k); ++i) out.push_back("-" + simplex_label(c.simplex(k, i)));
    out.push_back("Theta");
    return out;
}

/// Row-major CSV with a header row naming the basis order of the columns.
inline std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& columns) {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out << ',';
        out << columns[i];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index cc = 0; cc < m.cols(); ++cc) {
            if (cc) out << ',';
            out << fmt_double(m(r, cc));
        }
        out << '\n';
    }
    return out.str();
}

/// Sparse coordinate-list text: one "row col value" triple per line.
inline std::string matrix_coordinate_list(const SparseOperator& op) {
    std::ostringstream out;
    Eigen::MatrixXd d = op.dense();
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index cc = 0; cc < d.cols(); ++cc)
            if (d(r, cc) != 0.0) out << r << ' ' << cc << ' ' << fmt_double(d(r, cc)) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

namespace detail {

inline const char* class_color(int cls) {
    static const char* palette[6] = {"#d62728", "#1f77b4", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[((cls - 1) % 6 + 6) % 6];
}

inline std::string svg_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

}  // namespace detail

/**
 * Deterministic SVG: triangles as light fills, every edge as a faint base
 * line, flow arrows colored per class with arrowheads pointing along the
 * assigned orientation and stroke width mapped from magnitude on a fixed
 * scale.  Identical inputs produce byte-identical output.
 */
inline std::string render_svg(const SimplicialComplex& c, const std::vector<FlowEdge>& flow) {
    if (!c.has_coords_for_all_vertices())
        throw std::invalid_argument("render_svg: complex has no drawing coordinates");
    if (static_cast<int>(flow.size()) != c.size(1))
        throw std::invalid_argument("render_svg: flow size does not match edge count");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [v, xy] : c.coords()) {
        xmin = std::min(xmin, xy.first);
        xmax = std::max(xmax, xy.first);
        ymin = std::min(ymin, xy.second);
        ymax = std::max(ymax, xy.second);
    }
    double spanx = std::max(xmax - xmin, 1e-9);
    double spany = std::max(ymax - ymin, 1e-9);
    double width = 800.0;
    double scale = (width * 0.9) / spanx;
    double height = spany * scale + width * 0.1;
    auto px = [&](double x) { return (x - xmin) * scale + width * 0.05; };
    auto py = [&](double y) { return height - ((y - ymin) * scale + width * 0.05); };

    std::set<int> classes;
    for (const auto& fe : flow)
        if (fe.direction != 0) classes.insert(fe.class_index);

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(width)
        << "\" height=\"" << detail::svg_num(height) << "\" viewBox=\"0 0 "
        << detail::svg_num(width) << ' ' << detail::svg_num(height) << "\">\n";
    if (!classes.empty()) {
        out << "<defs>\n";
        for (int cls : classes) {
            out << "<marker id=\"arrow-c" << cls
                << "\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" "
                   "markerHeight=\"6\" orient=\"auto-start-reverse\">"
                << "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"" << detail::class_color(cls)
                << "\"/></marker>\n";
        }
        out << "</defs>\n";
    }

    const auto& coords = c.coords();
    if (c.dimension() >= 2) {
        for (int i = 0; i < c.size(2); ++i) {
            const Simplex& t = c.simplex(2, i);
            out << "<polygon points=\"";
            for (std::size_t v = 0; v < 3; ++v) {
                auto [x, y] = coords.at(t[v]);
                if (v) out << ' ';
                out << detail::svg_num(px(x)) << ',' << detail::svg_num(py(y));
            }
            out << "\" fill=\"#eef2f7\" stroke=\"none\"/>\n";
        }
    }
    for (int i = 0; i < c.size(1); ++i) {
        const Simplex& e = c.simplex(1, i);
        auto [x0, y0] = coords.at(e[0]);
        auto [x1, y1] = coords.at(e[1]);
        out << "<line x1=\"" << detail::svg_num(px(x0)) << "\" y1=\"" << detail::svg_num(py(y0))
            << "\" x2=\"" << detail::svg_num(px(x1)) << "\" y2=\"" << detail::svg_num(py(y1))
            << "\" stroke=\"#c8c8c8\" stroke-width=\"0.6\"/>\n";
    }
    for (const auto& fe : flow) {
        if (fe.direction == 0) continue;
        const Simplex& e = c.simplex(1, fe.edge);
        int from = fe.direction > 0 ? e[0] : e[1];
        int to = fe.direction > 0 ? e[1] : e[0];
        auto [x0, y0] = coords.at(from);
        auto [x1, y1] = coords.at(to);
        double w = std::min(0.75 + 6.0 * fe.magnitude, 6.0);  // fixed magnitude scale
        out << "<line x1=\"" << detail::svg_num(px(x0)) << "\" y1=\"" << detail::svg_num(py(y0))
            << "\" x2=\"" << detail::svg_num(px(x1)) << "\" y2=\"" << detail::svg_num(py(y1))
            << "\" stroke=\"" << detail::class_color(fe.class_index) << "\" stroke-width=\""
            << detail::svg_num(w) << "\" marker-end=\"url(#arrow-c" << fe.class_index
            << ")\" data-edge=\"" << simplex_label(e) << "\" data-from=\"" << from
            << "\" data-to=\"" << to << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

/// Renders a single k=1 cochain as a one-class flow (arrow along the sign).
inline std::string render_svg(const SimplicialComplex& c, const Cochain& f) {
    if (f.k != 1 || f.values.size() != c.size(1))
        throw std::invalid_argument("render_svg: expected an edge cochain");
    std::vector<FlowEdge> flow;
    flow.reserve(c.size(1));
    for (int i = 0; i < c.size(1); ++i) {
        FlowEdge fe;
        fe.edge = i;
        double v = f.values[i];
        if (v != 0.0) {
            fe.direction = v > 0 ? 1 : -1;
            fe.class_index = 1;
            fe.magnitude = std::abs(v);
        }
        flow.push_back(fe);
    }
    return render_svg(c, flow);
}

}  // namespace hodgewalk
