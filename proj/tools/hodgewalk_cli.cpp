// Command-line surface: parses .scx/.lbl files, runs spectra, walks, limits,
// Monte-Carlo simulations and edge label propagation, and emits JSON, CSV or
// SVG.  All numeric output carries 17 significant digits and identical
// invocations produce byte-identical results.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hodgewalk/hodgewalk.hpp"

namespace hw = hodgewalk;

namespace {

struct CommonOpts {
    std::string complex_path;
    std::string out_path;
    std::string format = "json";
    int k = 1;
    double p = 0.5;
    std::uint64_t seed = 12345;
};

void emit(const CommonOpts& opts, const std::string& payload) {
    if (opts.out_path.empty()) {
        std::cout << payload;
    } else {
        hw::write_file(opts.out_path, payload);
    }
}

hw::OrientedSimplex parse_start(const std::string& start) {
    std::istringstream in(start);
    std::vector<int> verts;
    long v;
    while (in >> v) {
        if (v < 0) throw std::invalid_argument("--start: negative vertex label");
        verts.push_back(static_cast<int>(v));
    }
    if (!in.eof()) throw std::invalid_argument("--start: expected whitespace-separated vertices");
    if (verts.empty()) throw std::invalid_argument("--start: empty vertex list");
    return hw::OrientedSimplex::from_ordering(verts);
}

hw::LaplacianPart parse_part(const std::string& part) {
    if (part == "up") return hw::LaplacianPart::Up;
    if (part == "down") return hw::LaplacianPart::Down;
    if (part == "full") return hw::LaplacianPart::Full;
    throw std::invalid_argument("--part must be one of up, down, full");
}

hw::EdgeOperatorKind parse_operator(const std::string& op) {
    if (op == "up") return hw::EdgeOperatorKind::Up;
    if (op == "down") return hw::EdgeOperatorKind::Down;
    if (op == "full") return hw::EdgeOperatorKind::Full;
    throw std::invalid_argument("--operator must be one of up, down, full");
}

std::string csv_key_value(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : rows) out += k + "," + v + "\n";
    return out;
}

void run_info(const CommonOpts& opts) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    int d = c.dimension();
    if (opts.format == "csv") {
        std::vector<std::pair<std::string, std::string>> rows;
        rows.push_back({"dimension", std::to_string(d)});
        for (int j = 0; j <= d; ++j)
            rows.push_back({"simplexes_dim_" + std::to_string(j), std::to_string(c.size(j))});
        for (int k = 1; k <= d; ++k)
            rows.push_back({"max_face_degree_k" + std::to_string(k),
                            std::to_string(hw::max_face_degree(c, k))});
        for (int k = 1; k <= d; ++k)
            rows.push_back({"components_k" + std::to_string(k),
                            std::to_string(hw::k_connected_components(c, k).size())});
        rows.push_back({"disorientable", d >= 1 && hw::disorientable(c) ? "true" : "false"});
        emit(opts, csv_key_value(rows));
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("dimension").value(d);
    w.key("simplex_counts").begin_array();
    for (int j = 0; j <= d; ++j) w.value(c.size(j));
    w.end_array();
    w.key("max_face_degree").begin_object();
    for (int k = 1; k <= d; ++k)
        w.key("k=" + std::to_string(k)).value(hw::max_face_degree(c, k));
    w.end_object();
    w.key("connected_components").begin_object();
    for (int k = 1; k <= d; ++k)
        w.key("k=" + std::to_string(k)).value(hw::k_connected_components(c, k).size());
    w.end_object();
    if (d >= 1) {
        w.key("top_components").begin_array();
        for (const auto& comp : hw::k_connected_components(c, d)) {
            w.begin_object();
            w.key("size").value(comp.simplices.size());
            w.key("disorientable").value(hw::disorientation(c, comp.simplices).has_value());
            w.end_object();
        }
        w.end_array();
        w.key("disorientable").value(hw::disorientable(c));
    }
    w.end_object();
    emit(opts, w.str());
}

void run_laplacian(const CommonOpts& opts, const std::string& part) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    hw::SparseOperator op = hw::laplacian(c, opts.k, parse_part(part));
    auto basis = hw::basis_labels(c, opts.k);
    if (opts.format == "csv") {
        emit(opts, hw::matrix_csv(op.dense(), basis));
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("k").value(opts.k);
    w.key("part").value(part);
    w.key("basis").begin_array();
    for (const auto& b : basis) w.value(b);
    w.end_array();
    Eigen::MatrixXd m = op.dense();
    w.key("matrix").begin_array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        w.begin_array();
        for (Eigen::Index cc = 0; cc < m.cols(); ++cc) w.value(m(r, cc));
        w.end_array();
    }
    w.end_array();
    w.end_object();
    emit(opts, w.str());
}

void run_spectrum(const CommonOpts& opts, const std::string& part) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    hw::SparseOperator op = hw::laplacian(c, opts.k, parse_part(part));
    hw::SpectralSummary s = hw::spectral_summary(op, c, opts.k);
    int b = hw::betti(c, opts.k);
    if (opts.format == "csv") {
        std::string out = "eigenvalue\n";
        for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
            out += hw::fmt_double(s.eigenvalues[i]) + "\n";
        emit(opts, out);
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("k").value(opts.k);
    w.key("part").value(part);
    w.key("eigenvalues").number_array(s.eigenvalues);
    w.key("lambda_k").value(s.lambda_k);
    w.key("kernel_dimension").value(s.kernel_basis.size());
    w.key("betti").value(b);
    w.end_object();
    emit(opts, w.str());
}

void run_homology(const CommonOpts& opts, bool k_given) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    int d = c.dimension();
    int lo = k_given ? opts.k : 0;
    int hi = k_given ? opts.k : d;
    std::vector<int> betti;
    for (int k = lo; k <= hi; ++k) betti.push_back(hw::betti(c, k));
    long long euler = 0;
    for (int j = 0; j <= d; ++j) euler += (j % 2 == 0 ? 1 : -1) * c.size(j);
    if (opts.format == "csv") {
        std::string out = "k,betti\n";
        for (int k = lo; k <= hi; ++k)
            out += std::to_string(k) + "," + std::to_string(betti[k - lo]) + "\n";
        emit(opts, out);
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("betti").begin_object();
    for (int k = lo; k <= hi; ++k) w.key("k=" + std::to_string(k)).value(betti[k - lo]);
    w.end_object();
    w.key("euler_characteristic").value(euler);
    w.end_object();
    emit(opts, w.str());
}

void run_walk(const CommonOpts& opts, const std::string& mode, const std::string& start,
              int steps) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    hw::OrientedSimplex tau = parse_start(start);
    hw::WalkEvolution ev;
    if (mode == "dirichlet") {
        ev = hw::dirichlet_walk_evolution(c, opts.k, opts.p, tau, steps);
    } else if (mode == "neumann") {
        int idx = [&] {
            auto i = c.index_of(tau.vertices);
            if (!i || tau.dim() != opts.k)
                throw std::invalid_argument("walk: start simplex not a k-simplex of the complex");
            return *i;
        }();
        hw::XkMatrix up(hw::laplacian(c, opts.k, hw::LaplacianPart::Up).dense());
        hw::GenericPropagation g = hw::generic_propagation(up, opts.p);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(c.size(opts.k));
        e[idx] = tau.sign;
        ev = hw::evolve(g.normalized, hw::Cochain(opts.k, e), steps);
        ev.propagation = g.propagation;
        ev.p = opts.p;
    } else {
        throw std::invalid_argument("--mode must be dirichlet or neumann");
    }
    auto basis = hw::basis_labels(c, opts.k);
    if (opts.format == "csv") {
        Eigen::MatrixXd trace(ev.trace.size(), c.size(opts.k));
        for (std::size_t i = 0; i < ev.trace.size(); ++i)
            trace.row(i) = ev.trace[i].values.transpose();
        emit(opts, hw::matrix_csv(trace, basis));
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("mode").value(mode);
    w.key("k").value(opts.k);
    w.key("p").value(opts.p);
    w.key("basis").begin_array();
    for (const auto& b : basis) w.value(b);
    w.end_array();
    w.key("trace").begin_array();
    for (const auto& step : ev.trace) w.number_array(step.values);
    w.end_array();
    w.end_object();
    emit(opts, w.str());
}

void run_limit(const CommonOpts& opts, const std::string& start) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    hw::OrientedSimplex tau = parse_start(start);
    hw::Cochain lim = hw::marginal_difference_limit(c, opts.k, opts.p, tau);
    int rank = hw::homology_rank_from_walks(c, opts.k, opts.p);
    int b = hw::betti(c, opts.k);
    auto basis = hw::basis_labels(c, opts.k);
    if (opts.format == "csv") {
        Eigen::MatrixXd row(1, lim.values.size());
        row.row(0) = lim.values.transpose();
        emit(opts, hw::matrix_csv(row, basis));
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("k").value(opts.k);
    w.key("p").value(opts.p);
    w.key("basis").begin_array();
    for (const auto& b2 : basis) w.value(b2);
    w.end_array();
    w.key("limit").number_array(lim.values);
    w.key("homology_rank_from_walks").value(rank);
    w.key("betti").value(b);
    w.end_object();
    emit(opts, w.str());
}

void run_simulate(const CommonOpts& opts, const std::string& mode, const std::string& start,
                  int steps, long long trajectories) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    hw::OrientedSimplex tau = parse_start(start);
    hw::TransitionMatrix P = mode == "neumann"
                                 ? hw::neumann_transition_matrix(c, opts.k, opts.p)
                                 : hw::dirichlet_transition_matrix(c, opts.k, opts.p);
    auto idx = c.index_of(tau.vertices);
    if (!idx || tau.dim() != opts.k)
        throw std::invalid_argument("simulate: start simplex not a k-simplex of the complex");

    hw::SimulationConfig cfg;
    cfg.n_steps = steps;
    cfg.n_trajectories = trajectories;
    cfg.master_seed = opts.seed;
    cfg.initial = hw::AbsorbingState::oriented(*idx, tau.sign);
    hw::EmpiricalDistribution emp = hw::simulate(P, cfg);

    Eigen::VectorXd exact = Eigen::VectorXd::Zero(P.state_count());
    exact[P.state_index(cfg.initial)] = 1.0;
    for (int n = 0; n < steps; ++n) exact = P.entries * exact;

    auto states = hw::state_labels(c, opts.k);
    if (opts.format == "csv") {
        std::string out = "state,empirical,exact,standard_error\n";
        for (int s = 0; s < P.state_count(); ++s)
            out += states[s] + "," + hw::fmt_double(emp.frequency(steps, s)) + "," +
                   hw::fmt_double(exact[s]) + "," + hw::fmt_double(emp.standard_error(steps, s)) +
                   "\n";
        emit(opts, out);
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("mode").value(mode);
    w.key("k").value(opts.k);
    w.key("p").value(opts.p);
    w.key("steps").value(steps);
    w.key("trajectories").value(trajectories);
    w.key("seed").value(static_cast<long long>(opts.seed));
    w.key("states").begin_array();
    for (const auto& s : states) w.value(s);
    w.end_array();
    std::vector<double> freq, se;
    int within = 0;
    for (int s = 0; s < P.state_count(); ++s) {
        double f = emp.frequency(steps, s);
        double sigma = std::sqrt(exact[s] * (1.0 - exact[s]) / double(trajectories));
        freq.push_back(f);
        se.push_back(sigma);
        if (std::abs(f - exact[s]) <= 3.0 * sigma + 1e-12) ++within;
    }
    w.key("empirical").number_array(freq);
    w.key("exact").number_array(exact);
    w.key("standard_error").number_array(se);
    w.key("states_within_3se").value(within);
    w.key("state_count").value(P.state_count());
    w.end_object();
    emit(opts, w.str());
}

void run_propagate(const CommonOpts& opts, const std::string& labels_path, const std::string& op,
                   int iters) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    auto labels = hw::parse_labels(hw::read_file(labels_path), c);
    int n_classes = 0;
    for (auto [idx, cls] : labels) n_classes = std::max(n_classes, std::abs(cls));
    hw::LabelProblem prob(c, 1, hw::make_edge_operator(c, parse_operator(op)), labels, n_classes,
                          opts.p, iters);
    hw::PropagationResult res = hw::propagate(prob);
    auto basis = hw::basis_labels(c, 1);
    if (opts.format == "csv") {
        std::string out = "edge,assigned_class";
        for (int cls = 1; cls <= n_classes; ++cls)
            out += ",confidence_class_" + std::to_string(cls);
        out += "\n";
        for (int i = 0; i < c.size(1); ++i) {
            out += basis[i] + "," + std::to_string(res.assigned[i]);
            for (int cls = 1; cls <= n_classes; ++cls)
                out += "," + hw::fmt_double(res.f_final[cls - 1][i]);
            out += "\n";
        }
        emit(opts, out);
        return;
    }
    hw::JsonWriter w;
    w.begin_object();
    w.key("operator").value(op);
    w.key("p").value(opts.p);
    w.key("iterations").value(iters);
    w.key("classes").value(n_classes);
    w.key("edges").begin_array();
    for (const auto& b : basis) w.value(b);
    w.end_array();
    w.key("confidences").begin_array();
    for (const auto& f : res.f_final) w.number_array(f);
    w.end_array();
    w.key("closed_form_limits").begin_array();
    for (std::size_t i = 0; i < res.f_limit.size(); ++i) {
        if (res.f_limit[i])
            w.number_array(*res.f_limit[i]);
        else
            w.value_null();
    }
    w.end_array();
    w.key("assigned").begin_array();
    for (int a : res.assigned) w.value(a);
    w.end_array();
    w.key("diagnostics").begin_object();
    w.key("K").value(res.K);
    w.key("lambda_max").value(res.lambda_max);
    if (res.p_threshold)
        w.key("p_threshold").value(*res.p_threshold);
    else
        w.key("p_threshold").value_null();
    w.key("kernel_support_ok").begin_array();
    for (bool ok : res.kernel_support_ok) w.value(ok);
    w.end_array();
    w.key("closed_form_status").begin_array();
    for (const auto& s : res.limit_status) w.value(s);
    w.end_array();
    w.end_object();
    w.end_object();
    emit(opts, w.str());
}

void run_render(const CommonOpts& opts, const std::string& labels_path, const std::string& op,
                int iters, const std::string& start, bool k_given) {
    hw::SimplicialComplex c = hw::load_complex(opts.complex_path);
    std::string svg;
    if (!labels_path.empty()) {
        auto labels = hw::parse_labels(hw::read_file(labels_path), c);
        int n_classes = 0;
        for (auto [idx, cls] : labels) n_classes = std::max(n_classes, std::abs(cls));
        hw::LabelProblem prob(c, 1, hw::make_edge_operator(c, parse_operator(op)), labels,
                              n_classes, opts.p, iters);
        hw::PropagationResult res = hw::propagate(prob);
        svg = hw::render_svg(c, hw::flow_field(c, res));
    } else if (!start.empty()) {
        int k = k_given ? opts.k : 1;
        hw::Cochain lim = hw::marginal_difference_limit(c, k, opts.p, parse_start(start));
        if (k != 1)
            throw std::invalid_argument("render: only edge cochains (k = 1) can be drawn");
        svg = hw::render_svg(c, lim);
    } else {
        std::vector<hw::FlowEdge> none(c.size(1));
        for (int i = 0; i < c.size(1); ++i) none[i].edge = i;
        svg = hw::render_svg(c, none);
    }
    emit(opts, svg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random walks, Laplacian spectra and edge label propagation on simplicial "
                 "complexes"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string part = "full", mode = "dirichlet", start, labels_path, op = "full";
    int steps = 10, iters = 100;
    long long trajectories = 10000;
    bool k_given = false;

    auto add_common = [&](CLI::App* sub, bool needs_k) {
        sub->add_option("--complex", opts.complex_path, "complex file (.scx)")->required();
        sub->add_option("--out", opts.out_path, "output file (default: stdout)");
        sub->add_option("--format", opts.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        if (needs_k)
            sub->add_option("--k", opts.k, "cochain dimension")
                ->each([&](const std::string&) { k_given = true; });
        return sub;
    };

    auto* info = add_common(app.add_subcommand("info", "simplex counts, degrees, components"),
                            false);
    (void)info;

    auto* lap = add_common(app.add_subcommand("laplacian", "emit a combinatorial Laplacian"),
                           true);
    lap->add_option("--part", part, "up, down or full");

    auto* spec = add_common(app.add_subcommand("spectrum", "eigenvalues, lambda_k and betti"),
                            true);
    spec->add_option("--part", part, "up, down or full");

    auto* hom = add_common(app.add_subcommand("homology", "Betti numbers per dimension"), true);
    (void)hom;

    auto* walk = add_common(
        app.add_subcommand("walk", "normalized marginal-difference trace of a walk"), true);
    walk->add_option("--p", opts.p, "lazy probability");
    walk->add_option("--mode", mode, "dirichlet or neumann");
    walk->add_option("--start", start, "oriented start simplex, e.g. \"0 1\"")->required();
    walk->add_option("--steps", steps, "number of steps");

    auto* lim = add_common(
        app.add_subcommand("limit", "closed-form walk limit and homology rank"), true);
    lim->add_option("--p", opts.p, "lazy probability");
    lim->add_option("--start", start, "oriented start simplex")->required();

    auto* sim = add_common(
        app.add_subcommand("simulate", "Monte-Carlo empirical vs exact marginals"), true);
    sim->add_option("--p", opts.p, "lazy probability");
    sim->add_option("--mode", mode, "dirichlet or neumann");
    sim->add_option("--start", start, "oriented start simplex")->required();
    sim->add_option("--steps", steps, "number of steps");
    sim->add_option("--trajectories", trajectories, "number of independent walks");
    sim->add_option("--seed", opts.seed, "master seed");

    auto* prop = add_common(
        app.add_subcommand("propagate", "semi-supervised label propagation on edges"), false);
    prop->add_option("--p", opts.p, "lazy probability");
    prop->add_option("--labels", labels_path, "label file (.lbl)")->required();
    prop->add_option("--operator", op, "up, down or full");
    prop->add_option("--iters", iters, "iteration budget");

    auto* ren = add_common(app.add_subcommand("render", "SVG drawing of the complex or a flow"),
                           true);
    ren->add_option("--p", opts.p, "lazy probability");
    ren->add_option("--labels", labels_path, "label file: render the propagated flow");
    ren->add_option("--operator", op, "up, down or full");
    ren->add_option("--iters", iters, "iteration budget");
    ren->add_option("--start", start, "render a walk limit cochain from this start");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("info")) run_info(opts);
        else if (app.got_subcommand("laplacian")) run_laplacian(opts, part);
        else if (app.got_subcommand("spectrum")) run_spectrum(opts, part);
        else if (app.got_subcommand("homology")) run_homology(opts, k_given);
        else if (app.got_subcommand("walk")) run_walk(opts, mode, start, steps);
        else if (app.got_subcommand("limit")) run_limit(opts, start);
        else if (app.got_subcommand("simulate"))
            run_simulate(opts, mode, start, steps, trajectories);
        else if (app.got_subcommand("propagate")) run_propagate(opts, labels_path, op, iters);
        else if (app.got_subcommand("render"))
            run_render(opts, labels_path, op, iters, start, k_given);
    } catch (const hw::io_error& e) {
        std::cerr << "io error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
