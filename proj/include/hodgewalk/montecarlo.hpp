#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "hodgewalk/homology.hpp"
#include "hodgewalk/parallel.hpp"
#include "hodgewalk/walks.hpp"

namespace hodgewalk {

struct SimulationConfig {
    int n_steps = 0;
    std::int64_t n_trajectories = 1;
    std::uint64_t master_seed = 0;
    AbsorbingState initial;  // point mass; ignored when initial_distribution is set
    std::optional<Eigen::VectorXd> initial_distribution;  // general nu, sampled per trajectory
};

/// Per-step state counts over S for a batch of independent trajectories.
struct EmpiricalDistribution {
    int n_steps = 0;
    std::int64_t n_trajectories = 0;
    std::vector<std::vector<std::int64_t>> counts;  // [step][state]

    const std::vector<std::int64_t>& final_counts() const { return counts.back(); }
    double frequency(int step, int state) const {
        return double(counts.at(step).at(state)) / double(n_trajectories);
    }
    /// Binomial standard error of the empirical frequency.
    double standard_error(int step, int state) const {
        double q = frequency(step, state);
        return std::sqrt(q * (1.0 - q) / double(n_trajectories));
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based per-trajectory seed: independent of thread scheduling.
inline std::uint64_t trajectory_seed(std::uint64_t master, std::int64_t index) {
    return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(index)));
}

inline double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;  // 53 uniform bits, engine output is portable
}

// Column CDF over the fixed state order, nonzero entries only, top forced to 1.
struct ColumnCdf {
    std::vector<double> cum;
    std::vector<int> state;

    int sample(double u) const {
        for (std::size_t i = 0; i < cum.size(); ++i)
            if (u < cum[i]) return state[i];
        return state.back();
    }
};

inline ColumnCdf make_cdf(const Eigen::VectorXd& col) {
    ColumnCdf c;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        if (col[i] > 0.0) {
            acc += col[i];
            c.cum.push_back(acc);
            c.state.push_back(static_cast<int>(i));
        }
    }
    if (c.cum.empty()) throw std::invalid_argument("simulate: transition column with no mass");
    c.cum.back() = 1.0;
    return c;
}

}  // namespace detail

/**
 * Runs cfg.n_trajectories independent walks of cfg.n_steps steps and counts
 * states at every step.  Sampling is inverse-CDF over the fixed state order,
 * each trajectory carries its own counter-derived seed, and partial counts
 * merge by integer addition, so the result is a pure function of
 * (config, matrix) regardless of the worker count.
 */
inline EmpiricalDistribution simulate(const TransitionMatrix& P, const SimulationConfig& cfg) {
    if (cfg.n_trajectories < 1) throw std::invalid_argument("simulate: n_trajectories >= 1");
    if (cfg.n_steps < 0) throw std::invalid_argument("simulate: negative step count");
    int n_states = P.state_count();

    std::vector<detail::ColumnCdf> cdf;
    cdf.reserve(n_states);
    for (int j = 0; j < n_states; ++j) cdf.push_back(detail::make_cdf(P.entries.col(j)));

    std::optional<detail::ColumnCdf> init_cdf;
    int init_state = 0;
    if (cfg.initial_distribution) {
        const Eigen::VectorXd& nu = *cfg.initial_distribution;
        if (nu.size() != n_states)
            throw std::invalid_argument("simulate: initial distribution has wrong length");
        if (nu.minCoeff() < 0.0 || std::abs(nu.sum() - 1.0) > 1e-9)
            throw std::invalid_argument("simulate: initial distribution is not a distribution");
        init_cdf = detail::make_cdf(nu);
    } else {
        init_state = P.state_index(cfg.initial);
    }

    int workers = worker_count();
    std::vector<std::vector<std::vector<std::int64_t>>> local(
        workers, std::vector<std::vector<std::int64_t>>(
                     cfg.n_steps + 1, std::vector<std::int64_t>(n_states, 0)));
    std::int64_t chunk = (cfg.n_trajectories + workers - 1) / workers;

    parallel_for(workers, [&](std::int64_t wlo, std::int64_t whi) {
        for (std::int64_t w = wlo; w < whi; ++w) {
            auto& mine = local[w];
            std::int64_t lo = w * chunk;
            std::int64_t hi = std::min<std::int64_t>(cfg.n_trajectories, lo + chunk);
            for (std::int64_t t = lo; t < hi; ++t) {
                std::mt19937_64 rng(detail::trajectory_seed(cfg.master_seed, t));
                int state = init_cdf ? init_cdf->sample(detail::uniform01(rng)) : init_state;
                ++mine[0][state];
                for (int step = 1; step <= cfg.n_steps; ++step) {
                    state = cdf[state].sample(detail::uniform01(rng));
                    ++mine[step][state];
                }
            }
        }
    });

    EmpiricalDistribution emp;
    emp.n_steps = cfg.n_steps;
    emp.n_trajectories = cfg.n_trajectories;
    emp.counts.assign(cfg.n_steps + 1, std::vector<std::int64_t>(n_states, 0));
    for (int w = 0; w < workers; ++w)
        for (int step = 0; step <= cfg.n_steps; ++step)
            for (int s = 0; s < n_states; ++s) emp.counts[step][s] += local[w][step][s];
    return emp;
}

/// Empirical counterpart of the marginal difference: frequency(sigma+) -
/// frequency(sigma-) per positively oriented k-simplex, at the given step
/// (default: the final one).
inline Cochain empirical_marginal_difference(const EmpiricalDistribution& emp,
                                             const SimplicialComplex& c, int k, int step = -1) {
    int m = c.size(k);
    if (emp.counts.empty() || static_cast<int>(emp.counts[0].size()) != 2 * m + 1)
        throw std::invalid_argument(
            "empirical_marginal_difference: state space does not match X^k");
    if (step < 0) step = emp.n_steps;
    if (step > emp.n_steps) throw std::invalid_argument("empirical_marginal_difference: step");
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i)
        v[i] = (double(emp.counts[step][i]) - double(emp.counts[step][m + i])) /
               double(emp.n_trajectories);
    return Cochain(k, std::move(v));
}

}  // namespace hodgewalk
