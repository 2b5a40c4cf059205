#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pimla/adaptive.hpp"
#include "pimla/engine.hpp"
#include "pimla/graph_io.hpp"
#include "pimla/kernels.hpp"

namespace pimla {

enum class Algorithm { bfs, sssp, ppr };

inline std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::bfs:
        return "bfs";
    case Algorithm::sssp:
        return "sssp";
    case Algorithm::ppr:
        return "ppr";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "bfs") {
        return Algorithm::bfs;
    }
    if (s == "sssp") {
        return Algorithm::sssp;
    }
    if (s == "ppr") {
        return Algorithm::ppr;
    }
    throw ConfigError("unknown algorithm '" + s + "'");
}

enum class KernelPolicy { adaptive, spmspv, spmv };

inline KernelPolicy parse_policy(const std::string& s) {
    if (s == "adaptive") {
        return KernelPolicy::adaptive;
    }
    if (s == "spmspv") {
        return KernelPolicy::spmspv;
    }
    if (s == "spmv") {
        return KernelPolicy::spmv;
    }
    throw ConfigError("unknown kernel policy '" + s + "'");
}

inline std::string to_string(KernelPolicy p) {
    return p == KernelPolicy::adaptive ? "adaptive" : p == KernelPolicy::spmspv ? "spmspv" : "spmv";
}

struct AppConfig {
    MachineConfig machine;
    KernelPolicy policy = KernelPolicy::adaptive;
    KernelId spmspv_kernel = KernelId::spmspv_csc_2d;
    KernelId spmv_kernel = KernelId::spmv_coo_2d;
    Balance balance = Balance::by_rows;
    std::optional<Grid> grid;
    ClassifierConfig classifier;
    /// Skips classification when set.
    std::optional<GraphClass> graph_class;
    /// 0 picks a default: N + 1 for bfs/sssp, 1000 for ppr.
    std::size_t max_iterations = 0;
    double damping = 0.85;
    double epsilon = 1e-6;
    /// Without the model only numeric results are produced.
    bool model = true;
    unsigned host_threads = 1;
};

inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

struct IterationRecord {
    std::size_t iteration = 0;
    KernelMode mode = KernelMode::spmspv;
    KernelId kernel = KernelId::spmspv_csc_2d;
    double density_pct = 0.0;
    ExecutionReport report;
    bool converged = false;
};

struct AppRun {
    Algorithm algorithm = Algorithm::bfs;
    index_t source = 0;
    std::size_t max_iterations = 0;
    double epsilon = 0.0;
    double damping = 0.0;
    KernelPolicy policy = KernelPolicy::adaptive;
    GraphClass graph_class;
    SwitchState switch_state;
    std::vector<IterationRecord> iterations;
    bool converged = false;
    std::vector<std::string> warnings;

    PhaseCosts total() const {
        PhaseCosts t;
        for (const auto& it : iterations) {
            const auto& p = it.report.phases;
            t.load_seconds += p.load_seconds;
            t.kernel_seconds += p.kernel_seconds;
            t.retrieve_seconds += p.retrieve_seconds;
            t.merge_seconds += p.merge_seconds;
            t.kernel_cycles += p.kernel_cycles;
        }
        return t;
    }
};

struct AppResult {
    Algorithm algorithm = Algorithm::bfs;
    /// bfs: level per node, kUnreached when not reached.
    std::vector<std::uint32_t> levels;
    /// sssp: distance (TropicalSemiring::zero() when unreached); ppr: score.
    std::vector<double> values;
};

/// bfs/sssp: nothing changed. ppr: L1 change strictly below epsilon.
inline bool convergence_check(Algorithm a, const std::vector<double>& prev, const std::vector<double>& next,
                              double epsilon = 1e-6) {
    if (prev.size() != next.size()) {
        throw DimensionError("convergence check on vectors of different length");
    }
    if (a == Algorithm::ppr) {
        double l1 = 0.0;
        for (std::size_t i = 0; i < prev.size(); ++i) {
            l1 += std::abs(next[i] - prev[i]);
        }
        return l1 < epsilon;
    }
    return prev == next;
}

/// Class used when no classification is needed or possible.
inline GraphClass classify_default(const ClassifierConfig& c) {
    return {GraphLabel::regular, c.threshold_override_pct.value_or(c.regular_threshold_pct)};
}

namespace detail {

template <class V, class F>
CsrMatrix<V> transposed_adjacency(const EdgeList& g, F&& value_of) {
    std::vector<Triple<V>> triples;
    triples.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        if (e.src != e.dst) {
            triples.push_back({e.dst, e.src, value_of(e)});
        }
    }
    return to_csr(make_coo<V>(g.num_nodes, g.num_nodes, std::move(triples)));
}

inline GraphClass resolve_class(const EdgeList& g, const AppConfig& cfg) {
    if (cfg.graph_class) {
        return *cfg.graph_class;
    }
    if (cfg.policy != KernelPolicy::adaptive || g.edges.empty()) {
        // No switching decision to make, or nothing to classify.
        return classify_default(cfg.classifier);
    }
    return classify(compute_stats(g), cfg.classifier);
}

inline void check_source(const EdgeList& g, index_t source) {
    if (source >= g.num_nodes) {
        throw DimensionError("source " + std::to_string(source) + " outside [0, " + std::to_string(g.num_nodes) +
                             ")");
    }
}

/// Adds the host-side convergence check (one operation per node) to the merge phase.
inline void charge_convergence_check(ExecutionReport& rep, index_t n, const MachineConfig& cfg) {
    rep.volume.merge_ops += n;
    rep.phases.merge_seconds =
        static_cast<double>(rep.volume.merge_ops) / (cfg.host_merge_ops_per_cycle * cfg.host_freq_hz);
}

/**
 * Shared iteration skeleton. `step(record)` performs one product and
 * returns whether the run has converged; `density()` reports the density of
 * the next input vector.
 */
template <class Step, class Density>
void iterate(AppRun& run, const AppConfig& cfg, Step&& step, Density&& density) {
    for (std::size_t it = 0; it < run.max_iterations; ++it) {
        const double d = density();
        KernelMode mode = KernelMode::spmspv;
        if (cfg.policy == KernelPolicy::spmv) {
            mode = KernelMode::spmv;
        } else if (cfg.policy == KernelPolicy::adaptive) {
            run.switch_state = should_switch(run.switch_state, d, run.graph_class, it);
            mode = run.switch_state.current;
        }
        IterationRecord rec;
        rec.iteration = it;
        rec.mode = mode;
        rec.kernel = mode == KernelMode::spmv ? cfg.spmv_kernel : cfg.spmspv_kernel;
        rec.density_pct = d;
        rec.converged = step(rec);
        run.iterations.push_back(std::move(rec));
        if (run.iterations.back().converged) {
            run.converged = true;
            return;
        }
    }
}

template <class V>
double density_of(const std::vector<V>& v, V zero) {
    if (v.empty()) {
        return 0.0;
    }
    std::size_t nnz = 0;
    for (const auto& e : v) {
        nnz += e != zero;
    }
    return 100.0 * static_cast<double>(nnz) / static_cast<double>(v.size());
}

} // namespace detail

/**
 * Level-synchronous BFS on A^T. Only the newly reached vertices form the
 * next input vector; the run stops when the frontier is empty or every
 * vertex has been reached.
 */
inline std::pair<AppResult, AppRun> run_bfs(const EdgeList& g, index_t source, const AppConfig& cfg = {}) {
    using S = BooleanSemiring;
    using V = S::value_type;
    detail::check_source(g, source);
    const index_t n = g.num_nodes;
    MatVecEngine<S> engine(detail::transposed_adjacency<V>(g, [](const Edge&) { return V{1}; }), cfg.machine,
                           cfg.balance, cfg.grid, cfg.host_threads);

    AppRun run;
    run.algorithm = Algorithm::bfs;
    run.source = source;
    run.max_iterations = cfg.max_iterations ? cfg.max_iterations : std::size_t{n} + 1;
    run.policy = cfg.policy;
    run.graph_class = detail::resolve_class(g, cfg);

    AppResult result;
    result.algorithm = Algorithm::bfs;
    result.levels.assign(n, kUnreached);
    result.levels[source] = 0;
    std::vector<std::uint8_t> visited(n, 0);
    visited[source] = 1;
    index_t reached = 1;
    SparseVector<V> frontier{n, {source}, {1}};

    auto density = [&] { return 100.0 * static_cast<double>(frontier.nnz()) / n; };
    auto step = [&](IterationRecord& rec) {
        const InputVector<V> x = rec.mode == KernelMode::spmv ? InputVector<V>(densify(frontier, S::zero()))
                                                              : InputVector<V>(frontier);
        auto res = engine.multiply(rec.kernel, x, cfg.model);
        SparseVector<V> next{n, {}, {}};
        for (index_t i = 0; i < n; ++i) {
            if (res.y.values[i] && !visited[i]) {
                visited[i] = 1;
                result.levels[i] = static_cast<std::uint32_t>(rec.iteration + 1);
                next.indices.push_back(i);
                next.values.push_back(1);
            }
        }
        reached += static_cast<index_t>(next.nnz());
        frontier = std::move(next);
        detail::charge_convergence_check(res.report, n, cfg.machine);
        rec.report = std::move(res.report);
        return frontier.nnz() == 0 || reached == n;
    };
    detail::iterate(run, cfg, step, density);
    if (!run.converged) {
        run.warnings.push_back("bfs stopped at max_iterations with a nonempty frontier");
    }
    return {std::move(result), std::move(run)};
}

/**
 * Bellman-Ford on A^T in the (min, +) semiring. Before the switch the input
 * is the set of distances improved by the previous iteration; afterwards it
 * is the full distance vector.
 */
inline std::pair<AppResult, AppRun> run_sssp(const EdgeList& g, index_t source, const AppConfig& cfg = {}) {
    using S = TropicalSemiring;
    using V = S::value_type;
    detail::check_source(g, source);
    for (const auto& e : g.edges) {
        if (e.weight < 0) {
            throw UnsupportedInputError("negative edge weight " + std::to_string(e.weight) + " on arc " +
                                        std::to_string(e.src) + "->" + std::to_string(e.dst));
        }
    }
    const index_t n = g.num_nodes;
    MatVecEngine<S> engine(detail::transposed_adjacency<V>(g, [](const Edge& e) { return e.weight; }), cfg.machine,
                           cfg.balance, cfg.grid, cfg.host_threads);

    AppRun run;
    run.algorithm = Algorithm::sssp;
    run.source = source;
    run.max_iterations = cfg.max_iterations ? cfg.max_iterations : std::size_t{n} + 1;
    run.policy = cfg.policy;
    run.graph_class = detail::resolve_class(g, cfg);

    std::vector<V> dist(n, S::zero());
    dist[source] = S::one();
    SparseVector<V> improved{n, {source}, {S::one()}};

    auto density = [&] { return 100.0 * static_cast<double>(improved.nnz()) / n; };
    auto step = [&](IterationRecord& rec) {
        InputVector<V> x;
        if (rec.mode == KernelMode::spmv) {
            x = DenseVector<V>{dist};
        } else {
            x = improved;
        }
        auto res = engine.multiply(rec.kernel, x, cfg.model);
        SparseVector<V> next{n, {}, {}};
        for (index_t i = 0; i < n; ++i) {
            if (res.y.values[i] < dist[i]) {
                dist[i] = res.y.values[i];
                next.indices.push_back(i);
                next.values.push_back(dist[i]);
            }
        }
        improved = std::move(next);
        detail::charge_convergence_check(res.report, n, cfg.machine);
        rec.report = std::move(res.report);
        return improved.nnz() == 0;
    };
    detail::iterate(run, cfg, step, density);
    if (!run.converged) {
        run.warnings.push_back("sssp stopped at max_iterations with pending relaxations");
    }
    AppResult result;
    result.algorithm = Algorithm::sssp;
    result.values = std::move(dist);
    return {std::move(result), std::move(run)};
}

/**
 * Personalized PageRank by power iteration:
 *   v' = d * P v + (1 - d) * e_s + d * (mass on dangling vertices) * e_s
 * with P[v][u] = 1 / outdeg(u) for each arc u -> v. Stops when the L1
 * change drops strictly below epsilon.
 */
inline std::pair<AppResult, AppRun> run_ppr(const EdgeList& g, index_t source, const AppConfig& cfg = {}) {
    using S = ArithmeticSemiring;
    using V = S::value_type;
    detail::check_source(g, source);
    if (!(cfg.damping > 0.0 && cfg.damping < 1.0)) {
        throw ConfigError("damping must be in (0, 1)");
    }
    if (!(cfg.epsilon > 0.0)) {
        throw ConfigError("epsilon must be positive");
    }
    const index_t n = g.num_nodes;
    std::vector<std::size_t> outdeg(n, 0);
    for (const auto& e : g.edges) {
        if (e.src != e.dst) {
            ++outdeg[e.src];
        }
    }
    MatVecEngine<S> engine(
        detail::transposed_adjacency<V>(g, [&](const Edge& e) { return 1.0 / static_cast<double>(outdeg[e.src]); }),
        cfg.machine, cfg.balance, cfg.grid, cfg.host_threads);

    AppRun run;
    run.algorithm = Algorithm::ppr;
    run.source = source;
    run.max_iterations = cfg.max_iterations ? cfg.max_iterations : 1000;
    run.epsilon = cfg.epsilon;
    run.damping = cfg.damping;
    run.policy = cfg.policy;
    run.graph_class = detail::resolve_class(g, cfg);

    std::vector<V> v(n, 0.0);
    v[source] = 1.0;
    auto density = [&] { return detail::density_of(v, 0.0); };
    auto step = [&](IterationRecord& rec) {
        InputVector<V> x;
        if (rec.mode == KernelMode::spmv) {
            x = DenseVector<V>{v};
        } else {
            x = sparsify(DenseVector<V>{v}, 0.0);
        }
        auto res = engine.multiply(rec.kernel, x, cfg.model);
        double dangling = 0.0;
        for (index_t u = 0; u < n; ++u) {
            if (outdeg[u] == 0) {
                dangling += v[u];
            }
        }
        std::vector<V> next(n);
        for (index_t i = 0; i < n; ++i) {
            next[i] = cfg.damping * res.y.values[i];
        }
        next[source] += (1.0 - cfg.damping) + cfg.damping * dangling;
        const bool done = convergence_check(Algorithm::ppr, v, next, cfg.epsilon);
        v = std::move(next);
        // Scaling, teleport and the L1 reduction each touch every entry once.
        detail::charge_convergence_check(res.report, 3 * n, cfg.machine);
        rec.report = std::move(res.report);
        return done;
    };
    detail::iterate(run, cfg, step, density);
    if (!run.converged) {
        run.warnings.push_back("ppr did not reach epsilon within max_iterations; returning the last iterate");
    }
    AppResult result;
    result.algorithm = Algorithm::ppr;
    result.values = std::move(v);
    return {std::move(result), std::move(run)};
}

inline std::pair<AppResult, AppRun> run_app(Algorithm a, const EdgeList& g, index_t source, const AppConfig& cfg) {
    switch (a) {
    case Algorithm::bfs:
        return run_bfs(g, source, cfg);
    case Algorithm::sssp:
        return run_sssp(g, source, cfg);
    case Algorithm::ppr:
        return run_ppr(g, source, cfg);
    }
    throw ConfigError("unknown algorithm");
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const PhaseCosts& p) {
    return {{"load_seconds", p.load_seconds},
            {"kernel_seconds", p.kernel_seconds},
            {"retrieve_seconds", p.retrieve_seconds},
            {"merge_seconds", p.merge_seconds},
            {"total_seconds", p.total_seconds()},
            {"kernel_cycles", p.kernel_cycles}};
}

inline nlohmann::json to_json(const AppRun& run) {
    nlohmann::json j;
    j["algorithm"] = to_string(run.algorithm);
    j["source"] = run.source;
    j["policy"] = to_string(run.policy);
    j["graph_class"] = {{"label", to_string(run.graph_class.label)},
                        {"threshold_density_pct", run.graph_class.threshold_density_pct}};
    j["max_iterations"] = run.max_iterations;
    if (run.algorithm == Algorithm::ppr) {
        j["damping"] = run.damping;
        j["epsilon"] = run.epsilon;
    }
    j["converged"] = run.converged;
    j["switched_at_iteration"] = run.switch_state.switched_at_iteration
                                     ? nlohmann::json(*run.switch_state.switched_at_iteration)
                                     : nlohmann::json(nullptr);
    j["warnings"] = run.warnings;
    j["total"] = to_json(run.total());
    auto& its = j["iterations"] = nlohmann::json::array();
    for (const auto& it : run.iterations) {
        its.push_back({{"iteration", it.iteration},
                       {"kernel", to_string(it.kernel)},
                       {"mode", to_string(it.mode)},
                       {"density_pct", it.density_pct},
                       {"converged", it.converged},
                       {"report", to_json(it.report)}});
    }
    return j;
}

inline nlohmann::json to_json(const AppResult& r) {
    nlohmann::json j;
    j["algorithm"] = to_string(r.algorithm);
    if (r.algorithm == Algorithm::bfs) {
        auto& lv = j["levels"] = nlohmann::json::array();
        for (const auto l : r.levels) {
            lv.push_back(l == kUnreached ? nlohmann::json(nullptr) : nlohmann::json(l));
        }
    } else {
        auto& vals = j["values"] = nlohmann::json::array();
        for (const auto v : r.values) {
            vals.push_back(v == TropicalSemiring::zero() && r.algorithm == Algorithm::sssp ? nlohmann::json(nullptr)
                                                                                           : nlohmann::json(v));
        }
    }
    return j;
}

/// iteration,kernel,density_pct,load,kernel,retrieve,merge,total (seconds).
inline std::string iterations_csv(const AppRun& run) {
    std::ostringstream out;
    out.precision(9);
    out << "iteration,kernel,density_pct,load_s,kernel_s,retrieve_s,merge_s,total_s\n";
    for (const auto& it : run.iterations) {
        const auto& p = it.report.phases;
        out << it.iteration << ',' << to_string(it.kernel) << ',' << it.density_pct << ',' << p.load_seconds << ','
            << p.kernel_seconds << ',' << p.retrieve_seconds << ',' << p.merge_seconds << ',' << p.total_seconds()
            << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Threshold sensitivity

struct ToleranceRow {
    double delta_pct = 0.0;
    double threshold_pct = 0.0;
    double total_seconds = 0.0;
    double ratio = 1.0;
};

/**
 * Re-runs the adaptive policy with the class threshold shifted by each delta
 * (percentage points) and reports the modeled total relative to the
 * unshifted run.
 */
inline std::vector<ToleranceRow> tolerance_report(Algorithm a, const EdgeList& g, index_t source, AppConfig cfg,
                                                  const GraphClass& cls, const std::vector<double>& deltas) {
    cfg.policy = KernelPolicy::adaptive;
    cfg.model = true;
    cfg.graph_class = cls;
    const double baseline = run_app(a, g, source, cfg).second.total().total_seconds();
    std::vector<ToleranceRow> rows;
    for (const double d : deltas) {
        ToleranceRow r;
        r.delta_pct = d;
        r.threshold_pct = cls.threshold_density_pct + d;
        if (d == 0.0) {
            r.total_seconds = baseline;
        } else {
            cfg.graph_class = GraphClass{cls.label, r.threshold_pct};
            r.total_seconds = run_app(a, g, source, cfg).second.total().total_seconds();
        }
        r.ratio = baseline > 0 ? r.total_seconds / baseline : 1.0;
        rows.push_back(r);
    }
    return rows;
}

} // namespace pimla
