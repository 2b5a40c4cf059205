#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "pimla/apps.hpp"
#include "pimla/engine.hpp"
#include "pimla/graph_io.hpp"
#include "pimla/kernels.hpp"
#include "pimla/machine.hpp"

namespace pimla {

inline constexpr const char* kVersion = "0.3.0";

/// `round(n * density / 100)` distinct uniformly drawn indices, at least one, all set to `one`.
template <class V>
SparseVector<V> synth_input_vector(index_t n, double density_pct, std::uint64_t seed, V one) {
    if (!(density_pct > 0.0 && density_pct <= 100.0)) {
        throw ConfigError("density " + std::to_string(density_pct) + " outside (0, 100]");
    }
    if (n == 0) {
        throw DimensionError("cannot draw an input vector of length 0");
    }
    auto k = static_cast<index_t>(std::llround(static_cast<double>(n) * density_pct / 100.0));
    k = std::clamp<index_t>(k, 1, n);
    // Floyd's sampling: k draws, each distinct.
    std::mt19937_64 rng(seed);
    std::vector<index_t> picked;
    picked.reserve(k);
    std::vector<std::uint8_t> taken(n, 0);
    for (index_t j = n - k; j < n; ++j) {
        const auto t = static_cast<index_t>(std::uniform_int_distribution<std::uint64_t>(0, j)(rng));
        const index_t chosen = taken[t] ? j : t;
        taken[chosen] = 1;
        picked.push_back(chosen);
    }
    std::sort(picked.begin(), picked.end());
    SparseVector<V> x;
    x.length = n;
    x.indices = std::move(picked);
    x.values.assign(k, one);
    return x;
}

struct DatasetSpec {
    std::optional<std::string> path;
    InputFormat format = InputFormat::snap_tsv;
    Symmetrize symmetrize = Symmetrize::automatic;
    GeneratorKind generator = GeneratorKind::rmat_scale_free;
    index_t nodes = 1u << 14;
    std::uint64_t generator_seed = 42;
    /// Hashed integer weights in [1, max_weight]; 1 keeps the stored weights.
    std::uint32_t max_weight = 1;

    std::string name() const {
        if (path) {
            return std::filesystem::path(*path).filename().string();
        }
        return (generator == GeneratorKind::grid_regular ? "grid-" : "rmat-") + std::to_string(nodes);
    }
};

struct ExperimentSpec {
    DatasetSpec dataset;
    SemiringKind semiring = SemiringKind::bfs;
    std::vector<KernelId> variants;
    std::vector<double> densities;
    std::vector<std::uint32_t> dpu_counts;
    /// When set, every variant must use this partitioning strategy.
    std::optional<Strategy> strategy;
    std::optional<Algorithm> algorithm;
    KernelPolicy policy = KernelPolicy::adaptive;
    index_t source = 0;
    MachineConfig machine;
    std::optional<std::string> machine_path;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

inline SemiringKind parse_semiring(const std::string& s) {
    if (s == "bfs" || s == "boolean") {
        return SemiringKind::bfs;
    }
    if (s == "sssp" || s == "tropical") {
        return SemiringKind::sssp;
    }
    if (s == "ppr" || s == "arithmetic") {
        return SemiringKind::ppr;
    }
    throw ConfigError("unknown semiring '" + s + "'");
}

inline std::string to_string(SemiringKind k) {
    switch (k) {
    case SemiringKind::bfs:
        return "bfs";
    case SemiringKind::sssp:
        return "sssp";
    case SemiringKind::ppr:
        break;
    }
    return "ppr";
}

inline Strategy parse_strategy(const std::string& s) {
    if (s == "row-wise") {
        return Strategy::row_wise;
    }
    if (s == "column-wise") {
        return Strategy::column_wise;
    }
    if (s == "two-d" || s == "2d") {
        return Strategy::two_d;
    }
    throw ConfigError("unknown strategy '" + s + "'");
}

inline InputFormat parse_format(const std::string& s) {
    if (s == "snap-tsv" || s == "snap") {
        return InputFormat::snap_tsv;
    }
    if (s == "matrix-market" || s == "mtx") {
        return InputFormat::matrix_market;
    }
    throw ConfigError("unknown input format '" + s + "'");
}

inline Symmetrize parse_symmetrize(const std::string& s) {
    if (s == "auto") {
        return Symmetrize::automatic;
    }
    if (s == "on" || s == "true") {
        return Symmetrize::on;
    }
    if (s == "off" || s == "false") {
        return Symmetrize::off;
    }
    throw ConfigError("symmetrize must be auto, on or off");
}

inline GeneratorKind parse_generator(const std::string& s) {
    if (s == "grid-regular" || s == "grid") {
        return GeneratorKind::grid_regular;
    }
    if (s == "rmat-scale-free" || s == "rmat") {
        return GeneratorKind::rmat_scale_free;
    }
    throw ConfigError("unknown generator '" + s + "'");
}

/// Rejects empty axes, densities outside (0, 100] and variants that contradict `strategy`.
inline void validate(const ExperimentSpec& s) {
    if (s.dpu_counts.empty()) {
        throw ConfigError("experiment needs at least one dpu count");
    }
    if (s.variants.empty() && !s.algorithm) {
        throw ConfigError("experiment needs kernel variants or an algorithm");
    }
    if (!s.variants.empty() && s.densities.empty()) {
        throw ConfigError("kernel variants need at least one density");
    }
    for (const double d : s.densities) {
        if (!(d > 0.0 && d <= 100.0)) {
            throw ConfigError("density " + std::to_string(d) + " outside (0, 100]");
        }
    }
    for (const auto d : s.dpu_counts) {
        if (d == 0) {
            throw ConfigError("dpu count must be positive");
        }
    }
    if (s.strategy) {
        for (const auto v : s.variants) {
            if (kernel_traits(v).strategy != *s.strategy) {
                throw ConfigError(to_string(v) + " cannot run on a " + to_string(*s.strategy) + " plan");
            }
        }
    }
    if (s.workers == 0) {
        throw ConfigError("workers must be positive");
    }
    s.machine.validate();
}

/// Reads the JSON form; `base_dir` resolves relative dataset and machine paths.
inline ExperimentSpec parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentSpec s;
    try {
        auto resolve = [&](const std::string& p) {
            const std::filesystem::path fp(p);
            return (fp.is_relative() && !base_dir.empty() ? base_dir / fp : fp).string();
        };
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            s.dataset.path = resolve(d.at("path").get<std::string>());
            s.dataset.format = parse_format(d.value("format", "snap-tsv"));
            s.dataset.symmetrize = parse_symmetrize(d.value("symmetrize", "auto"));
            s.dataset.max_weight = d.value("max_weight", 1u);
        } else if (j.contains("generator")) {
            const auto& g = j.at("generator");
            s.dataset.generator = parse_generator(g.at("kind").get<std::string>());
            s.dataset.nodes = g.value("nodes", index_t{1u << 14});
            s.dataset.generator_seed = g.value("seed", std::uint64_t{42});
            s.dataset.max_weight = g.value("max_weight", 1u);
        } else {
            throw ConfigError("experiment needs a dataset or a generator");
        }
        s.semiring = parse_semiring(j.value("semiring", "bfs"));
        for (const auto& v : j.value("variants", std::vector<std::string>{})) {
            s.variants.push_back(parse_kernel(v));
        }
        s.densities = j.value("densities", std::vector<double>{});
        s.dpu_counts = j.value("dpus", std::vector<std::uint32_t>{64});
        if (j.contains("strategy")) {
            s.strategy = parse_strategy(j.at("strategy").get<std::string>());
        }
        if (j.contains("algorithm")) {
            s.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
        }
        s.policy = parse_policy(j.value("policy", "adaptive"));
        s.source = j.value("source", index_t{0});
        if (j.contains("machine")) {
            s.machine_path = resolve(j.at("machine").get<std::string>());
            s.machine = load_machine_config(*s.machine_path);
        }
        if (j.contains("tasklets")) {
            s.machine.tasklets = j.at("tasklets").get<std::uint32_t>();
        }
        s.seed = j.value("seed", std::uint64_t{1});
        s.workers = j.value("workers", 1u);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment spec: ") + e.what());
    }
    validate(s);
    return s;
}

inline ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open experiment spec '" + path + "'");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("experiment spec is not valid JSON: ") + e.what());
    }
    return parse_experiment(j, std::filesystem::path(path).parent_path());
}

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Shortest decimal that parses back to the same double.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Writes through a sibling temporary and renames, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write '" + tmp.string() + "'");
        }
        out << content;
        if (!out.flush()) {
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline EdgeList load_dataset(const DatasetSpec& d) {
    EdgeList g;
    if (d.path) {
        std::ifstream in(*d.path);
        if (!in) {
            throw IoError("cannot open dataset '" + *d.path + "'");
        }
        LoadOptions opts;
        opts.format = d.format;
        opts.symmetrize = d.symmetrize;
        g = load_edge_list(in, opts);
    } else {
        g = generate_synthetic(d.generator, d.nodes, {}, d.generator_seed);
    }
    return d.max_weight > 1 ? with_hashed_weights(std::move(g), d.max_weight, d.generator_seed) : g;
}

/// Canonical JSON of every input that affects the results; the manifest hash is taken over its dump.
inline nlohmann::json to_json(const ExperimentSpec& s) {
    nlohmann::json j;
    auto& d = j["dataset"];
    if (s.dataset.path) {
        d["path"] = *s.dataset.path;
        d["format"] = s.dataset.format == InputFormat::snap_tsv ? "snap-tsv" : "matrix-market";
        d["symmetrize"] = s.dataset.symmetrize == Symmetrize::automatic ? "auto"
                          : s.dataset.symmetrize == Symmetrize::on      ? "on"
                                                                        : "off";
        d["content_fnv1a"] = hex64(fnv1a(read_file(*s.dataset.path)));
    } else {
        d["generator"] = s.dataset.generator == GeneratorKind::grid_regular ? "grid-regular" : "rmat-scale-free";
        d["nodes"] = s.dataset.nodes;
        d["seed"] = s.dataset.generator_seed;
    }
    d["max_weight"] = s.dataset.max_weight;
    j["semiring"] = to_string(s.semiring);
    auto& vs = j["variants"] = nlohmann::json::array();
    for (const auto v : s.variants) {
        vs.push_back(to_string(v));
    }
    j["densities"] = s.densities;
    j["dpus"] = s.dpu_counts;
    j["strategy"] = s.strategy ? nlohmann::json(to_string(*s.strategy)) : nlohmann::json(nullptr);
    j["algorithm"] = s.algorithm ? nlohmann::json(to_string(*s.algorithm)) : nlohmann::json(nullptr);
    j["policy"] = to_string(s.policy);
    j["source"] = s.source;
    j["machine"] = dump_machine_config(s.machine);
    j["seed"] = s.seed;
    return j;
}

struct GridPoint {
    std::uint32_t num_dpus = 0;
    KernelId kernel = KernelId::spmspv_csc_2d;
    double density_pct = 0.0;
    std::size_t x_nnz = 0;
    ExecutionReport report;
};

struct AppPoint {
    std::uint32_t num_dpus = 0;
    AppRun run;
};

struct ExperimentResult {
    std::vector<GridPoint> points;
    std::vector<AppPoint> apps;
    nlohmann::json manifest;
};

namespace detail {

/// Runs `task(i)` for i in [0, n) on up to `workers` threads.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& task) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

template <Semiring S, class F>
void sweep_kernels(const ExperimentSpec& spec, const EdgeList& g, F&& value_of, std::vector<GridPoint>& points) {
    using V = typename S::value_type;
    const auto a = transposed_adjacency<V>(g, value_of);
    std::vector<SparseVector<V>> inputs;
    for (std::size_t k = 0; k < spec.densities.size(); ++k) {
        inputs.push_back(synth_input_vector<V>(a.num_cols, spec.densities[k], spec.seed + k, S::one()));
    }
    const std::size_t per_d = spec.variants.size() * spec.densities.size();
    for (std::size_t di = 0; di < spec.dpu_counts.size(); ++di) {
        MachineConfig cfg = spec.machine;
        cfg.num_dpus = spec.dpu_counts[di];
        MatVecEngine<S> engine(a, cfg);
        for (const auto v : spec.variants) {
            engine.plan(kernel_traits(v).strategy);
        }
        // Plans are built above, so workers only read shared engine state.
        parallel_for(per_d, spec.workers, [&](std::size_t i) {
            const KernelId id = spec.variants[i / spec.densities.size()];
            const std::size_t k = i % spec.densities.size();
            const InputVector<V> x =
                is_spmv(id) ? InputVector<V>(densify(inputs[k], S::zero())) : InputVector<V>(inputs[k]);
            auto& p = points[di * per_d + i];
            p.num_dpus = cfg.num_dpus;
            p.kernel = id;
            p.density_pct = spec.densities[k];
            p.x_nnz = inputs[k].nnz();
            p.report = engine.multiply(id, x).report;
        });
    }
}

inline std::string breakdown_csv(const std::string& dataset, SemiringKind sr, const std::vector<GridPoint>& pts) {
    std::ostringstream out;
    out << "dataset,semiring,kernel,density_pct,dpus,x_nnz,load_s,kernel_s,retrieve_s,merge_s,total_s,"
           "kernel_cycles,load_bytes,retrieve_bytes,merge_ops\n";
    for (const auto& p : pts) {
        const auto& ph = p.report.phases;
        out << dataset << ',' << to_string(sr) << ',' << to_string(p.kernel) << ',' << fmt_double(p.density_pct)
            << ',' << p.num_dpus << ',' << p.x_nnz << ',' << fmt_double(ph.load_seconds) << ','
            << fmt_double(ph.kernel_seconds) << ',' << fmt_double(ph.retrieve_seconds) << ','
            << fmt_double(ph.merge_seconds) << ',' << fmt_double(ph.total_seconds()) << ',' << ph.kernel_cycles << ','
            << p.report.volume.load_bytes << ',' << p.report.volume.retrieve_bytes << ','
            << p.report.volume.merge_ops << '\n';
    }
    return out.str();
}

inline std::string stalls_csv(const std::vector<GridPoint>& pts) {
    std::ostringstream out;
    out << "kernel,density_pct,dpus,total_cycles,issue_share,memory_share,revolver_share,rf_share,"
           "avg_active_threads\n";
    for (const auto& p : pts) {
        const auto t = p.report.totals();
        const auto s = p.report.stall_shares();
        out << to_string(p.kernel) << ',' << fmt_double(p.density_pct) << ',' << p.num_dpus << ',' << t.total << ','
            << fmt_double(s[0]) << ',' << fmt_double(s[1]) << ',' << fmt_double(s[2]) << ',' << fmt_double(s[3])
            << ',' << fmt_double(p.report.avg_active_threads()) << '\n';
    }
    return out.str();
}

inline std::string instmix_csv(const std::vector<GridPoint>& pts) {
    std::ostringstream out;
    out << "kernel,density_pct,dpus,category,count,share\n";
    for (const auto& p : pts) {
        for (std::size_t k = 0; k < kEventKinds; ++k) {
            const auto kind = static_cast<EventKind>(k);
            out << to_string(p.kernel) << ',' << fmt_double(p.density_pct) << ',' << p.num_dpus << ','
                << kEventKindNames[k] << ',' << p.report.mix.count(kind) << ','
                << fmt_double(p.report.mix.share(kind)) << '\n';
        }
    }
    return out.str();
}

inline std::string app_iterations_csv(const std::vector<AppPoint>& apps) {
    std::ostringstream out;
    out << "dpus,algorithm,policy,iteration,mode,kernel,density_pct,load_s,kernel_s,retrieve_s,merge_s,total_s,"
           "converged\n";
    for (const auto& a : apps) {
        for (const auto& it : a.run.iterations) {
            const auto& ph = it.report.phases;
            out << a.num_dpus << ',' << to_string(a.run.algorithm) << ',' << to_string(a.run.policy) << ','
                << it.iteration << ',' << to_string(it.mode) << ',' << to_string(it.kernel) << ','
                << fmt_double(it.density_pct) << ',' << fmt_double(ph.load_seconds) << ','
                << fmt_double(ph.kernel_seconds) << ',' << fmt_double(ph.retrieve_seconds) << ','
                << fmt_double(ph.merge_seconds) << ',' << fmt_double(ph.total_seconds()) << ','
                << (it.converged ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

} // namespace detail

/**
 * Runs the cartesian product of the spec's axes and, when `out_dir` is
 * non-empty, writes breakdown.csv, stalls.csv, instmix.csv, iterations.csv
 * (algorithm runs) and manifest.json there. Output is independent of the
 * worker count.
 */
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir = {}) {
    validate(spec);
    const EdgeList g = load_dataset(spec.dataset);
    if (spec.source >= g.num_nodes && spec.algorithm) {
        throw DimensionError("source " + std::to_string(spec.source) + " outside the graph");
    }
    ExperimentResult res;
    res.points.resize(spec.dpu_counts.size() * spec.variants.size() * spec.densities.size());
    if (!spec.variants.empty()) {
        std::vector<std::size_t> outdeg(g.num_nodes, 0);
        for (const auto& e : g.edges) {
            ++outdeg[e.src];
        }
        switch (spec.semiring) {
        case SemiringKind::bfs:
            detail::sweep_kernels<BooleanSemiring>(spec, g, [](const Edge&) { return std::uint8_t{1}; }, res.points);
            break;
        case SemiringKind::sssp:
            detail::sweep_kernels<TropicalSemiring>(spec, g, [](const Edge& e) { return e.weight; }, res.points);
            break;
        case SemiringKind::ppr:
            detail::sweep_kernels<ArithmeticSemiring>(
                spec, g, [&](const Edge& e) { return 1.0 / static_cast<double>(outdeg[e.src]); }, res.points);
            break;
        }
    }
    if (spec.algorithm) {
        res.apps.resize(spec.dpu_counts.size());
        detail::parallel_for(spec.dpu_counts.size(), spec.workers, [&](std::size_t i) {
            AppConfig cfg;
            cfg.machine = spec.machine;
            cfg.machine.num_dpus = spec.dpu_counts[i];
            cfg.policy = spec.policy;
            res.apps[i].num_dpus = cfg.machine.num_dpus;
            res.apps[i].run = run_app(*spec.algorithm, g, spec.source, cfg).second;
        });
    }

    std::map<std::string, std::string> files;
    if (!spec.variants.empty()) {
        files["breakdown.csv"] = detail::breakdown_csv(spec.dataset.name(), spec.semiring, res.points);
        files["stalls.csv"] = detail::stalls_csv(res.points);
        files["instmix.csv"] = detail::instmix_csv(res.points);
    }
    if (spec.algorithm) {
        files["iterations.csv"] = detail::app_iterations_csv(res.apps);
    }
    const auto inputs = to_json(spec);
    auto& m = res.manifest;
    m["tool"] = "pimla";
    m["version"] = kVersion;
    m["seed"] = spec.seed;
    m["spec_hash"] = hex64(fnv1a(inputs.dump()));
    m["inputs"] = inputs;
    auto& fj = m["files"] = nlohmann::json::object();
    for (const auto& [name, content] : files) {
        fj[name] = {{"fnv1a", hex64(fnv1a(content))}, {"bytes", content.size()}};
    }
    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) {
            throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
        }
        for (const auto& [name, content] : files) {
            write_atomic(out_dir / name, content);
        }
        write_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
    }
    return res;
}

} // namespace pimla
