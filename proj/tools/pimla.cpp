// Command-line front end: application runs, experiment sweeps, partition
// inspection, graph classification and report post-processing.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pimla/pimla.hpp"

namespace fs = std::filesystem;
using namespace pimla;

namespace {

struct GraphOptions {
    std::string path;
    std::string format = "snap-tsv";
    std::string symmetrize = "auto";
    std::string generate;
    index_t nodes = 1u << 14;
    std::uint64_t gen_seed = 42;
    std::uint32_t max_weight = 1;

    void add(CLI::App* app) {
        app->add_option("--graph", path, "edge list file");
        app->add_option("--format", format, "snap-tsv or matrix-market")->check(CLI::IsMember({"snap-tsv", "matrix-market"}));
        app->add_option("--symmetrize", symmetrize, "auto, on or off")->check(CLI::IsMember({"auto", "on", "off"}));
        app->add_option("--generate", generate, "synthetic graph instead of a file")
            ->check(CLI::IsMember({"rmat", "grid", "rmat-scale-free", "grid-regular"}));
        app->add_option("--nodes", nodes, "synthetic graph size");
        app->add_option("--gen-seed", gen_seed, "synthetic graph seed");
        app->add_option("--max-weight", max_weight, "hash arc weights into [1, max]; 1 keeps stored weights");
    }

    DatasetSpec spec() const {
        if (path.empty() == generate.empty()) {
            throw ConfigError("give exactly one of --graph or --generate");
        }
        DatasetSpec d;
        if (!path.empty()) {
            d.path = path;
            d.format = parse_format(format);
            d.symmetrize = parse_symmetrize(symmetrize);
        } else {
            d.generator = parse_generator(generate);
            d.nodes = nodes;
            d.generator_seed = gen_seed;
        }
        d.max_weight = max_weight;
        return d;
    }
};

struct MachineOptions {
    std::string path;
    std::optional<std::uint32_t> dpus;
    std::optional<std::uint32_t> tasklets;

    void add(CLI::App* app) {
        app->add_option("--machine", path, "machine config file (key = value lines)");
        app->add_option("--dpus", dpus, "number of DPUs");
        app->add_option("--tasklets", tasklets, "tasklets per DPU");
    }

    MachineConfig config() const {
        MachineConfig cfg = path.empty() ? MachineConfig{} : load_machine_config(path);
        if (dpus) {
            cfg.num_dpus = *dpus;
        }
        if (tasklets) {
            cfg.tasklets = *tasklets;
        }
        cfg.validate();
        return cfg;
    }
};

std::optional<Grid> parse_grid(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    const auto x = s.find('x');
    try {
        if (x != std::string::npos) {
            return Grid{static_cast<std::uint32_t>(std::stoul(s.substr(0, x))),
                        static_cast<std::uint32_t>(std::stoul(s.substr(x + 1)))};
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("grid must look like 8x16");
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    write_atomic(path, content);
}

// --- run -------------------------------------------------------------------

struct RunOptions {
    std::string spec_path;
    std::string out_dir;
    GraphOptions graph;
    MachineOptions machine;
    std::string algorithm = "bfs";
    index_t source = 0;
    std::string kernel = "adaptive";
    std::string spmspv_variant = "spmspv-csc-2d";
    std::string spmv_variant = "spmv-coo-2d";
    std::optional<double> threshold_override;
    double cv_cut = 0.5;
    std::optional<double> avg_degree_split;
    std::string grid;
    bool balance_nnz = false;
    double damping = 0.85;
    double epsilon = 1e-6;
    std::size_t max_iterations = 0;
    unsigned host_threads = 1;
    unsigned workers = 1;
};

int run_command(const RunOptions& o) {
    if (!o.spec_path.empty()) {
        auto spec = load_experiment(o.spec_path);
        if (o.workers > 1) {
            spec.workers = o.workers;
        }
        const fs::path out = o.out_dir.empty() ? fs::path("pimla-out") : fs::path(o.out_dir);
        const auto res = run_experiment(spec, out);
        std::cout << res.manifest.dump(2) << '\n';
        return 0;
    }
    const EdgeList g = load_dataset(o.graph.spec());
    AppConfig cfg;
    cfg.machine = o.machine.config();
    cfg.policy = parse_policy(o.kernel);
    cfg.spmspv_kernel = parse_kernel(o.spmspv_variant);
    cfg.spmv_kernel = parse_kernel(o.spmv_variant);
    if (is_spmv(cfg.spmspv_kernel) || !is_spmv(cfg.spmv_kernel)) {
        throw ConfigError("--spmspv-variant must be a spmspv kernel and --spmv-variant a spmv kernel");
    }
    cfg.classifier.cv_cut = o.cv_cut;
    cfg.classifier.avg_degree_split = o.avg_degree_split;
    cfg.classifier.threshold_override_pct = o.threshold_override;
    cfg.grid = parse_grid(o.grid);
    cfg.balance = o.balance_nnz ? Balance::by_nnz : Balance::by_rows;
    cfg.damping = o.damping;
    cfg.epsilon = o.epsilon;
    cfg.max_iterations = o.max_iterations;
    cfg.host_threads = o.host_threads;
    const auto [result, run] = run_app(parse_algorithm(o.algorithm), g, o.source, cfg);
    for (const auto& w : run.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    nlohmann::json j;
    j["run"] = to_json(run);
    j["result"] = to_json(result);
    if (o.out_dir.empty()) {
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (ec) {
        throw IoError("cannot create '" + o.out_dir + "': " + ec.message());
    }
    write_atomic(fs::path(o.out_dir) / "run.json", j.dump(2) + "\n");
    write_atomic(fs::path(o.out_dir) / "iterations.csv", iterations_csv(run));
    const auto t = run.total();
    std::cout << to_string(run.algorithm) << " " << to_string(run.policy) << ": " << run.iterations.size()
              << " iterations, modeled total " << t.total_seconds() << " s\n";
    return 0;
}

// --- partition-inspect ---------------------------------------------------------

struct InspectOptions {
    GraphOptions graph;
    MachineOptions machine;
    std::string strategy = "two-d";
    std::string grid;
    bool balance_nnz = false;
    std::string semiring = "bfs";
    std::string save_snapshot;
    std::string load_snapshot;
    std::string out;
};

template <Semiring S>
nlohmann::json inspect(const InspectOptions& o, const MachineConfig& cfg) {
    using V = typename S::value_type;
    PartitionPlan<V> plan;
    if (!o.load_snapshot.empty()) {
        std::ifstream in(o.load_snapshot, std::ios::binary);
        if (!in) {
            throw IoError("cannot open snapshot '" + o.load_snapshot + "'");
        }
        plan = read_snapshot<V>(in);
    } else {
        const EdgeList g = load_dataset(o.graph.spec());
        const auto a = detail::transposed_adjacency<V>(g, [](const Edge& e) { return static_cast<V>(e.weight); });
        plan = partition(a, parse_strategy(o.strategy), cfg.num_dpus,
                         o.balance_nnz ? Balance::by_nnz : Balance::by_rows, parse_grid(o.grid));
    }
    if (!o.save_snapshot.empty()) {
        std::ofstream out(o.save_snapshot, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write snapshot '" + o.save_snapshot + "'");
        }
        write_snapshot(out, plan);
    }
    const InputVector<V> dense = DenseVector<V>{std::vector<V>(plan.num_cols, S::one())};
    return plan_summary(plan, transfer_volume(plan, dense, cfg.elem_bytes, cfg.idx_bytes));
}

int inspect_command(const InspectOptions& o) {
    const auto cfg = o.machine.config();
    const auto j = with_semiring(parse_semiring(o.semiring), [&](auto s) { return inspect<decltype(s)>(o, cfg); });
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

// --- classify --------------------------------------------------------------

struct ClassifyOptions {
    GraphOptions graph;
    std::optional<double> avg;
    std::optional<double> std_dev;
    double cv_cut = 0.5;
    std::optional<double> avg_degree_split;
    std::optional<double> threshold_override;
    std::string convention = "out";
    std::string fit;
};

int classify_command(const ClassifyOptions& o) {
    if (!o.fit.empty()) {
        std::ifstream in(o.fit);
        if (!in) {
            throw IoError("cannot open '" + o.fit + "'");
        }
        const auto rows = load_labeled_stats(in);
        const double cut = fit_cv_cut(rows);
        nlohmann::json j;
        j["fitted_cv_cut"] = cut;
        auto& arr = j["rows"] = nlohmann::json::array();
        ClassifierConfig cc;
        cc.cv_cut = cut;
        for (const auto& r : rows) {
            const auto c = classify(r.stats, cc);
            arr.push_back({{"name", r.name}, {"label", to_string(r.label)}, {"predicted", to_string(c.label)}});
        }
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    GraphStats stats;
    if (o.avg || o.std_dev) {
        if (!o.avg || !o.std_dev) {
            throw ConfigError("--avg-degree and --degree-std go together");
        }
        stats.avg_degree = *o.avg;
        stats.degree_std = *o.std_dev;
    } else {
        const auto conv = o.convention == "in"    ? DegreeConvention::in
                          : o.convention == "total" ? DegreeConvention::total
                                                    : DegreeConvention::out;
        stats = compute_stats(load_dataset(o.graph.spec()), conv);
    }
    ClassifierConfig cc;
    cc.cv_cut = o.cv_cut;
    cc.avg_degree_split = o.avg_degree_split;
    cc.threshold_override_pct = o.threshold_override;
    const auto c = classify(stats, cc);
    nlohmann::json j;
    j["stats"] = {{"num_nodes", stats.num_nodes},   {"num_edges", stats.num_edges},
                  {"avg_degree", stats.avg_degree}, {"degree_std", stats.degree_std},
                  {"sparsity", stats.sparsity},     {"cv", degree_cv(stats)}};
    j["label"] = to_string(c.label);
    j["threshold_density_pct"] = c.threshold_density_pct;
    std::cout << j.dump(2) << '\n';
    return 0;
}

// --- report ----------------------------------------------------------------

struct ReportOptions {
    std::string dir;
    std::string normalize_kernel;
    std::optional<std::uint32_t> normalize_dpus;
    std::string out;
};

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p, std::vector<std::string>& header) {
    std::ifstream in(p);
    if (!in) {
        throw IoError("cannot open '" + p.string() + "'");
    }
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) {
            cells.push_back(c);
        }
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) {
        throw ConsistencyError("'" + p.string() + "' is empty");
    }
    header = split(line);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ConsistencyError("'" + p.string() + "': ragged row");
        }
        std::map<std::string, std::string> row;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            row[header[k]] = cells[k];
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Rewrites breakdown.csv with phase columns divided by a reference row's total.
int report_command(const ReportOptions& o) {
    std::vector<std::string> header;
    const auto rows = read_csv(fs::path(o.dir) / "breakdown.csv", header);
    const std::vector<std::string> phases = {"load_s", "kernel_s", "retrieve_s", "merge_s", "total_s"};
    auto key = [&](const auto& r, bool by_kernel) {
        return by_kernel ? r.at("density_pct") + "/" + r.at("dpus")
                         : r.at("kernel") + "/" + r.at("density_pct");
    };
    const bool by_kernel = !o.normalize_kernel.empty();
    std::map<std::string, double> reference;
    if (by_kernel || o.normalize_dpus) {
        const std::string want = by_kernel ? to_string(parse_kernel(o.normalize_kernel))
                                           : std::to_string(*o.normalize_dpus);
        for (const auto& r : rows) {
            if ((by_kernel ? r.at("kernel") : r.at("dpus")) == want) {
                reference[key(r, by_kernel)] = std::stod(r.at("total_s"));
            }
        }
        if (reference.empty()) {
            throw ConfigError("no reference rows for '" + want + "'");
        }
    }
    std::ostringstream out;
    out << "kernel,density_pct,dpus,load_s,kernel_s,retrieve_s,merge_s,total_s\n";
    for (const auto& r : rows) {
        double scale = 1.0;
        if (!reference.empty()) {
            const auto it = reference.find(key(r, by_kernel));
            if (it == reference.end() || it->second <= 0) {
                continue;
            }
            scale = 1.0 / it->second;
        }
        out << r.at("kernel") << ',' << r.at("density_pct") << ',' << r.at("dpus");
        for (const auto& p : phases) {
            out << ',' << fmt_double(std::stod(r.at(p)) * scale);
        }
        out << '\n';
    }
    emit(o.out, out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pimla: simulated processing-in-memory sparse linear algebra for graph analytics"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "run an application or an experiment spec");
    run_cmd->add_option("--spec", run.spec_path, "experiment spec (JSON); runs the sweep instead of one application");
    run_cmd->add_option("--out", run.out_dir, "output directory");
    run_cmd->add_option("--workers", run.workers, "parallel experiment grid points");
    run.graph.add(run_cmd);
    run.machine.add(run_cmd);
    run_cmd->add_option("--algorithm", run.algorithm)->check(CLI::IsMember({"bfs", "sssp", "ppr"}));
    run_cmd->add_option("--source", run.source);
    run_cmd->add_option("--kernel", run.kernel, "kernel policy")->check(CLI::IsMember({"adaptive", "spmspv", "spmv"}));
    run_cmd->add_option("--spmspv-variant", run.spmspv_variant);
    run_cmd->add_option("--spmv-variant", run.spmv_variant);
    run_cmd->add_option("--threshold-override", run.threshold_override, "switch density in percent");
    run_cmd->add_option("--cv-cut", run.cv_cut);
    run_cmd->add_option("--avg-degree-split", run.avg_degree_split);
    run_cmd->add_option("--grid", run.grid, "two-d grid as ROWSxCOLS");
    run_cmd->add_flag("--balance-nnz", run.balance_nnz, "balance tiles by nonzeros instead of index ranges");
    run_cmd->add_option("--damping", run.damping);
    run_cmd->add_option("--epsilon", run.epsilon);
    run_cmd->add_option("--max-iterations", run.max_iterations);
    run_cmd->add_option("--host-threads", run.host_threads);

    InspectOptions ins;
    auto* ins_cmd = app.add_subcommand("partition-inspect", "print a partition plan and its transfer volumes");
    ins.graph.add(ins_cmd);
    ins.machine.add(ins_cmd);
    ins_cmd->add_option("--strategy", ins.strategy)->check(CLI::IsMember({"row-wise", "column-wise", "two-d"}));
    ins_cmd->add_option("--grid", ins.grid, "two-d grid as ROWSxCOLS");
    ins_cmd->add_flag("--balance-nnz", ins.balance_nnz);
    ins_cmd->add_option("--semiring", ins.semiring, "value kind of the stored matrix")
        ->check(CLI::IsMember({"bfs", "sssp", "ppr"}));
    ins_cmd->add_option("--save-snapshot", ins.save_snapshot);
    ins_cmd->add_option("--load-snapshot", ins.load_snapshot);
    ins_cmd->add_option("--out", ins.out);

    ClassifyOptions cls;
    auto* cls_cmd = app.add_subcommand("classify", "classify a graph as regular or scale-free");
    cls.graph.add(cls_cmd);
    cls_cmd->add_option("--avg-degree", cls.avg);
    cls_cmd->add_option("--degree-std", cls.std_dev);
    cls_cmd->add_option("--cv-cut", cls.cv_cut);
    cls_cmd->add_option("--avg-degree-split", cls.avg_degree_split);
    cls_cmd->add_option("--threshold-override", cls.threshold_override);
    cls_cmd->add_option("--degree-convention", cls.convention)->check(CLI::IsMember({"out", "in", "total"}));
    cls_cmd->add_option("--fit", cls.fit, "CSV of name,avg_degree,degree_std,label to fit the cv cut");

    ReportOptions rep;
    auto* rep_cmd = app.add_subcommand("report", "normalize an experiment's breakdown.csv");
    rep_cmd->add_option("--dir", rep.dir, "experiment output directory")->required();
    auto* by_kernel = rep_cmd->add_option("--normalize-to-kernel", rep.normalize_kernel);
    rep_cmd->add_option("--normalize-to-dpus", rep.normalize_dpus)->excludes(by_kernel);
    rep_cmd->add_option("--out", rep.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::validation);
    }
    try {
        if (*run_cmd) {
            return run_command(run);
        }
        if (*ins_cmd) {
            return inspect_command(ins);
        }
        if (*cls_cmd) {
            return classify_command(cls);
        }
        return report_command(rep);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::consistency);
    }
}
