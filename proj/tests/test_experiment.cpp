#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "support.hpp"

using namespace pimla;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pimla-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json fixture_spec() {
    return json{{"generator", {{"kind", "rmat"}, {"nodes", 1024}, {"seed", 42}}},
                {"semiring", "bfs"},
                {"variants", {"csc-r", "csc-c", "csc-2d", "coo"}},
                {"densities", {1, 10, 50}},
                {"dpus", {64}}};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) {
            cells.push_back(c);
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace

TEST(Experiment, SynthVectorCounts) {
    const auto x = synth_input_vector<std::uint8_t>(100, 10, 7, 1);
    EXPECT_EQ(x.nnz(), 10u);
    validate(x, std::uint8_t{0});
    EXPECT_EQ(synth_input_vector<std::uint8_t>(100, 0.4, 7, 1).nnz(), 1u);
    EXPECT_EQ(synth_input_vector<double>(100, 100, 7, 1.0).nnz(), 100u);
    EXPECT_EQ(synth_input_vector<double>(1000, 33.3, 3, 1.0).nnz(), 333u);
    EXPECT_EQ(synth_input_vector<std::uint8_t>(100, 10, 7, 1), x);
    EXPECT_NE(synth_input_vector<std::uint8_t>(100, 10, 8, 1).indices, x.indices);
    EXPECT_THROW(synth_input_vector<double>(100, 0, 1, 1.0), ConfigError);
    EXPECT_THROW(synth_input_vector<double>(100, 100.5, 1, 1.0), ConfigError);
}

// Floyd sampling should hit every index about equally often.
TEST(Experiment, SynthVectorIsRoughlyUniform) {
    std::vector<int> hits(50, 0);
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        for (const auto i : synth_input_vector<double>(50, 20, seed, 1.0).indices) {
            ++hits[i];
        }
    }
    // Expected 400 per index; a 25% band is over 6 standard deviations.
    for (const auto h : hits) {
        EXPECT_GT(h, 300);
        EXPECT_LT(h, 500);
    }
}

TEST(Experiment, ValidationRules) {
    auto j = fixture_spec();
    EXPECT_NO_THROW(parse_experiment(j));
    j["densities"] = {200};
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j = fixture_spec();
    j["strategy"] = "two-d";
    j["variants"] = {"csc-c"};
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j = fixture_spec();
    j["dpus"] = json::array();
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j = fixture_spec();
    j["variants"] = {"csc-q"};
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j = fixture_spec();
    j.erase("generator");
    EXPECT_THROW(parse_experiment(j), ConfigError);
    j = fixture_spec();
    j["densities"] = "ten";
    EXPECT_THROW(parse_experiment(j), ConfigError);
    EXPECT_THROW(load_experiment("/nonexistent/spec.json"), IoError);
}

TEST(Experiment, MissingDatasetIsIoError) {
    json j = fixture_spec();
    j.erase("generator");
    j["dataset"] = {{"path", "/nonexistent/graph.txt"}};
    EXPECT_THROW(run_experiment(parse_experiment(j)), IoError);
}

TEST(Experiment, BreakdownHasOneRowPerGridPoint) {
    const auto dir = scratch_dir("grid");
    const auto res = run_experiment(parse_experiment(fixture_spec()), dir);
    EXPECT_EQ(res.points.size(), 12u);
    const auto rows = csv_rows(read_file((dir / "breakdown.csv").string()));
    ASSERT_EQ(rows.size(), 13u);
    const auto& header = rows[0];
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    for (const auto* name : {"load_s", "kernel_s", "retrieve_s", "merge_s", "total_s"}) {
        ASSERT_LT(col(name), header.size()) << name;
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double sum = std::stod(rows[r][col("load_s")]) + std::stod(rows[r][col("kernel_s")]) +
                           std::stod(rows[r][col("retrieve_s")]) + std::stod(rows[r][col("merge_s")]);
        const double total = std::stod(rows[r][col("total_s")]);
        EXPECT_NEAR(sum, total, 1e-12 * std::max(1.0, total));
    }
    for (const auto* f : {"stalls.csv", "instmix.csv", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    fs::remove_all(dir);
}

TEST(Experiment, RerunIsByteIdentical) {
    const auto a = scratch_dir("a");
    const auto b = scratch_dir("b");
    auto j = fixture_spec();
    j["algorithm"] = "bfs";
    j["dpus"] = {16, 64};
    run_experiment(parse_experiment(j), a);
    j["workers"] = 4;
    run_experiment(parse_experiment(j), b);
    for (const auto* f : {"breakdown.csv", "stalls.csv", "instmix.csv", "iterations.csv"}) {
        EXPECT_EQ(read_file((a / f).string()), read_file((b / f).string())) << f;
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Experiment, ManifestHashTracksInputs) {
    const auto base = run_experiment(parse_experiment(fixture_spec())).manifest;
    EXPECT_EQ(base["spec_hash"], run_experiment(parse_experiment(fixture_spec())).manifest["spec_hash"]);
    std::vector<json> variants;
    for (int k = 0; k < 4; ++k) {
        variants.push_back(fixture_spec());
    }
    variants[0]["seed"] = 2;
    variants[1]["densities"] = {1, 10, 60};
    variants[2]["generator"]["seed"] = 43;
    variants[3]["tasklets"] = 11;
    for (const auto& v : variants) {
        EXPECT_NE(run_experiment(parse_experiment(v)).manifest["spec_hash"], base["spec_hash"]) << v.dump();
    }
    EXPECT_EQ(base["files"].size(), 3u);
}

TEST(Experiment, DatasetContentFeedsHash) {
    const auto dir = scratch_dir("hash");
    const auto graph = dir / "g.txt";
    {
        std::ofstream(graph) << "0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 6\n6 7\n7 0\n";
    }
    json j{{"dataset", {{"path", "g.txt"}}}, {"semiring", "sssp"}, {"variants", {"csr"}}, {"densities", {50}},
           {"dpus", {2}}};
    const auto first = to_json(parse_experiment(j, dir));
    {
        std::ofstream(graph) << "0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 6\n6 7\n7 1\n";
    }
    EXPECT_NE(to_json(parse_experiment(j, dir)).dump(), first.dump());
    fs::remove_all(dir);
}

TEST(Experiment, ParsersAcceptDocumentedSpellings) {
    EXPECT_EQ(parse_semiring("tropical"), SemiringKind::sssp);
    EXPECT_EQ(parse_semiring("ppr"), SemiringKind::ppr);
    EXPECT_EQ(parse_strategy("2d"), Strategy::two_d);
    EXPECT_EQ(parse_strategy("column-wise"), Strategy::column_wise);
    EXPECT_EQ(parse_format("mtx"), InputFormat::matrix_market);
    EXPECT_THROW(parse_semiring("max-plus"), ConfigError);
}

TEST(Experiment, FormattingHelpers) {
    EXPECT_EQ(fmt_double(0.1), "0.1");
    EXPECT_EQ(hex64(0xabc), "0000000000000abc");
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
