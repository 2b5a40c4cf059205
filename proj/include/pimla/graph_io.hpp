#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pimla/error.hpp"
#include "pimla/sparse.hpp"

namespace pimla {

struct Edge {
    index_t src;
    index_t dst;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/**
 * A canonical arc list: ids in [0, num_nodes), no self-loops, no duplicate
 * (src, dst) pairs, positive weights. Undirected graphs (`directed == false`)
 * store both arcs of every edge.
 */
struct EdgeList {
    index_t num_nodes = 0;
    std::vector<Edge> edges;
    bool directed = true;

    std::size_t num_arcs() const { return edges.size(); }
};

enum class DegreeConvention { out, in, total };

struct GraphStats {
    std::size_t num_nodes = 0;
    /// Arcs for directed graphs, undirected edges for symmetrized graphs.
    std::size_t num_edges = 0;
    double avg_degree = 0.0;
    double degree_std = 0.0;
    double sparsity = 0.0;
};

enum class InputFormat { snap_tsv, matrix_market };
enum class Symmetrize { automatic, on, off };

struct LoadOptions {
    InputFormat format = InputFormat::snap_tsv;
    Symmetrize symmetrize = Symmetrize::automatic;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t arc_key(index_t s, index_t d) { return (std::uint64_t{s} << 32) | d; }

inline bool next_token(std::string_view& line, std::string_view& tok) {
    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) {
        ++b;
    }
    if (b == line.size()) {
        return false;
    }
    std::size_t e = b;
    while (e < line.size() && !std::isspace(static_cast<unsigned char>(line[e]))) {
        ++e;
    }
    tok = line.substr(b, e - b);
    line.remove_prefix(e);
    return true;
}

inline std::uint64_t parse_id(std::string_view tok, std::size_t line_no) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec == std::errc::result_out_of_range) {
        throw CapacityError("line " + std::to_string(line_no) + ": node id exceeds 64-bit range");
    }
    if (ec != std::errc{} || p != tok.data() + tok.size()) {
        throw ParseError(line_no, "expected a non-negative integer node id, got '" + std::string(tok) + "'");
    }
    return v;
}

inline double parse_weight(std::string_view tok, std::size_t line_no) {
    double w = 0.0;
    try {
        std::size_t used = 0;
        w = std::stod(std::string(tok), &used);
        if (used != tok.size()) {
            throw std::invalid_argument("trailing");
        }
    } catch (const std::exception&) {
        throw ParseError(line_no, "malformed weight '" + std::string(tok) + "'");
    }
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw ParseError(line_no, "edge weight must be strictly positive");
    }
    return w;
}

constexpr std::uint64_t kMaxNodes = std::numeric_limits<index_t>::max();

} // namespace detail

/// Drops self-loops and duplicate arcs (first occurrence wins); when
/// `symmetrize` is set, adds the reverse of every arc not already present.
inline EdgeList canonicalize(index_t num_nodes, const std::vector<Edge>& raw, bool symmetrize) {
    EdgeList g;
    g.num_nodes = num_nodes;
    g.directed = !symmetrize;
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(raw.size() * (symmetrize ? 2 : 1));
    auto push = [&](const Edge& e) {
        if (e.src == e.dst) {
            return;
        }
        if (e.src >= num_nodes || e.dst >= num_nodes) {
            throw DimensionError("edge endpoint outside [0, num_nodes)");
        }
        if (seen.insert(detail::arc_key(e.src, e.dst)).second) {
            g.edges.push_back(e);
        }
    };
    for (const auto& e : raw) {
        push(e);
    }
    if (symmetrize) {
        const std::size_t forward = g.edges.size();
        for (std::size_t k = 0; k < forward; ++k) {
            const Edge e = g.edges[k];
            push({e.dst, e.src, e.weight});
        }
    }
    return g;
}

/**
 * Parses a SNAP edge list or a Matrix Market coordinate file.
 *
 * SNAP ids are remapped densely in first-appearance order; Matrix Market ids
 * are 1-based and already dense, so they are shifted to 0-based and the
 * declared dimension is kept.
 */
inline EdgeList load_edge_list(std::istream& in, const LoadOptions& opts = {}) {
    std::vector<Edge> raw;
    std::string line;
    std::size_t line_no = 0;
    bool undirected_hint = false;

    if (opts.format == InputFormat::snap_tsv) {
        std::unordered_map<std::uint64_t, index_t> remap;
        auto dense_id = [&](std::uint64_t id) {
            auto [it, inserted] = remap.try_emplace(id, static_cast<index_t>(remap.size()));
            if (inserted && remap.size() > detail::kMaxNodes) {
                throw CapacityError("more than 2^32-1 distinct node ids");
            }
            return it->second;
        };
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view rest(line);
            std::string_view tok;
            if (!detail::next_token(rest, tok)) {
                continue;
            }
            if (tok.front() == '#' || tok.front() == '%') {
                if (line.find("Undirected") != std::string::npos || line.find("undirected") != std::string::npos) {
                    undirected_hint = true;
                }
                continue;
            }
            const auto src = detail::parse_id(tok, line_no);
            if (!detail::next_token(rest, tok)) {
                throw ParseError(line_no, "missing destination node id");
            }
            const auto dst = detail::parse_id(tok, line_no);
            double w = 1.0;
            if (detail::next_token(rest, tok)) {
                w = detail::parse_weight(tok, line_no);
            }
            if (detail::next_token(rest, tok)) {
                throw ParseError(line_no, "unexpected trailing field '" + std::string(tok) + "'");
            }
            const index_t s = dense_id(src);
            const index_t d = dense_id(dst);
            raw.push_back({s, d, w});
        }
        const bool sym = opts.symmetrize == Symmetrize::on ||
                         (opts.symmetrize == Symmetrize::automatic && undirected_hint);
        return canonicalize(static_cast<index_t>(remap.size()), raw, sym);
    }

    // Matrix Market
    bool header_seen = false;
    bool size_seen = false;
    bool pattern = false;
    std::uint64_t rows = 0, cols = 0, entries = 0, read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!header_seen) {
            std::istringstream hs(line);
            std::string banner, object, layout, field, symmetry;
            hs >> banner >> object >> layout >> field >> symmetry;
            if (banner != "%%MatrixMarket" || object != "matrix" || layout != "coordinate") {
                throw ParseError(line_no, "expected '%%MatrixMarket matrix coordinate ...' header");
            }
            if (field == "pattern") {
                pattern = true;
            } else if (field != "real" && field != "integer") {
                throw ParseError(line_no, "unsupported field type '" + field + "'");
            }
            if (symmetry == "symmetric") {
                undirected_hint = true;
            } else if (symmetry != "general") {
                throw ParseError(line_no, "unsupported symmetry '" + symmetry + "'");
            }
            header_seen = true;
            continue;
        }
        std::string_view rest(line);
        std::string_view tok;
        if (!detail::next_token(rest, tok) || tok.front() == '%') {
            continue;
        }
        if (!size_seen) {
            rows = detail::parse_id(tok, line_no);
            if (!detail::next_token(rest, tok)) {
                throw ParseError(line_no, "size line needs rows cols entries");
            }
            cols = detail::parse_id(tok, line_no);
            if (!detail::next_token(rest, tok)) {
                throw ParseError(line_no, "size line needs rows cols entries");
            }
            entries = detail::parse_id(tok, line_no);
            if (std::max(rows, cols) > detail::kMaxNodes) {
                throw CapacityError("matrix dimension exceeds 32-bit index range");
            }
            size_seen = true;
            continue;
        }
        const auto r = detail::parse_id(tok, line_no);
        if (!detail::next_token(rest, tok)) {
            throw ParseError(line_no, "missing column index");
        }
        const auto c = detail::parse_id(tok, line_no);
        if (r == 0 || c == 0 || r > rows || c > cols) {
            throw ParseError(line_no, "index outside the declared 1-based dimensions");
        }
        double w = 1.0;
        if (!pattern) {
            if (!detail::next_token(rest, tok)) {
                throw ParseError(line_no, "missing value");
            }
            w = detail::parse_weight(tok, line_no);
        }
        raw.push_back({static_cast<index_t>(r - 1), static_cast<index_t>(c - 1), w});
        ++read;
    }
    if (!header_seen || !size_seen) {
        throw ParseError(line_no, "truncated Matrix Market file");
    }
    if (read != entries) {
        throw ParseError(line_no, "declared " + std::to_string(entries) + " entries, found " + std::to_string(read));
    }
    const bool sym =
        opts.symmetrize == Symmetrize::on || (opts.symmetrize == Symmetrize::automatic && undirected_hint);
    return canonicalize(static_cast<index_t>(std::max(rows, cols)), raw, sym);
}

/// Writes `src dst weight` lines; loading the output reproduces the arc set.
inline void export_edge_list(std::ostream& out, const EdgeList& g) {
    out << "# nodes " << g.num_nodes << " arcs " << g.edges.size() << '\n';
    for (const auto& e : g.edges) {
        out << e.src << '\t' << e.dst << '\t' << e.weight << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic graphs

enum class GeneratorKind { grid_regular, rmat_scale_free };

struct GeneratorParams {
    // R-MAT quadrant probabilities
    double a = 0.57;
    double b = 0.19;
    double c = 0.19;
    double d = 0.05;
    /// Target arcs per node before duplicate removal (rmat only).
    double avg_degree = 16.0;
    bool undirected = true;
    /// Randomly relabel vertices so hubs are not clustered at low ids.
    bool scramble = true;
};

namespace detail {

inline EdgeList torus(index_t n) {
    // Largest divisor of n not above sqrt(n) gives the flattest torus.
    index_t width = 1;
    for (index_t w = 1; std::uint64_t{w} * w <= n; ++w) {
        if (n % w == 0) {
            width = w;
        }
    }
    const index_t height = n / width;
    std::vector<Edge> raw;
    raw.reserve(std::size_t{n} * 2);
    for (index_t r = 0; r < width; ++r) {
        for (index_t c = 0; c < height; ++c) {
            const index_t v = r * height + c;
            raw.push_back({v, r * height + (c + 1) % height, 1.0});
            raw.push_back({v, ((r + 1) % width) * height + c, 1.0});
        }
    }
    return canonicalize(n, raw, true);
}

inline EdgeList rmat(index_t n, const GeneratorParams& p, std::uint64_t seed) {
    const double sum = p.a + p.b + p.c + p.d;
    if (std::abs(sum - 1.0) > 1e-9 || p.a < 0 || p.b < 0 || p.c < 0 || p.d < 0) {
        throw ConfigError("rmat probabilities must be non-negative and sum to 1");
    }
    if (!(p.avg_degree > 0.0)) {
        throw ConfigError("rmat average degree must be positive");
    }
    unsigned levels = 0;
    while ((std::uint64_t{1} << levels) < n) {
        ++levels;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double arcs_target = p.avg_degree * n;
    const auto draws = static_cast<std::size_t>(std::llround(p.undirected ? arcs_target / 2 : arcs_target));
    std::vector<Edge> raw;
    raw.reserve(draws);
    while (raw.size() < draws) {
        std::uint64_t src = 0, dst = 0;
        for (unsigned l = 0; l < levels; ++l) {
            const double u = unit(rng);
            const unsigned quad = u < p.a ? 0 : u < p.a + p.b ? 1 : u < p.a + p.b + p.c ? 2 : 3;
            src = (src << 1) | (quad >> 1);
            dst = (dst << 1) | (quad & 1);
        }
        if (src >= n || dst >= n) {
            continue;
        }
        raw.push_back({static_cast<index_t>(src), static_cast<index_t>(dst), 1.0});
    }
    if (p.scramble) {
        std::vector<index_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (auto& e : raw) {
            e.src = perm[e.src];
            e.dst = perm[e.dst];
        }
    }
    return canonicalize(n, raw, p.undirected);
}

} // namespace detail

/**
 * Deterministic synthetic graphs. `grid_regular` is a 2D torus with a
 * 4-neighbourhood, so every vertex has the same degree; `rmat_scale_free` is
 * a recursive-matrix graph with a skewed degree distribution.
 */
inline EdgeList generate_synthetic(GeneratorKind kind, index_t num_nodes, const GeneratorParams& params = {},
                                   std::uint64_t seed = 1) {
    if (num_nodes < 2) {
        throw ConfigError("synthetic graphs need at least 2 nodes");
    }
    if (kind == GeneratorKind::grid_regular) {
        return detail::torus(num_nodes);
    }
    return detail::rmat(num_nodes, params, seed);
}

// ---------------------------------------------------------------------------
// Statistics

inline std::vector<std::size_t> degrees(const EdgeList& g, DegreeConvention conv = DegreeConvention::out) {
    std::vector<std::size_t> deg(g.num_nodes, 0);
    for (const auto& e : g.edges) {
        if (conv != DegreeConvention::in) {
            ++deg[e.src];
        }
        if (conv != DegreeConvention::out) {
            ++deg[e.dst];
        }
    }
    return deg;
}

/**
 * Mean and population standard deviation of vertex degrees, plus sparsity
 * NNZ / N^2. For symmetrized graphs NNZ counts undirected edges while the
 * degree counts both arcs, which is the convention of the usual dataset
 * tables (e.g. facebook_combined: 88,234 edges, mean degree 43.69).
 */
inline GraphStats compute_stats(const EdgeList& g, DegreeConvention conv = DegreeConvention::out) {
    GraphStats s;
    s.num_nodes = g.num_nodes;
    s.num_edges = g.directed ? g.edges.size() : g.edges.size() / 2;
    if (g.num_nodes == 0) {
        return s;
    }
    const auto deg = degrees(g, conv);
    const double n = static_cast<double>(g.num_nodes);
    double mean = 0.0;
    for (const auto d : deg) {
        mean += static_cast<double>(d);
    }
    mean /= n;
    double var = 0.0;
    for (const auto d : deg) {
        const double diff = static_cast<double>(d) - mean;
        var += diff * diff;
    }
    s.avg_degree = mean;
    s.degree_std = std::sqrt(var / n);
    s.sparsity = static_cast<double>(s.num_edges) / (n * n);
    return s;
}

/// Deterministic per-arc weight in [1, max_weight], seeded from (src, dst).
inline double hashed_weight(index_t src, index_t dst, std::uint32_t max_weight, std::uint64_t seed = 0) {
    if (max_weight <= 1) {
        return 1.0;
    }
    const auto h = detail::splitmix64(detail::arc_key(src, dst) ^ detail::splitmix64(seed));
    return static_cast<double>(1 + h % max_weight);
}

/// Replaces all weights with hashed integer weights in [1, max_weight].
inline EdgeList with_hashed_weights(EdgeList g, std::uint32_t max_weight, std::uint64_t seed = 0) {
    for (auto& e : g.edges) {
        // Symmetric arcs share a weight.
        const index_t lo = std::min(e.src, e.dst);
        const index_t hi = std::max(e.src, e.dst);
        e.weight = hashed_weight(lo, hi, max_weight, seed);
    }
    return g;
}

/// Adjacency matrix with A[src][dst] = transform(weight).
template <class V, class F>
CooMatrix<V> adjacency_coo(const EdgeList& g, F&& value_of) {
    std::vector<Triple<V>> triples;
    triples.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        if (e.src == e.dst) {
            continue;
        }
        triples.push_back({e.src, e.dst, value_of(e)});
    }
    return make_coo<V>(g.num_nodes, g.num_nodes, std::move(triples));
}

/// Builds the adjacency matrix in the requested format; values are edge weights.
template <class V>
SparseMatrix<V> from_edges(const EdgeList& g, Format format) {
    auto coo = adjacency_coo<V>(g, [](const Edge& e) { return static_cast<V>(e.weight); });
    return convert<V>(SparseMatrix<V>(std::move(coo)), format);
}

} // namespace pimla
