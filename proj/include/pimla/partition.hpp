#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pimla/error.hpp"
#include "pimla/sparse.hpp"

namespace pimla {

enum class Strategy { row_wise, column_wise, two_d };
enum class Balance { by_rows, by_nnz };
enum class InputPolicy { full_vector, column_segment };
enum class OutputPolicy { disjoint_slice, full_partial, row_block_partial };

inline std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::row_wise:
        return "row-wise";
    case Strategy::column_wise:
        return "column-wise";
    case Strategy::two_d:
        return "two-d";
    }
    return "?";
}

inline std::string to_string(OutputPolicy p) {
    switch (p) {
    case OutputPolicy::disjoint_slice:
        return "disjoint-slice";
    case OutputPolicy::full_partial:
        return "full-length-partial";
    case OutputPolicy::row_block_partial:
        return "row-block-partial";
    }
    return "?";
}

/// Half-open index range [begin, end).
struct Range {
    index_t begin = 0;
    index_t end = 0;

    index_t size() const { return end - begin; }
    bool contains(index_t i) const { return i >= begin && i < end; }
    friend bool operator==(const Range&, const Range&) = default;
};

struct Grid {
    std::uint32_t rows = 1;
    std::uint32_t cols = 1;
    friend bool operator==(const Grid&, const Grid&) = default;
};

/// One DPU's block. Local matrices use indices relative to `rows`/`cols`.
template <class V>
struct DpuAssignment {
    std::uint32_t dpu_id = 0;
    Range rows;
    Range cols;
    CooMatrix<V> coo;
    CsrMatrix<V> csr;
    CscMatrix<V> csc;
    InputPolicy input_policy = InputPolicy::full_vector;
    OutputPolicy output_policy = OutputPolicy::disjoint_slice;

    std::size_t nnz() const { return coo.nnz(); }
};

template <class V>
struct PartitionPlan {
    Strategy strategy = Strategy::row_wise;
    std::uint32_t num_dpus = 1;
    Grid grid;
    Balance balance = Balance::by_rows;
    index_t num_rows = 0;
    index_t num_cols = 0;
    std::vector<Range> row_blocks;
    std::vector<Range> col_blocks;
    std::vector<DpuAssignment<V>> dpus;
};

struct TransferVolume {
    std::uint64_t load_bytes = 0;
    std::uint64_t retrieve_bytes = 0;
    std::uint64_t merge_ops = 0;
    friend bool operator==(const TransferVolume&, const TransferVolume&) = default;
};

/// Near-square factor pair with rows <= cols.
inline Grid default_grid(std::uint32_t num_dpus) {
    std::uint32_t r = 1;
    for (std::uint32_t f = 1; std::uint64_t{f} * f <= num_dpus; ++f) {
        if (num_dpus % f == 0) {
            r = f;
        }
    }
    return {r, num_dpus / r};
}

namespace detail {

inline std::vector<Range> even_split(index_t n, std::uint32_t parts) {
    std::vector<Range> out;
    out.reserve(parts);
    for (std::uint32_t k = 0; k < parts; ++k) {
        out.push_back({static_cast<index_t>(std::uint64_t{n} * k / parts),
                       static_cast<index_t>(std::uint64_t{n} * (k + 1) / parts)});
    }
    return out;
}

inline std::uint64_t spread(const std::vector<Range>& ranges, const std::vector<std::uint64_t>& prefix) {
    std::uint64_t lo = UINT64_MAX, hi = 0;
    for (const auto& r : ranges) {
        const auto w = prefix[r.end] - prefix[r.begin];
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    return hi - lo;
}

/// Each part takes at least one index and leaves one for every later part.
inline std::vector<Range> greedy_fill(const std::vector<std::uint64_t>& weights,
                                      const std::vector<std::uint64_t>& prefix, std::uint32_t parts,
                                      std::uint64_t cap) {
    const auto n = static_cast<index_t>(weights.size());
    std::vector<Range> out;
    index_t begin = 0;
    for (std::uint32_t k = 0; k + 1 < parts; ++k) {
        index_t end = begin + 1;
        const index_t limit = n - (parts - k - 1);
        while (end < limit && prefix[end + 1] - prefix[begin] <= cap) {
            ++end;
        }
        out.push_back({begin, end});
        begin = end;
    }
    out.push_back({begin, n});
    return out;
}

inline std::vector<Range> nearest_split(const std::vector<std::uint64_t>& prefix, std::uint32_t parts) {
    const auto n = static_cast<index_t>(prefix.size() - 1);
    const double total = static_cast<double>(prefix.back());
    std::vector<Range> out;
    index_t begin = 0;
    for (std::uint32_t k = 1; k < parts; ++k) {
        const double target = total * k / parts;
        auto it = std::lower_bound(prefix.begin(), prefix.end(), static_cast<std::uint64_t>(std::ceil(target)));
        auto b = static_cast<index_t>(it - prefix.begin());
        if (b > 0 && target - static_cast<double>(prefix[b - 1]) < static_cast<double>(prefix[b]) - target) {
            --b;
        }
        b = std::clamp<index_t>(b, begin + 1, n - (parts - k));
        out.push_back({begin, b});
        begin = b;
    }
    out.push_back({begin, n});
    return out;
}

/// Contiguous split of `weights` into `parts` non-empty ranges with balanced sums.
inline std::vector<Range> weighted_split(const std::vector<std::uint64_t>& weights, std::uint32_t parts) {
    std::vector<std::uint64_t> prefix(weights.size() + 1, 0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        prefix[i + 1] = prefix[i] + weights[i];
    }
    auto best = nearest_split(prefix, parts);
    auto best_spread = spread(best, prefix);
    // Bisect on the per-part cap: a low cap overloads the last part, a high
    // cap starves it.
    std::uint64_t lo = 0, hi = prefix.back();
    while (lo <= hi && best_spread > 0) {
        const std::uint64_t cap = lo + (hi - lo) / 2;
        auto cand = greedy_fill(weights, prefix, parts, cap);
        const auto s = spread(cand, prefix);
        if (s < best_spread) {
            best = cand;
            best_spread = s;
        }
        const auto last = prefix.back() - prefix[cand.back().begin];
        if (last > cap) {
            lo = cap + 1;
        } else {
            if (cap == 0) {
                break;
            }
            hi = cap - 1;
        }
    }
    return best;
}

inline std::uint32_t block_of(const std::vector<Range>& blocks, index_t i) {
    auto it = std::upper_bound(blocks.begin(), blocks.end(), i, [](index_t v, const Range& r) { return v < r.end; });
    return static_cast<std::uint32_t>(it - blocks.begin());
}

} // namespace detail

/**
 * Splits `m` across `num_dpus` simulated DPUs.
 *
 * row_wise: DPU k owns a contiguous row range and receives the full input
 * vector. column_wise: a contiguous column range and only its segment of the
 * input. two_d: tile (i, j) of a p_r x p_c grid, numbered row-major.
 */
template <class V>
PartitionPlan<V> partition(const CsrMatrix<V>& m, Strategy strategy, std::uint32_t num_dpus,
                           Balance balance = Balance::by_rows, std::optional<Grid> grid = std::nullopt) {
    if (num_dpus == 0) {
        throw DegeneratePartitionError("need at least one DPU");
    }
    PartitionPlan<V> plan;
    plan.strategy = strategy;
    plan.num_dpus = num_dpus;
    plan.balance = balance;
    plan.num_rows = m.num_rows;
    plan.num_cols = m.num_cols;

    switch (strategy) {
    case Strategy::row_wise:
        plan.grid = {num_dpus, 1};
        break;
    case Strategy::column_wise:
        plan.grid = {1, num_dpus};
        break;
    case Strategy::two_d:
        plan.grid = grid.value_or(default_grid(num_dpus));
        if (std::uint64_t{plan.grid.rows} * plan.grid.cols != num_dpus) {
            throw DegeneratePartitionError("grid " + std::to_string(plan.grid.rows) + "x" +
                                           std::to_string(plan.grid.cols) + " does not match " +
                                           std::to_string(num_dpus) + " DPUs");
        }
        break;
    }
    if (plan.grid.rows > m.num_rows) {
        throw DegeneratePartitionError(std::to_string(plan.grid.rows) + " row blocks for " +
                                       std::to_string(m.num_rows) + " rows");
    }
    if (plan.grid.cols > m.num_cols) {
        throw DegeneratePartitionError(std::to_string(plan.grid.cols) + " column blocks for " +
                                       std::to_string(m.num_cols) + " columns");
    }

    if (balance == Balance::by_rows) {
        plan.row_blocks = detail::even_split(m.num_rows, plan.grid.rows);
        plan.col_blocks = detail::even_split(m.num_cols, plan.grid.cols);
    } else {
        std::vector<std::uint64_t> row_w(m.num_rows), col_w(m.num_cols, 0);
        for (index_t r = 0; r < m.num_rows; ++r) {
            row_w[r] = m.row_nnz(r);
        }
        for (const auto c : m.col_indices) {
            ++col_w[c];
        }
        plan.row_blocks = detail::weighted_split(row_w, plan.grid.rows);
        plan.col_blocks = detail::weighted_split(col_w, plan.grid.cols);
    }

    const InputPolicy in_policy = strategy == Strategy::row_wise ? InputPolicy::full_vector : InputPolicy::column_segment;
    const OutputPolicy out_policy = strategy == Strategy::row_wise      ? OutputPolicy::disjoint_slice
                                    : strategy == Strategy::column_wise ? OutputPolicy::full_partial
                                                                        : OutputPolicy::row_block_partial;
    std::vector<std::vector<Triple<V>>> local(num_dpus);
    for (index_t r = 0; r < m.num_rows; ++r) {
        const auto bi = detail::block_of(plan.row_blocks, r);
        for (index_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            const index_t c = m.col_indices[k];
            const auto bj = detail::block_of(plan.col_blocks, c);
            local[bi * plan.grid.cols + bj].push_back(
                {r - plan.row_blocks[bi].begin, c - plan.col_blocks[bj].begin, m.values[k]});
        }
    }
    plan.dpus.resize(num_dpus);
    for (std::uint32_t d = 0; d < num_dpus; ++d) {
        auto& a = plan.dpus[d];
        a.dpu_id = d;
        a.rows = plan.row_blocks[d / plan.grid.cols];
        a.cols = plan.col_blocks[d % plan.grid.cols];
        a.coo = CooMatrix<V>{a.rows.size(), a.cols.size(), std::move(local[d])};
        a.csr = to_csr(a.coo);
        a.csc = to_csc(a.coo);
        a.input_policy = in_policy;
        a.output_policy = out_policy;
    }
    return plan;
}

/// Inverse of `partition`: global COO assembled from all DPU blocks.
template <class V>
CooMatrix<V> reassemble(const PartitionPlan<V>& plan) {
    std::vector<Triple<V>> triples;
    for (const auto& a : plan.dpus) {
        for (const auto& t : a.coo.triples) {
            triples.push_back({t.row + a.rows.begin, t.col + a.cols.begin, t.value});
        }
    }
    std::sort(triples.begin(), triples.end(),
              [](const auto& x, const auto& y) { return std::tie(x.row, x.col) < std::tie(y.row, y.col); });
    return {plan.num_rows, plan.num_cols, std::move(triples)};
}

/// Number of output rows touched when multiplying by the active columns of x.
template <class V>
std::size_t structural_output_nnz(const PartitionPlan<V>& plan, const std::vector<index_t>& active_cols) {
    std::vector<std::uint8_t> active(plan.num_cols, 0), hit(plan.num_rows, 0);
    for (const auto j : active_cols) {
        active[j] = 1;
    }
    for (const auto& a : plan.dpus) {
        for (const auto& t : a.coo.triples) {
            if (active[t.col + a.cols.begin]) {
                hit[t.row + a.rows.begin] = 1;
            }
        }
    }
    return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), std::uint8_t{1}));
}

/**
 * Closed-form host<->PIM traffic for one matrix-vector product.
 *
 * Row-wise replicates x to every DPU and returns disjoint slices (compressed
 * for sparse x). Column-wise ships disjoint segments of x and returns one
 * full-length dense partial per DPU. Two-d ships each segment to the p_r
 * tiles of its column and returns p_c dense partials per row block.
 */
template <class V>
TransferVolume transfer_volume(const PartitionPlan<V>& plan, const InputVector<V>& x, std::uint32_t elem_bytes,
                               std::uint32_t idx_bytes) {
    if (length_of(x) != plan.num_cols) {
        throw DimensionError("input vector length " + std::to_string(length_of(x)) + " != matrix columns " +
                             std::to_string(plan.num_cols));
    }
    const bool sparse = std::holds_alternative<SparseVector<V>>(x);
    const std::uint64_t n_out = plan.num_rows;
    const std::uint64_t n_in = plan.num_cols;
    const std::uint64_t pair = std::uint64_t{elem_bytes} + idx_bytes;
    const std::uint64_t d = plan.num_dpus;
    const std::uint64_t pr = plan.grid.rows;
    const std::uint64_t pc = plan.grid.cols;
    const std::uint64_t x_nnz = sparse ? std::get<SparseVector<V>>(x).nnz() : 0;

    TransferVolume v;
    switch (plan.strategy) {
    case Strategy::row_wise:
        v.load_bytes = sparse ? d * x_nnz * pair : d * n_in * elem_bytes;
        v.retrieve_bytes = sparse ? structural_output_nnz(plan, std::get<SparseVector<V>>(x).indices) * pair
                                  : n_out * elem_bytes;
        v.merge_ops = 0;
        break;
    case Strategy::column_wise:
        v.load_bytes = sparse ? x_nnz * pair : n_in * elem_bytes;
        v.retrieve_bytes = d * n_out * elem_bytes;
        v.merge_ops = (d - 1) * n_out;
        break;
    case Strategy::two_d:
        v.load_bytes = sparse ? pr * x_nnz * pair : pr * n_in * elem_bytes;
        v.retrieve_bytes = pc * n_out * elem_bytes;
        v.merge_ops = (pc - 1) * n_out;
        break;
    }
    return v;
}

template <class V>
nlohmann::json plan_summary(const PartitionPlan<V>& plan, const std::optional<TransferVolume>& predicted = {}) {
    nlohmann::json j;
    j["strategy"] = to_string(plan.strategy);
    j["num_dpus"] = plan.num_dpus;
    j["grid"] = {plan.grid.rows, plan.grid.cols};
    j["balance"] = plan.balance == Balance::by_rows ? "by-rows" : "by-nnz";
    j["num_rows"] = plan.num_rows;
    j["num_cols"] = plan.num_cols;
    auto& per = j["per_dpu"] = nlohmann::json::array();
    for (const auto& a : plan.dpus) {
        per.push_back({{"dpu", a.dpu_id},
                       {"rows", {a.rows.begin, a.rows.end}},
                       {"cols", {a.cols.begin, a.cols.end}},
                       {"nnz", a.nnz()}});
    }
    if (predicted) {
        j["predicted"] = {{"load_bytes", predicted->load_bytes},
                          {"retrieve_bytes", predicted->retrieve_bytes},
                          {"merge_ops", predicted->merge_ops}};
    }
    return j;
}

} // namespace pimla
