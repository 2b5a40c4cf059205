#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pimla/partition.hpp"
#include "pimla/semiring.hpp"
#include "pimla/trace_builder.hpp"

namespace pimla {

/// Work split of one DPU across its tasklets.
struct TaskletPlan {
    std::uint32_t num_tasklets = 1;
    /// Contiguous, disjoint, covering ranges over rows (row-major kernels)
    /// or over the DPU's active input entries (CSC kernels).
    std::vector<Range> ranges;
    std::uint32_t lock_stripes = 32;

    std::uint32_t stripe_of(index_t row) const { return row % lock_stripes; }
};

namespace detail {

/// What one DPU sees of x, in local column coordinates.
template <class V>
struct LocalInput {
    bool dense = false;
    std::vector<index_t> active; // ascending
    std::vector<V> values;       // length = tile columns, zero where inactive
    std::vector<std::uint8_t> is_active;
};

/// Contiguous split of [0, n) into `parts` ranges of near-equal weight; ranges may be empty.
inline std::vector<Range> split_prefix(const std::vector<std::uint64_t>& prefix, std::uint32_t parts) {
    const auto n = static_cast<index_t>(prefix.size() - 1);
    std::vector<Range> out;
    index_t begin = 0;
    for (std::uint32_t k = 1; k <= parts; ++k) {
        index_t end = n;
        if (k < parts) {
            const std::uint64_t target = (prefix.back() * k + parts - 1) / parts;
            end = static_cast<index_t>(std::lower_bound(prefix.begin() + begin, prefix.end(), target) - prefix.begin());
            end = std::min(end, n);
        }
        out.push_back({begin, end});
        begin = end;
    }
    return out;
}

template <class V>
TaskletPlan row_tasklet_plan(const CsrMatrix<V>& m, std::uint32_t tasklets, std::uint32_t stripes,
                             std::uint64_t per_row_weight) {
    std::vector<std::uint64_t> prefix(m.num_rows + 1, 0);
    for (index_t r = 0; r < m.num_rows; ++r) {
        prefix[r + 1] = prefix[r] + m.row_nnz(r) + per_row_weight;
    }
    return {tasklets, split_prefix(prefix, tasklets), stripes};
}

/**
 * COO scan with a dense x. Tasklets take equal contiguous runs of the
 * nonzero stream, so a long row is shared; a row cut by a run boundary is
 * accumulated under its stripe lock. Each nonzero fetches x[col] from MRAM
 * individually. Every stored nonzero is processed: the scan does not look
 * at the accumulator.
 */
template <Semiring S>
std::vector<TaskletTrace> trace_spmv_coo(const CsrMatrix<typename S::value_type>& m,
                                         const LocalInput<typename S::value_type>&, const MachineConfig& cfg) {
    const index_t nnz = m.row_ptr[m.num_rows];
    const auto runs = even_split(nnz, cfg.tasklets);
    const auto slices = even_split(m.num_rows, cfg.tasklets);
    const std::uint64_t triple = 2ull * cfg.idx_bytes + cfg.elem_bytes;
    std::vector<TaskletTrace> out;
    for (std::uint32_t t = 0; t < cfg.tasklets; ++t) {
        TraceBuilder b(t, cfg);
        const Range run = runs[t];
        MramStream triples(std::uint64_t{run.size()} * triple, cfg.wram_chunk_bytes);
        index_t r = static_cast<index_t>(std::upper_bound(m.row_ptr.begin(), m.row_ptr.end(), run.begin) -
                                         m.row_ptr.begin()) - 1;
        for (index_t k = run.begin; k < run.end; ++k) {
            while (m.row_ptr[r + 1] <= k) {
                ++r;
            }
            triples.read(b, triple);
            b.wram();
            b.dma_read(cfg.elem_bytes);
            b.op(S::times_class);
            b.op(S::plus_class);
            b.control();
            if (k + 1 == m.row_ptr[r + 1] || k + 1 == run.end) {
                if (m.row_ptr[r] < run.begin || m.row_ptr[r + 1] > run.end) {
                    b.lock(r % cfg.lock_stripes);
                    b.wram();
                    b.unlock(r % cfg.lock_stripes);
                } else {
                    b.wram();
                }
            }
        }
        // Cut rows are final only once every run is done.
        b.barrier(0);
        b.write_back(std::uint64_t{slices[t].size()} * cfg.elem_bytes);
        out.push_back(b.take());
    }
    return out;
}

/**
 * Row-major SpMSpV: each stored row is intersected with the compressed x by
 * a two-pointer merge that restarts at the head of x. With `row_pointers`
 * (CSR) every row, empty or not, costs a row_ptr read.
 */
template <Semiring S>
std::vector<TaskletTrace> trace_spmspv_rows(const CsrMatrix<typename S::value_type>& m,
                                            const LocalInput<typename S::value_type>& x, const MachineConfig& cfg,
                                            bool row_pointers) {
    using V = typename S::value_type;
    const auto plan = row_tasklet_plan(m, cfg.tasklets, cfg.lock_stripes, row_pointers ? 1 : 0);
    const std::uint64_t pair = std::uint64_t{cfg.idx_bytes} + cfg.elem_bytes;
    const std::uint64_t entry = row_pointers ? pair : 2ull * cfg.idx_bytes + cfg.elem_bytes;
    const auto& xi = x.active;
    std::vector<TaskletTrace> out;
    for (std::uint32_t t = 0; t < plan.num_tasklets; ++t) {
        TraceBuilder b(t, cfg);
        const Range rows = plan.ranges[t];
        MramStream entries((m.row_ptr[rows.end] - m.row_ptr[rows.begin]) * entry, cfg.wram_chunk_bytes);
        MramStream xs(xi.size() * pair, cfg.wram_chunk_bytes);
        MramStream row_ptr((rows.size() + 1ull) * cfg.idx_bytes, cfg.wram_chunk_bytes);
        std::uint64_t touched = 0;
        if (row_pointers && rows.size() > 0) {
            row_ptr.read(b, cfg.idx_bytes);
        }
        for (index_t r = rows.begin; r < rows.end; ++r) {
            if (row_pointers) {
                row_ptr.read(b, cfg.idx_bytes);
                b.wram();
                b.control();
            }
            const index_t k_end = m.row_ptr[r + 1];
            if (m.row_ptr[r] == k_end) {
                continue;
            }
            xs.rewind();
            index_t k = m.row_ptr[r];
            std::size_t p = 0;
            std::uint32_t steps = 0, reads = 0, matches = 0;
            V acc = S::zero();
            // The first element of both sides is loaded before the loop.
            entries.read(b, entry);
            ++reads;
            if (!xi.empty()) {
                xs.read(b, pair);
                ++reads;
            }
            while (k < k_end && p < xi.size()) {
                ++steps;
                const index_t c = m.col_indices[k];
                if (c == xi[p]) {
                    ++matches;
                    acc = S::plus(acc, S::times(m.values[k], x.values[c]));
                    if (S::supports_early_exit && S::saturated(acc)) {
                        break;
                    }
                    ++k;
                    ++p;
                    if (k < k_end) {
                        entries.read(b, entry);
                        ++reads;
                    }
                    if (p < xi.size()) {
                        xs.read(b, pair);
                        ++reads;
                    }
                } else if (c < xi[p]) {
                    if (++k < k_end) {
                        entries.read(b, entry);
                        ++reads;
                    }
                } else if (++p < xi.size()) {
                    xs.read(b, pair);
                    ++reads;
                }
            }
            // CSR seeks to the next row; COO has to scan for the row boundary.
            if (k + 1 < k_end) {
                const index_t rest = k_end - k - 1;
                if (row_pointers) {
                    entries.skip(std::uint64_t{rest} * entry);
                } else {
                    entries.read(b, std::uint64_t{rest} * entry);
                    reads += rest;
                    steps += rest;
                }
            }
            b.wram(reads);
            b.control(steps + 1);
            for (std::uint32_t i = 0; i < matches; ++i) {
                b.op(S::times_class);
                b.op(S::plus_class);
            }
            if (matches > 0) {
                b.wram();
                ++touched;
            }
        }
        b.write_back(touched * pair);
        out.push_back(b.take());
    }
    return out;
}

/**
 * Column-major SpMSpV: tasklets take contiguous runs of the active input
 * entries, balanced by column length, and visit only the matching columns. Products accumulate in a
 * private buffer, then each touched row is folded into the shared output
 * under a striped mutex. The shared output sits in WRAM when it fits in
 * half of it, otherwise in MRAM.
 */
template <Semiring S>
std::vector<TaskletTrace> trace_spmspv_csc(const CscMatrix<typename S::value_type>& m,
                                           const LocalInput<typename S::value_type>& x, const MachineConfig& cfg,
                                           bool sparse_output) {
    using V = typename S::value_type;
    const std::uint32_t T = cfg.tasklets;
    // Balance by the nonzeros each active column brings, plus its fixed overhead.
    std::vector<std::uint64_t> prefix(x.active.size() + 1, 0);
    for (std::size_t a = 0; a < x.active.size(); ++a) {
        const index_t j = x.active[a];
        prefix[a + 1] = prefix[a] + (m.col_ptr[j + 1] - m.col_ptr[j]) + 1;
    }
    const TaskletPlan work{T, split_prefix(prefix, T), cfg.lock_stripes};
    const auto shares = even_split(m.num_rows, T);
    const bool output_in_wram = std::uint64_t{m.num_rows} * cfg.elem_bytes <= cfg.wram_bytes / 2;
    const std::uint64_t pair = std::uint64_t{cfg.idx_bytes} + cfg.elem_bytes;

    std::vector<V> acc(m.num_rows, S::zero());
    std::vector<std::uint8_t> touched_any(m.num_rows, 0);
    std::vector<index_t> touched;
    std::vector<TraceBuilder> builders;
    builders.reserve(T);
    for (std::uint32_t t = 0; t < T; ++t) {
        builders.emplace_back(t, cfg);
    }

    for (std::uint32_t t = 0; t < T; ++t) {
        auto& b = builders[t];
        if (output_in_wram) {
            b.wram(shares[t].size());
        } else {
            b.write_back(std::uint64_t{shares[t].size()} * cfg.elem_bytes);
        }
        b.barrier(0);

        const Range mine = work.ranges[t];
        MramStream xs(std::uint64_t{mine.size()} * pair, cfg.wram_chunk_bytes);
        touched.clear();
        for (index_t a = mine.begin; a < mine.end; ++a) {
            const index_t j = x.active[a];
            xs.read(b, pair);
            b.wram();
            b.control();
            b.dma_read(2ull * cfg.idx_bytes);
            const index_t k0 = m.col_ptr[j], k1 = m.col_ptr[j + 1];
            MramStream col(std::uint64_t{k1 - k0} * pair, cfg.wram_chunk_bytes);
            for (index_t k = k0; k < k1; ++k) {
                const index_t r = m.row_indices[k];
                col.read(b, pair);
                b.wram();
                b.op(S::times_class);
                const V prod = S::times(m.values[k], x.values[j]);
                b.wram();
                if (!touched_any[r]) {
                    touched_any[r] = 1;
                    touched.push_back(r);
                }
                if (!(S::supports_early_exit && S::saturated(acc[r]))) {
                    b.op(S::plus_class);
                    acc[r] = S::plus(acc[r], prod);
                }
                b.wram();
                b.control();
            }
        }
        std::sort(touched.begin(), touched.end());
        for (const index_t r : touched) {
            const auto stripe = work.stripe_of(r);
            b.lock(stripe);
            if (output_in_wram) {
                b.wram();
                b.op(S::plus_class);
                b.wram();
            } else {
                b.dma_read(cfg.elem_bytes);
                b.op(S::plus_class);
                b.dma_write(cfg.elem_bytes);
            }
            b.unlock(stripe);
            touched_any[r] = 0;
            acc[r] = S::zero();
        }
    }

    // Rows touched by any tasklet, for the compacted write-back.
    std::vector<std::uint8_t> hit(m.num_rows, 0);
    for (const index_t j : x.active) {
        for (index_t k = m.col_ptr[j]; k < m.col_ptr[j + 1]; ++k) {
            hit[m.row_indices[k]] = 1;
        }
    }
    std::vector<TaskletTrace> out;
    for (std::uint32_t t = 0; t < T; ++t) {
        auto& b = builders[t];
        b.barrier(1);
        const Range share = shares[t];
        if (sparse_output) {
            const auto n_hit = std::count(hit.begin() + share.begin, hit.begin() + share.end, std::uint8_t{1});
            b.wram(share.size());
            b.control(share.size());
            b.write_back(static_cast<std::uint64_t>(n_hit) * pair);
        } else if (output_in_wram) {
            b.write_back(std::uint64_t{share.size()} * cfg.elem_bytes);
        }
        out.push_back(b.take());
    }
    return out;
}

} // namespace detail
} // namespace pimla
