#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "pimla/error.hpp"
#include "pimla/kernel_traces.hpp"
#include "pimla/machine.hpp"
#include "pimla/partition.hpp"
#include "pimla/pim_model.hpp"
#include "pimla/semiring.hpp"
#include "pimla/sparse.hpp"

namespace pimla {

enum class KernelId : std::uint8_t {
    spmv_coo_1d,
    spmv_coo_2d,
    spmspv_coo,
    spmspv_csr,
    spmspv_csc_r,
    spmspv_csc_c,
    spmspv_csc_2d,
};

inline constexpr std::array<KernelId, 7> kAllKernels = {
    KernelId::spmv_coo_1d,  KernelId::spmv_coo_2d,  KernelId::spmspv_coo,    KernelId::spmspv_csr,
    KernelId::spmspv_csc_r, KernelId::spmspv_csc_c, KernelId::spmspv_csc_2d,
};

struct KernelTraits {
    std::string_view name;
    Strategy strategy;
    bool sparse_input;
};

inline constexpr KernelTraits kernel_traits(KernelId id) {
    switch (id) {
    case KernelId::spmv_coo_1d:
        return {"spmv-coo-1d", Strategy::row_wise, false};
    case KernelId::spmv_coo_2d:
        return {"spmv-coo-2d", Strategy::two_d, false};
    case KernelId::spmspv_coo:
        return {"spmspv-coo", Strategy::row_wise, true};
    case KernelId::spmspv_csr:
        return {"spmspv-csr", Strategy::row_wise, true};
    case KernelId::spmspv_csc_r:
        return {"spmspv-csc-r", Strategy::row_wise, true};
    case KernelId::spmspv_csc_c:
        return {"spmspv-csc-c", Strategy::column_wise, true};
    case KernelId::spmspv_csc_2d:
        return {"spmspv-csc-2d", Strategy::two_d, true};
    }
    return {"?", Strategy::row_wise, true};
}

inline std::string to_string(KernelId id) { return std::string(kernel_traits(id).name); }

/// Accepts the full name or the short form without the "spmspv-" prefix ("csc-r").
inline KernelId parse_kernel(std::string_view name) {
    for (const auto id : kAllKernels) {
        const auto full = kernel_traits(id).name;
        if (name == full || (full.starts_with("spmspv-") && name == full.substr(7))) {
            return id;
        }
    }
    throw ConfigError("unknown kernel variant '" + std::string(name) + "'");
}

inline constexpr bool is_spmv(KernelId id) { return !kernel_traits(id).sparse_input; }

inline constexpr OutputPolicy output_form(KernelId id) {
    switch (kernel_traits(id).strategy) {
    case Strategy::row_wise:
        return OutputPolicy::disjoint_slice;
    case Strategy::column_wise:
        return OutputPolicy::full_partial;
    case Strategy::two_d:
        return OutputPolicy::row_block_partial;
    }
    return OutputPolicy::disjoint_slice;
}

/// One DPU's contribution to y, covering [offset, offset + length).
template <class V>
struct PartialOutput {
    std::uint32_t dpu_id = 0;
    OutputPolicy form = OutputPolicy::disjoint_slice;
    index_t offset = 0;
    index_t length = 0;
    /// Indices are local to the slice.
    std::variant<SparseVector<V>, DenseVector<V>> vector;

    /// Bytes moved PIM -> host: index/value pairs when sparse, values when dense.
    std::uint64_t bytes(std::uint32_t elem_bytes, std::uint32_t idx_bytes) const {
        if (const auto* s = std::get_if<SparseVector<V>>(&vector)) {
            return s->nnz() * (std::uint64_t{elem_bytes} + idx_bytes);
        }
        return std::uint64_t{std::get<DenseVector<V>>(vector).length()} * elem_bytes;
    }
};

template <class V>
struct KernelRun {
    std::vector<PartialOutput<V>> partials;
    /// Per DPU, per tasklet; empty unless tracing was requested.
    std::vector<std::vector<TaskletTrace>> traces;
    /// Bytes of x shipped to each DPU.
    std::vector<std::uint64_t> load_bytes;
    /// Number of times-applications performed across all DPUs.
    std::uint64_t times_count = 0;
};

namespace detail {

template <class V>
LocalInput<V> local_input(const InputVector<V>& x, Range cols, V zero) {
    LocalInput<V> in;
    in.values.assign(cols.size(), zero);
    in.is_active.assign(cols.size(), 0);
    if (const auto* d = std::get_if<DenseVector<V>>(&x)) {
        in.dense = true;
        in.active.resize(cols.size());
        for (index_t j = 0; j < cols.size(); ++j) {
            in.active[j] = j;
            in.values[j] = d->values[cols.begin + j];
            in.is_active[j] = 1;
        }
        return in;
    }
    const auto& s = std::get<SparseVector<V>>(x);
    auto lo = std::lower_bound(s.indices.begin(), s.indices.end(), cols.begin);
    auto hi = std::lower_bound(lo, s.indices.end(), cols.end);
    for (auto it = lo; it != hi; ++it) {
        const index_t j = *it - cols.begin;
        in.active.push_back(j);
        in.values[j] = s.values[static_cast<std::size_t>(it - s.indices.begin())];
        in.is_active[j] = 1;
    }
    return in;
}

/**
 * y_block[i] = plus-fold over ascending j of A[i, j] times x[j], restricted
 * to active j. The order is fixed, so the result does not depend on how
 * tasklets split the work. With `early_exit` a saturated row stops early
 * and fewer products are counted.
 */
template <Semiring S>
std::vector<typename S::value_type> block_product(const CsrMatrix<typename S::value_type>& m,
                                                  const LocalInput<typename S::value_type>& x, bool early_exit,
                                                  std::vector<std::uint8_t>& touched, std::uint64_t& times_count) {
    using V = typename S::value_type;
    std::vector<V> y(m.num_rows, S::zero());
    touched.assign(m.num_rows, 0);
    for (index_t r = 0; r < m.num_rows; ++r) {
        V acc = S::zero();
        for (index_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            const index_t c = m.col_indices[k];
            if (!x.is_active[c]) {
                continue;
            }
            touched[r] = 1;
            ++times_count;
            acc = S::plus(acc, S::times(m.values[k], x.values[c]));
            if (early_exit && S::supports_early_exit && S::saturated(acc)) {
                break;
            }
        }
        y[r] = acc;
    }
    return y;
}

} // namespace detail

/**
 * Runs one kernel variant on every DPU of `plan`.
 *
 * Requires the plan's strategy to match the variant and x's form (dense for
 * SpMV, sparse for SpMSpV). The number of tasklets per DPU, chunk size and
 * lock striping come from `cfg`.
 */
template <Semiring S>
KernelRun<typename S::value_type> run_kernel(KernelId id, const PartitionPlan<typename S::value_type>& plan,
                                             const InputVector<typename S::value_type>& x, S,
                                             const MachineConfig& cfg, bool trace) {
    using V = typename S::value_type;
    const auto traits = kernel_traits(id);
    if (plan.strategy != traits.strategy) {
        throw UnsupportedInputError(to_string(id) + " requires a " + to_string(traits.strategy) + " partition, got " +
                                    to_string(plan.strategy));
    }
    if (std::holds_alternative<SparseVector<V>>(x) != traits.sparse_input) {
        throw UnsupportedInputError(to_string(id) + " takes a " + (traits.sparse_input ? "sparse" : "dense") +
                                    " input vector");
    }
    if (length_of(x) != plan.num_cols) {
        throw DimensionError("input vector length " + std::to_string(length_of(x)) + " != matrix columns " +
                             std::to_string(plan.num_cols));
    }
    if (const auto* s = std::get_if<SparseVector<V>>(&x)) {
        validate(*s, S::zero());
    }
    if (cfg.tasklets < 1 || cfg.tasklets > cfg.max_tasklets) {
        throw ConfigError("tasklets must be in [1, " + std::to_string(cfg.max_tasklets) + "]");
    }

    const bool csc = id == KernelId::spmspv_csc_r || id == KernelId::spmspv_csc_c || id == KernelId::spmspv_csc_2d;
    const bool sparse_out = traits.sparse_input && traits.strategy == Strategy::row_wise;
    const std::uint64_t pair = std::uint64_t{cfg.elem_bytes} + cfg.idx_bytes;

    KernelRun<V> run;
    run.partials.reserve(plan.dpus.size());
    run.load_bytes.reserve(plan.dpus.size());
    if (trace) {
        run.traces.reserve(plan.dpus.size());
    }
    std::vector<std::uint8_t> touched;
    for (const auto& a : plan.dpus) {
        const auto in = detail::local_input(x, a.cols, S::zero());
        run.load_bytes.push_back(in.dense ? std::uint64_t{a.cols.size()} * cfg.elem_bytes : in.active.size() * pair);

        // Only the row-major SpMSpV kernels stop a row early.
        const bool early_exit = !csc && traits.sparse_input;
        auto y = detail::block_product<S>(a.csr, in, early_exit, touched, run.times_count);
        PartialOutput<V> p;
        p.dpu_id = a.dpu_id;
        p.form = output_form(id);
        p.offset = a.rows.begin;
        p.length = a.rows.size();
        if (sparse_out) {
            SparseVector<V> s{p.length, {}, {}};
            for (index_t r = 0; r < p.length; ++r) {
                if (touched[r]) {
                    s.indices.push_back(r);
                    s.values.push_back(y[r]);
                }
            }
            p.vector = std::move(s);
        } else {
            p.vector = DenseVector<V>{std::move(y)};
        }
        run.partials.push_back(std::move(p));

        if (trace) {
            switch (id) {
            case KernelId::spmv_coo_1d:
            case KernelId::spmv_coo_2d:
                run.traces.push_back(detail::trace_spmv_coo<S>(a.csr, in, cfg));
                break;
            case KernelId::spmspv_coo:
                run.traces.push_back(detail::trace_spmspv_rows<S>(a.csr, in, cfg, false));
                break;
            case KernelId::spmspv_csr:
                run.traces.push_back(detail::trace_spmspv_rows<S>(a.csr, in, cfg, true));
                break;
            case KernelId::spmspv_csc_r:
            case KernelId::spmspv_csc_c:
            case KernelId::spmspv_csc_2d:
                run.traces.push_back(detail::trace_spmspv_csc<S>(a.csc, in, cfg, sparse_out));
                break;
            }
        }
    }
    return run;
}

template <class V>
struct MergeResult {
    DenseVector<V> y;
    /// plus-operations applied on the host; a first contribution is a copy.
    std::uint64_t merge_ops = 0;
};

/**
 * Folds partial outputs into y in ascending dpu_id order. Index blocks are
 * reduced on up to `host_threads` threads; every index sees its
 * contributions in the same order, so the result does not depend on the
 * thread count.
 */
template <Semiring S>
MergeResult<typename S::value_type> merge(std::span<const PartialOutput<typename S::value_type>> partials,
                                          index_t length, S, unsigned host_threads = 1) {
    using V = typename S::value_type;
    std::vector<const PartialOutput<V>*> order;
    order.reserve(partials.size());
    for (const auto& p : partials) {
        if (std::uint64_t{p.offset} + p.length > length) {
            throw ConsistencyError("partial of dpu " + std::to_string(p.dpu_id) + " exceeds output length");
        }
        const index_t vlen = std::visit(
            [](const auto& v) -> index_t {
                if constexpr (requires { v.length(); }) {
                    return v.length();
                } else {
                    return v.length;
                }
            },
            p.vector);
        if (vlen != p.length) {
            throw ConsistencyError("partial of dpu " + std::to_string(p.dpu_id) + " has inconsistent length");
        }
        order.push_back(&p);
    }
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->dpu_id < b->dpu_id; });

    // Disjoint slices must not overlap.
    std::vector<std::pair<index_t, index_t>> slices;
    for (const auto* p : order) {
        if (p->form == OutputPolicy::disjoint_slice && p->length > 0) {
            slices.emplace_back(p->offset, p->offset + p->length);
        }
    }
    std::sort(slices.begin(), slices.end());
    for (std::size_t k = 1; k < slices.size(); ++k) {
        if (slices[k].first < slices[k - 1].second) {
            throw ConsistencyError("disjoint-slice outputs overlap at index " + std::to_string(slices[k].first));
        }
    }

    MergeResult<V> out;
    out.y.values.assign(length, S::zero());
    std::vector<std::uint8_t> written(length, 0);
    const unsigned threads = std::max(1u, std::min<unsigned>(host_threads, std::max<index_t>(length, 1)));
    std::vector<std::uint64_t> ops(threads, 0);

    auto reduce = [&](unsigned t) {
        const index_t lo = static_cast<index_t>(std::uint64_t{length} * t / threads);
        const index_t hi = static_cast<index_t>(std::uint64_t{length} * (t + 1) / threads);
        auto put = [&](index_t i, V v) {
            if (i < lo || i >= hi) {
                return;
            }
            if (written[i]) {
                out.y.values[i] = S::plus(out.y.values[i], v);
                ++ops[t];
            } else {
                out.y.values[i] = v;
                written[i] = 1;
            }
        };
        for (const auto* p : order) {
            if (const auto* s = std::get_if<SparseVector<V>>(&p->vector)) {
                for (std::size_t k = 0; k < s->nnz(); ++k) {
                    put(p->offset + s->indices[k], s->values[k]);
                }
            } else {
                const auto& d = std::get<DenseVector<V>>(p->vector).values;
                const index_t b = std::max(lo, p->offset), e = std::min(hi, p->offset + p->length);
                for (index_t i = b; i < e; ++i) {
                    put(i, d[i - p->offset]);
                }
            }
        }
    };
    if (threads == 1) {
        reduce(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(reduce, t);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto o : ops) {
        out.merge_ops += o;
    }
    return out;
}

} // namespace pimla
