#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include "pimla/error.hpp"
#include "pimla/kernels.hpp"
#include "pimla/machine.hpp"
#include "pimla/partition.hpp"
#include "pimla/pim_model.hpp"

namespace pimla {

template <class V>
struct MatVecResult {
    DenseVector<V> y;
    ExecutionReport report;
    std::uint64_t times_count = 0;
};

/**
 * Simulated host + PIM system for repeated products with one matrix.
 *
 * Partition plans are built on first use per strategy and kept, so the
 * matrix transfer is paid once. Every product measures the bytes actually
 * shipped and retrieved, schedules each DPU's traces, merges on the host
 * and prices the four phases.
 */
template <Semiring S>
class MatVecEngine {
public:
    using V = typename S::value_type;

    MatVecEngine(CsrMatrix<V> a, MachineConfig cfg, Balance balance = Balance::by_rows,
                 std::optional<Grid> grid = std::nullopt, unsigned host_threads = 1)
        : a_(std::move(a)), cfg_(cfg), balance_(balance), grid_(grid), host_threads_(host_threads) {
        cfg_.validate();
    }

    const MachineConfig& config() const { return cfg_; }
    const CsrMatrix<V>& matrix() const { return a_; }

    const PartitionPlan<V>& plan(Strategy s) {
        auto& slot = plans_[static_cast<std::size_t>(s)];
        if (!slot) {
            slot = std::make_unique<PartitionPlan<V>>(partition(a_, s, cfg_.num_dpus, balance_, grid_));
            check_capacity(*slot);
        }
        return *slot;
    }

    /// With `model` unset only the numeric result is produced.
    MatVecResult<V> multiply(KernelId id, const InputVector<V>& x, bool model = true) {
        const auto& p = plan(kernel_traits(id).strategy);
        auto run = run_kernel(id, p, x, S{}, cfg_, model);
        auto merged = merge<S>(run.partials, a_.num_rows, S{}, host_threads_);

        MatVecResult<V> out;
        out.y = std::move(merged.y);
        out.times_count = run.times_count;
        auto& rep = out.report;
        for (const auto b : run.load_bytes) {
            rep.volume.load_bytes += b;
        }
        for (const auto& part : run.partials) {
            rep.volume.retrieve_bytes += part.bytes(cfg_.elem_bytes, cfg_.idx_bytes);
        }
        rep.volume.merge_ops = merged.merge_ops;
        std::uint64_t max_cycles = 0;
        if (model) {
            rep.per_dpu.reserve(run.traces.size());
            for (const auto& traces : run.traces) {
                rep.per_dpu.push_back(schedule(traces, cfg_));
                rep.mix += instruction_mix(traces);
                max_cycles = std::max(max_cycles, rep.per_dpu.back().total);
            }
        }
        rep.phases = phase_costs(rep.volume, max_cycles, merged.merge_ops, cfg_.num_dpus, cfg_);
        return out;
    }

private:
    void check_capacity(const PartitionPlan<V>& p) const {
        const std::uint64_t triple = 2ull * cfg_.idx_bytes + cfg_.elem_bytes;
        const std::uint64_t pair = std::uint64_t{cfg_.idx_bytes} + cfg_.elem_bytes;
        for (const auto& d : p.dpus) {
            // COO, CSR and CSC copies of the tile plus input and output buffers.
            const std::uint64_t bytes = d.nnz() * (triple + 2 * pair) +
                                        (std::uint64_t{d.rows.size()} + d.cols.size() + 2) * cfg_.idx_bytes +
                                        (std::uint64_t{d.rows.size()} + d.cols.size()) * pair;
            if (bytes > cfg_.mram_bytes) {
                throw CapacityError("dpu " + std::to_string(d.dpu_id) + " needs " + std::to_string(bytes) +
                                    " bytes of MRAM, has " + std::to_string(cfg_.mram_bytes));
            }
        }
    }

    CsrMatrix<V> a_;
    MachineConfig cfg_;
    Balance balance_;
    std::optional<Grid> grid_;
    unsigned host_threads_;
    std::array<std::unique_ptr<PartitionPlan<V>>, 3> plans_;
};

} // namespace pimla
