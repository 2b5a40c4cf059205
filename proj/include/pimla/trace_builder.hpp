#pragma once

#include <algorithm>
#include <cstdint>

#include "pimla/machine.hpp"
#include "pimla/pim_model.hpp"
#include "pimla/semiring.hpp"

namespace pimla {

/**
 * Emits one tasklet's instruction trace.
 *
 * A semiring operation of class c expands to instructions_for(c) arithmetic
 * instructions. Register allocation is simulated by a counter: every
 * rf_conflict_period-th operation reads two registers of the same parity
 * bank once.
 */
class TraceBuilder {
public:
    TraceBuilder(std::uint32_t tasklet_id, const MachineConfig& cfg) : cfg_(cfg) { trace_.tasklet_id = tasklet_id; }

    void op(OpClass c) {
        const std::uint32_t k = cfg_.instructions_for(c);
        if (k == 0) {
            return;
        }
        if (++ops_ % cfg_.rf_conflict_period == 0) {
            trace_.arith(0, 0, 1);
            trace_.arith(0, 1, k - 1);
        } else {
            trace_.arith(0, 1, k);
        }
    }
    void wram(std::uint32_t n = 1) { trace_.push(EventKind::wram_access, n); }
    void control(std::uint32_t n = 1) { trace_.push(EventKind::control, n); }
    void dma_read(std::uint64_t bytes) { trace_.dma(EventKind::dma_read, static_cast<std::uint32_t>(bytes)); }
    void dma_write(std::uint64_t bytes) { trace_.dma(EventKind::dma_write, static_cast<std::uint32_t>(bytes)); }
    void lock(std::uint32_t id) { trace_.sync(EventKind::mutex_lock, id); }
    void unlock(std::uint32_t id) { trace_.sync(EventKind::mutex_unlock, id); }
    void barrier(std::uint32_t id) { trace_.sync(EventKind::barrier, id); }

    /// Writes `bytes` from WRAM to MRAM in chunk-sized DMAs.
    void write_back(std::uint64_t bytes) {
        while (bytes > 0) {
            const auto n = std::min<std::uint64_t>(bytes, cfg_.wram_chunk_bytes);
            dma_write(n);
            bytes -= n;
        }
    }

    const MachineConfig& config() const { return cfg_; }
    TaskletTrace take() { return std::move(trace_); }

private:
    const MachineConfig& cfg_;
    TaskletTrace trace_;
    std::uint64_t ops_ = 0;
};

/**
 * Sequential MRAM region staged through a WRAM buffer. Reading past the
 * buffered prefix fetches the next chunk (or the region's tail).
 */
class MramStream {
public:
    MramStream(std::uint64_t total_bytes, std::uint32_t chunk_bytes) : total_(total_bytes), chunk_(chunk_bytes) {}

    void read(TraceBuilder& b, std::uint64_t bytes) {
        pos_ += bytes;
        while (pos_ > buffered_ && buffered_ < total_) {
            const auto n = std::min<std::uint64_t>(chunk_, total_ - buffered_);
            b.dma_read(n);
            buffered_ += n;
        }
    }
    /// Advances without reading; a later read fetches from the new position.
    void skip(std::uint64_t bytes) {
        pos_ += bytes;
        buffered_ = std::max(buffered_, pos_);
    }
    /// Jumps back to the start. The first chunk stays buffered only if
    /// nothing was fetched after it.
    void rewind() {
        pos_ = 0;
        if (buffered_ > chunk_) {
            buffered_ = 0;
        }
    }

private:
    std::uint64_t total_;
    std::uint32_t chunk_;
    std::uint64_t pos_ = 0;
    std::uint64_t buffered_ = 0;
};

} // namespace pimla
