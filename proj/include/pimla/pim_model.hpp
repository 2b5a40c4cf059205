#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pimla/error.hpp"
#include "pimla/machine.hpp"
#include "pimla/partition.hpp"

namespace pimla {

enum class EventKind : std::uint8_t {
    arith,
    wram_access,
    dma_read,
    dma_write,
    mutex_lock,
    mutex_unlock,
    barrier,
    control,
};

inline constexpr std::array<const char*, 8> kEventKindNames = {
    "arith", "load-store-wram", "dma-read", "dma-write", "mutex-lock", "mutex-unlock", "barrier", "control"};

inline constexpr std::size_t kEventKinds = kEventKindNames.size();

inline bool is_sync(EventKind k) {
    return k == EventKind::mutex_lock || k == EventKind::mutex_unlock || k == EventKind::barrier;
}

inline bool is_dma(EventKind k) { return k == EventKind::dma_read || k == EventKind::dma_write; }

/**
 * One traced instruction, or `repeat` identical ones in a row.
 *
 * `arg` is the transfer size for DMA events and the lock or barrier id for
 * synchronization events. Arithmetic events carry the register-bank parity
 * of their two source operands.
 */
struct TraceEvent {
    EventKind kind = EventKind::control;
    std::uint8_t parity_a = 0;
    std::uint8_t parity_b = 1;
    std::uint32_t arg = 0;
    std::uint32_t repeat = 1;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TaskletTrace {
    std::uint32_t tasklet_id = 0;
    std::vector<TraceEvent> events;

    void push(EventKind kind, std::uint32_t repeat = 1) {
        if (repeat == 0) {
            return;
        }
        if (!events.empty() && events.back().kind == kind && !is_dma(kind) && !is_sync(kind) &&
            kind != EventKind::arith) {
            events.back().repeat += repeat;
            return;
        }
        events.push_back({kind, 0, 1, 0, repeat});
    }
    void dma(EventKind kind, std::uint32_t bytes) { events.push_back({kind, 0, 1, bytes, 1}); }
    void sync(EventKind kind, std::uint32_t id) { events.push_back({kind, 0, 1, id, 1}); }
    void arith(std::uint8_t pa, std::uint8_t pb, std::uint32_t repeat = 1) {
        if (repeat == 0) {
            return;
        }
        if (!events.empty() && events.back().kind == EventKind::arith && events.back().parity_a == pa &&
            events.back().parity_b == pb) {
            events.back().repeat += repeat;
            return;
        }
        events.push_back({EventKind::arith, pa, pb, 0, repeat});
    }

    std::uint64_t instruction_count() const {
        std::uint64_t n = 0;
        for (const auto& e : events) {
            n += e.repeat;
        }
        return n;
    }
};

/// Cycle accounting of one DPU's kernel: issue + memory + revolver + rf_hazard == total.
struct DpuBreakdown {
    std::uint64_t total = 0;
    std::uint64_t issue = 0;
    std::uint64_t memory_stall = 0;
    std::uint64_t revolver_stall = 0;
    std::uint64_t rf_hazard_stall = 0;
    /// Sum over cycles of tasklets with an instruction in flight.
    std::uint64_t active_thread_cycles = 0;

    double avg_active_threads() const {
        return total == 0 ? 0.0 : static_cast<double>(active_thread_cycles) / static_cast<double>(total);
    }
    friend bool operator==(const DpuBreakdown&, const DpuBreakdown&) = default;
};

struct Dispatch {
    std::uint64_t cycle;
    std::uint32_t tasklet;
};

struct InstructionMix {
    std::array<std::uint64_t, kEventKinds> counts{};

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto c : counts) {
            t += c;
        }
        return t;
    }
    std::uint64_t count(EventKind k) const { return counts[static_cast<std::size_t>(k)]; }
    double share(EventKind k) const {
        const auto t = total();
        return t == 0 ? 0.0 : static_cast<double>(count(k)) / static_cast<double>(t);
    }
    std::uint64_t sync_count() const {
        return count(EventKind::mutex_lock) + count(EventKind::mutex_unlock) + count(EventKind::barrier);
    }
    double sync_share() const {
        const auto t = total();
        return t == 0 ? 0.0 : static_cast<double>(sync_count()) / static_cast<double>(t);
    }
    InstructionMix& operator+=(const InstructionMix& o) {
        for (std::size_t k = 0; k < kEventKinds; ++k) {
            counts[k] += o.counts[k];
        }
        return *this;
    }
    friend bool operator==(const InstructionMix&, const InstructionMix&) = default;
};

inline InstructionMix instruction_mix(std::span<const TaskletTrace> traces) {
    InstructionMix mix;
    for (const auto& t : traces) {
        for (const auto& e : t.events) {
            mix.counts[static_cast<std::size_t>(e.kind)] += e.repeat;
        }
    }
    return mix;
}

/**
 * Checks that every tasklet releases exactly the locks it takes, never
 * re-acquires a held lock, and that all tasklets pass the same barrier
 * sequence.
 */
inline void validate_traces(std::span<const TaskletTrace> traces, const MachineConfig& cfg) {
    if (traces.size() > cfg.max_tasklets) {
        throw TraceValidationError(std::to_string(traces.size()) + " tasklets exceed the hardware limit of " +
                                   std::to_string(cfg.max_tasklets));
    }
    std::vector<std::uint32_t> reference_barriers;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        std::set<std::uint32_t> held;
        std::vector<std::uint32_t> barriers;
        for (const auto& e : traces[t].events) {
            if (e.repeat == 0) {
                throw TraceValidationError("zero-length event in tasklet " + std::to_string(t));
            }
            if ((is_sync(e.kind) || is_dma(e.kind)) && e.repeat != 1) {
                throw TraceValidationError("synchronization and DMA events cannot repeat");
            }
            switch (e.kind) {
            case EventKind::mutex_lock:
                if (!held.insert(e.arg).second) {
                    throw TraceValidationError("tasklet " + std::to_string(t) + " re-locks mutex " +
                                               std::to_string(e.arg));
                }
                break;
            case EventKind::mutex_unlock:
                if (held.erase(e.arg) == 0) {
                    throw TraceValidationError("tasklet " + std::to_string(t) + " unlocks mutex " +
                                               std::to_string(e.arg) + " it does not hold");
                }
                break;
            case EventKind::barrier:
                if (!held.empty()) {
                    throw TraceValidationError("tasklet " + std::to_string(t) + " reaches a barrier holding a lock");
                }
                barriers.push_back(e.arg);
                break;
            default:
                break;
            }
        }
        if (!held.empty()) {
            throw TraceValidationError("tasklet " + std::to_string(t) + " ends with " + std::to_string(held.size()) +
                                       " unreleased lock(s)");
        }
        if (t == 0) {
            reference_barriers = barriers;
        } else if (barriers != reference_barriers) {
            throw TraceValidationError("tasklet " + std::to_string(t) + " barrier sequence differs from tasklet 0");
        }
    }
}

/**
 * Cycle-level model of the revolver pipeline.
 *
 * Every cycle the lowest-id eligible tasklet dispatches its next instruction.
 * A tasklet is eligible once `dispatch_gap_cycles` have passed since its last
 * dispatch, its DMA (if any) has completed, and it is not waiting on a mutex
 * or barrier. An arithmetic instruction whose operands share a register
 * bank occupies one extra cycle (rf_hazard). Cycles without a dispatch are
 * memory stalls while any DMA is outstanding, revolver stalls otherwise.
 */
inline DpuBreakdown schedule(std::span<const TaskletTrace> traces, const MachineConfig& cfg,
                             std::vector<Dispatch>* dispatch_log = nullptr) {
    validate_traces(traces, cfg);
    const std::size_t n = traces.size();
    const std::uint64_t gap = cfg.dispatch_gap_cycles;

    struct State {
        const TraceEvent* ev = nullptr;
        const TraceEvent* end = nullptr;
        std::uint32_t left = 0; // remaining repeats of *ev
        std::uint64_t ready_at = 0;
        std::uint64_t dma_done = 0;
        bool at_barrier = false;
        bool waiting_lock = false;
        bool running() const { return ev != end; }
    };
    std::vector<State> st(n);
    std::map<std::uint32_t, std::size_t> owner;
    std::size_t barrier_arrivals = 0;
    std::size_t running = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto& evs = traces[t].events;
        st[t].ev = evs.data();
        st[t].end = evs.data() + evs.size();
        if (!evs.empty()) {
            st[t].left = evs[0].repeat;
            ++running;
        }
    }

    DpuBreakdown out;
    std::uint64_t now = 0;
    std::uint64_t mem_until = 0; // latest completion of any issued DMA
    // Only the last `gap` dispatches can be cut short by the end of the kernel.
    std::vector<std::uint64_t> recent(gap, UINT64_MAX);
    std::size_t recent_pos = 0;

    auto idle_until = [&](std::uint64_t next) {
        const std::uint64_t mem_end = std::clamp(mem_until, now, next);
        out.memory_stall += mem_end - now;
        out.revolver_stall += next - mem_end;
        now = next;
    };

    while (running > 0) {
        std::size_t pick = n;
        for (std::size_t t = 0; t < n; ++t) {
            auto& s = st[t];
            if (!s.running() || s.at_barrier || now < s.ready_at || now < s.dma_done) {
                continue;
            }
            if (s.ev->kind == EventKind::mutex_lock) {
                auto it = owner.find(s.ev->arg);
                if (it != owner.end() && it->second != t) {
                    s.waiting_lock = true;
                    continue;
                }
            }
            pick = t;
            break;
        }

        if (pick == n) {
            std::uint64_t next = UINT64_MAX;
            for (const auto& s : st) {
                if (s.running() && !s.at_barrier && !s.waiting_lock) {
                    next = std::min(next, std::max(s.ready_at, s.dma_done));
                }
            }
            if (next == UINT64_MAX) {
                std::ostringstream msg;
                msg << "deadlock at cycle " << now << "; waits-for:";
                for (std::size_t t = 0; t < n; ++t) {
                    if (!st[t].running()) {
                        continue;
                    }
                    if (st[t].at_barrier) {
                        msg << " t" << t << "->barrier" << st[t].ev[-1].arg;
                    } else {
                        const auto id = st[t].ev->arg;
                        msg << " t" << t << "->mutex" << id << "(held by t" << owner[id] << ")";
                    }
                }
                throw DeadlockError(msg.str());
            }
            idle_until(next);
            continue;
        }

        auto& s = st[pick];
        const TraceEvent& e = *s.ev;
        const std::uint64_t at = now;
        ++out.issue;
        recent[recent_pos] = at;
        recent_pos = recent_pos + 1 == gap ? 0 : recent_pos + 1;
        out.active_thread_cycles += gap;
        if (dispatch_log) {
            dispatch_log->push_back({at, static_cast<std::uint32_t>(pick)});
        }
        now = at + 1;
        s.ready_at = at + gap;
        switch (e.kind) {
        case EventKind::arith:
            if (e.parity_a % cfg.rf_parity_banks == e.parity_b % cfg.rf_parity_banks) {
                ++out.rf_hazard_stall;
                now = at + 2;
            }
            break;
        case EventKind::dma_read:
        case EventKind::dma_write:
            s.dma_done = at + 1 + cfg.dma_latency(e.arg);
            mem_until = std::max(mem_until, s.dma_done);
            break;
        case EventKind::mutex_lock:
            owner[e.arg] = pick;
            break;
        case EventKind::mutex_unlock:
            owner.erase(e.arg);
            for (auto& other : st) {
                other.waiting_lock = false;
            }
            break;
        case EventKind::barrier:
            s.at_barrier = true;
            if (++barrier_arrivals == n) {
                barrier_arrivals = 0;
                for (auto& other : st) {
                    other.at_barrier = false;
                }
            }
            break;
        default:
            break;
        }
        if (--s.left == 0 && ++s.ev != s.end) {
            s.left = s.ev->repeat;
        }
        if (!s.running()) {
            --running;
        }
    }
    // Outstanding DMAs keep their tasklets alive past the last dispatch.
    if (mem_until > now) {
        idle_until(mem_until);
    }
    out.total = now;
    for (const auto c : recent) {
        if (c != UINT64_MAX && c + gap > out.total) {
            out.active_thread_cycles -= c + gap - out.total;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Host <-> PIM phase costs

struct PhaseCosts {
    double load_seconds = 0;
    double kernel_seconds = 0;
    double retrieve_seconds = 0;
    double merge_seconds = 0;
    std::uint64_t kernel_cycles = 0;

    double total_seconds() const { return load_seconds + kernel_seconds + retrieve_seconds + merge_seconds; }
};

/**
 * Load and retrieve stream over the host link at the bandwidth of the ranks
 * in use; the kernel lasts as long as the slowest DPU; the merge runs at a
 * fixed number of plus-operations per host cycle.
 */
inline PhaseCosts phase_costs(const TransferVolume& volume, std::uint64_t max_kernel_cycles, std::uint64_t merge_ops,
                              std::uint32_t num_dpus, const MachineConfig& cfg) {
    PhaseCosts p;
    const double bw = cfg.effective_bandwidth(num_dpus);
    p.load_seconds = static_cast<double>(volume.load_bytes) / bw;
    p.retrieve_seconds = static_cast<double>(volume.retrieve_bytes) / bw;
    p.kernel_cycles = max_kernel_cycles;
    p.kernel_seconds = static_cast<double>(max_kernel_cycles) / cfg.dpu_freq_hz;
    p.merge_seconds = static_cast<double>(merge_ops) / (cfg.host_merge_ops_per_cycle * cfg.host_freq_hz);
    return p;
}

/// Everything measured for one simulated matrix-vector product.
struct ExecutionReport {
    PhaseCosts phases;
    TransferVolume volume;
    std::vector<DpuBreakdown> per_dpu;
    InstructionMix mix;

    DpuBreakdown totals() const {
        DpuBreakdown sum;
        for (const auto& d : per_dpu) {
            sum.total += d.total;
            sum.issue += d.issue;
            sum.memory_stall += d.memory_stall;
            sum.revolver_stall += d.revolver_stall;
            sum.rf_hazard_stall += d.rf_hazard_stall;
            sum.active_thread_cycles += d.active_thread_cycles;
        }
        return sum;
    }
    double avg_active_threads() const { return totals().avg_active_threads(); }

    /// Shares of issue/memory/revolver/rf over all simulated DPU cycles.
    std::array<double, 4> stall_shares() const {
        const auto t = totals();
        if (t.total == 0) {
            return {0, 0, 0, 0};
        }
        const double tot = static_cast<double>(t.total);
        return {t.issue / tot, t.memory_stall / tot, t.revolver_stall / tot, t.rf_hazard_stall / tot};
    }
};

inline nlohmann::json to_json(const InstructionMix& mix) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t k = 0; k < kEventKinds; ++k) {
        j[kEventKindNames[k]] = mix.counts[k];
    }
    return j;
}

inline nlohmann::json to_json(const ExecutionReport& r) {
    nlohmann::json j;
    j["phases"] = {{"load_seconds", r.phases.load_seconds},
                   {"kernel_seconds", r.phases.kernel_seconds},
                   {"retrieve_seconds", r.phases.retrieve_seconds},
                   {"merge_seconds", r.phases.merge_seconds},
                   {"total_seconds", r.phases.total_seconds()},
                   {"kernel_cycles", r.phases.kernel_cycles}};
    j["volume"] = {{"load_bytes", r.volume.load_bytes},
                   {"retrieve_bytes", r.volume.retrieve_bytes},
                   {"merge_ops", r.volume.merge_ops}};
    auto& dpus = j["per_dpu"] = nlohmann::json::array();
    for (const auto& d : r.per_dpu) {
        dpus.push_back({{"total", d.total},
                        {"issue", d.issue},
                        {"memory_stall", d.memory_stall},
                        {"revolver_stall", d.revolver_stall},
                        {"rf_hazard_stall", d.rf_hazard_stall},
                        {"avg_active_threads", d.avg_active_threads()}});
    }
    j["instruction_mix"] = to_json(r.mix);
    j["avg_active_threads"] = r.avg_active_threads();
    return j;
}

/// Fixed-column CSV: one row per DPU, then a totals row.
inline std::string to_csv(const ExecutionReport& r) {
    std::ostringstream out;
    out << "dpu,total_cycles,issue,memory_stall,revolver_stall,rf_hazard_stall,avg_active_threads\n";
    auto row = [&](const std::string& id, const DpuBreakdown& d) {
        out << id << ',' << d.total << ',' << d.issue << ',' << d.memory_stall << ',' << d.revolver_stall << ','
            << d.rf_hazard_stall << ',' << d.avg_active_threads() << '\n';
    };
    for (std::size_t k = 0; k < r.per_dpu.size(); ++k) {
        row(std::to_string(k), r.per_dpu[k]);
    }
    row("total", r.totals());
    return out.str();
}

} // namespace pimla
