#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>

#include "pimla/error.hpp"
#include "pimla/semiring.hpp"

namespace pimla {

/**
 * Parameters of the simulated PIM system. Defaults follow the UPMEM
 * organization (64 MiB MRAM, 64 KiB WRAM, 24 KiB IRAM, 24 tasklets, an
 * 11-cycle revolver dispatch gap, 8 DPUs per rank); timing knobs that the
 * hardware documentation does not pin down are calibration inputs.
 */
struct MachineConfig {
    std::uint32_t num_dpus = 64;
    std::uint64_t mram_bytes = 64ull << 20;
    std::uint32_t wram_bytes = 64u << 10;
    std::uint32_t iram_bytes = 24u << 10;
    std::uint32_t max_tasklets = 24;
    std::uint32_t dispatch_gap_cycles = 11;
    double dpu_freq_hz = 350e6;

    // Host link: per-rank bandwidth, parallel across at most max_parallel_ranks.
    double host_link_bandwidth_bytes_per_sec = 1.0e9;
    std::uint32_t dpus_per_rank = 8;
    std::uint32_t max_parallel_ranks = 32;

    // dma_latency(bytes) = dma_base_cycles + ceil(bytes / dma_bytes_per_cycle)
    std::uint32_t dma_base_cycles = 64;
    std::uint32_t dma_bytes_per_cycle = 8;

    std::uint32_t rf_parity_banks = 2;
    /// Every n-th arithmetic instruction of a tasklet reads two same-parity registers.
    std::uint32_t rf_conflict_period = 4;

    // Host merge
    double host_freq_hz = 2.1e9;
    double host_merge_ops_per_cycle = 4.0;

    // Kernel shape
    std::uint32_t tasklets = 16;
    std::uint32_t wram_chunk_bytes = 2048;
    std::uint32_t lock_stripes = 32;
    std::uint32_t elem_bytes = 4;
    std::uint32_t idx_bytes = 4;

    // Instructions per semiring operation; DPUs emulate floating point in software.
    std::uint32_t logic_instructions = 1;
    std::uint32_t int_add_instructions = 1;
    std::uint32_t compare_select_instructions = 2;
    std::uint32_t fp_add_instructions = 16;
    std::uint32_t fp_mul_instructions = 72;

    std::uint64_t dma_latency(std::uint64_t bytes) const {
        return dma_base_cycles + (bytes + dma_bytes_per_cycle - 1) / dma_bytes_per_cycle;
    }

    std::uint32_t instructions_for(OpClass c) const {
        switch (c) {
        case OpClass::logic:
            return logic_instructions;
        case OpClass::int_add:
            return int_add_instructions;
        case OpClass::compare_select:
            return compare_select_instructions;
        case OpClass::fp_add:
            return fp_add_instructions;
        case OpClass::fp_mul:
            return fp_mul_instructions;
        }
        return 1;
    }

    /// Aggregate host link bandwidth when `dpus` DPUs transfer in parallel.
    double effective_bandwidth(std::uint32_t dpus) const {
        const std::uint32_t ranks = (dpus + dpus_per_rank - 1) / dpus_per_rank;
        const std::uint32_t active = std::max<std::uint32_t>(1, std::min(ranks, max_parallel_ranks));
        return host_link_bandwidth_bytes_per_sec * active;
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0)) {
                throw ConfigError(std::string(name) + " must be positive");
            }
        };
        if (dispatch_gap_cycles < 1) {
            throw ConfigError("dispatch_gap_cycles must be >= 1");
        }
        if (max_tasklets < 1) {
            throw ConfigError("max_tasklets must be >= 1");
        }
        if (tasklets < 1 || tasklets > max_tasklets) {
            throw ConfigError("tasklets must be in [1, max_tasklets]");
        }
        positive(num_dpus, "num_dpus");
        positive(static_cast<double>(mram_bytes), "mram_bytes");
        positive(wram_bytes, "wram_bytes");
        positive(iram_bytes, "iram_bytes");
        positive(dpu_freq_hz, "dpu_freq_hz");
        positive(host_link_bandwidth_bytes_per_sec, "host_link_bandwidth_bytes_per_sec");
        positive(dpus_per_rank, "dpus_per_rank");
        positive(max_parallel_ranks, "max_parallel_ranks");
        positive(dma_bytes_per_cycle, "dma_bytes_per_cycle");
        positive(rf_parity_banks, "rf_parity_banks");
        positive(rf_conflict_period, "rf_conflict_period");
        positive(host_freq_hz, "host_freq_hz");
        positive(host_merge_ops_per_cycle, "host_merge_ops_per_cycle");
        positive(wram_chunk_bytes, "wram_chunk_bytes");
        positive(lock_stripes, "lock_stripes");
        positive(elem_bytes, "elem_bytes");
        positive(idx_bytes, "idx_bytes");
    }
};

namespace detail {

template <class F>
void for_each_config_field(MachineConfig& c, F&& f) {
    f("num_dpus", c.num_dpus);
    f("mram_bytes", c.mram_bytes);
    f("wram_bytes", c.wram_bytes);
    f("iram_bytes", c.iram_bytes);
    f("max_tasklets", c.max_tasklets);
    f("dispatch_gap_cycles", c.dispatch_gap_cycles);
    f("dpu_freq_hz", c.dpu_freq_hz);
    f("host_link_bandwidth_bytes_per_sec", c.host_link_bandwidth_bytes_per_sec);
    f("dpus_per_rank", c.dpus_per_rank);
    f("max_parallel_ranks", c.max_parallel_ranks);
    f("dma_base_cycles", c.dma_base_cycles);
    f("dma_bytes_per_cycle", c.dma_bytes_per_cycle);
    f("rf_parity_banks", c.rf_parity_banks);
    f("rf_conflict_period", c.rf_conflict_period);
    f("host_freq_hz", c.host_freq_hz);
    f("host_merge_ops_per_cycle", c.host_merge_ops_per_cycle);
    f("tasklets", c.tasklets);
    f("wram_chunk_bytes", c.wram_chunk_bytes);
    f("lock_stripes", c.lock_stripes);
    f("elem_bytes", c.elem_bytes);
    f("idx_bytes", c.idx_bytes);
    f("logic_instructions", c.logic_instructions);
    f("int_add_instructions", c.int_add_instructions);
    f("compare_select_instructions", c.compare_select_instructions);
    f("fp_add_instructions", c.fp_add_instructions);
    f("fp_mul_instructions", c.fp_mul_instructions);
}

} // namespace detail

/// Reads `key = value` lines ('#' starts a comment) over the defaults.
inline MachineConfig parse_machine_config(std::istream& in) {
    MachineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) {
            continue;
        }
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        detail::for_each_config_field(cfg, [&](const char* name, auto& field) {
            if (key != name) {
                return;
            }
            found = true;
            std::istringstream vs(value);
            double v = 0;
            if (!(vs >> v) || !vs.eof() || v < 0) {
                throw ParseError(line_no, "invalid value for " + key);
            }
            field = static_cast<std::remove_reference_t<decltype(field)>>(v);
        });
        if (!found) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown machine key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline MachineConfig load_machine_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open machine config '" + path + "'");
    }
    return parse_machine_config(in);
}

inline std::string dump_machine_config(MachineConfig cfg) {
    std::ostringstream out;
    out.precision(17);
    detail::for_each_config_field(cfg, [&](const char* name, auto& field) { out << name << " = " << field << '\n'; });
    return out.str();
}

} // namespace pimla
