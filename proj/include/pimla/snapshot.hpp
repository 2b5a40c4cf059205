#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "pimla/error.hpp"
#include "pimla/partition.hpp"
#include "pimla/sparse.hpp"

// Snapshot layout, all integers little-endian:
//   "PIMLASNP" u32 version u8 value_kind u8 strategy u8 balance u8 pad
//   u32 num_dpus u32 grid_rows u32 grid_cols u32 num_rows u32 num_cols
//   per DPU: u32 dpu_id u32 rows.begin u32 rows.end u32 cols.begin u32 cols.end, then a CSR block
//   CSR block: u8 format_tag(=1) u32 rows u32 cols u64 nnz, row_ptr[rows+1], col_indices[nnz], values[nnz]

namespace pimla {

namespace detail {

inline constexpr char kSnapshotMagic[8] = {'P', 'I', 'M', 'L', 'A', 'S', 'N', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

template <class V>
constexpr std::uint8_t value_kind_tag() {
    if constexpr (std::is_same_v<V, std::uint8_t>) {
        return 1;
    } else if constexpr (std::is_same_v<V, double>) {
        return 2;
    } else {
        return 0;
    }
}

template <class T>
void put(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
        throw IoError("snapshot truncated");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& xs) {
    for (const auto& x : xs) {
        put(out, x);
    }
}

template <class T>
std::vector<T> get_array(std::istream& in, std::uint64_t n) {
    std::vector<T> xs;
    xs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 20)));
    for (std::uint64_t k = 0; k < n; ++k) {
        xs.push_back(get<T>(in));
    }
    return xs;
}

} // namespace detail

template <class V>
void write_csr_block(std::ostream& out, const CsrMatrix<V>& m) {
    detail::put<std::uint8_t>(out, 1);
    detail::put<std::uint32_t>(out, m.num_rows);
    detail::put<std::uint32_t>(out, m.num_cols);
    detail::put<std::uint64_t>(out, m.nnz());
    detail::put_array(out, m.row_ptr);
    detail::put_array(out, m.col_indices);
    detail::put_array(out, m.values);
}

template <class V>
CsrMatrix<V> read_csr_block(std::istream& in) {
    if (detail::get<std::uint8_t>(in) != 1) {
        throw ConsistencyError("snapshot block is not CSR");
    }
    CsrMatrix<V> m;
    m.num_rows = detail::get<std::uint32_t>(in);
    m.num_cols = detail::get<std::uint32_t>(in);
    const auto nnz = detail::get<std::uint64_t>(in);
    m.row_ptr = detail::get_array<index_t>(in, std::uint64_t{m.num_rows} + 1);
    m.col_indices = detail::get_array<index_t>(in, nnz);
    m.values = detail::get_array<V>(in, nnz);
    validate(m);
    return m;
}

template <class V>
void write_snapshot(std::ostream& out, const PartitionPlan<V>& plan) {
    out.write(detail::kSnapshotMagic, sizeof detail::kSnapshotMagic);
    detail::put<std::uint32_t>(out, detail::kSnapshotVersion);
    detail::put<std::uint8_t>(out, detail::value_kind_tag<V>());
    detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(plan.strategy));
    detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(plan.balance));
    detail::put<std::uint8_t>(out, 0);
    for (const std::uint32_t v : {plan.num_dpus, plan.grid.rows, plan.grid.cols, plan.num_rows, plan.num_cols}) {
        detail::put(out, v);
    }
    for (const auto& a : plan.dpus) {
        for (const std::uint32_t v : {a.dpu_id, a.rows.begin, a.rows.end, a.cols.begin, a.cols.end}) {
            detail::put(out, v);
        }
        write_csr_block(out, a.csr);
    }
    if (!out) {
        throw IoError("snapshot write failed");
    }
}

template <class V>
PartitionPlan<V> read_snapshot(std::istream& in) {
    char magic[sizeof detail::kSnapshotMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, detail::kSnapshotMagic, sizeof magic) != 0) {
        throw ConsistencyError("not a pimla snapshot");
    }
    if (detail::get<std::uint32_t>(in) != detail::kSnapshotVersion) {
        throw ConsistencyError("unsupported snapshot version");
    }
    if (detail::get<std::uint8_t>(in) != detail::value_kind_tag<V>()) {
        throw ConsistencyError("snapshot value kind does not match");
    }
    PartitionPlan<V> plan;
    plan.strategy = static_cast<Strategy>(detail::get<std::uint8_t>(in));
    plan.balance = static_cast<Balance>(detail::get<std::uint8_t>(in));
    detail::get<std::uint8_t>(in);
    plan.num_dpus = detail::get<std::uint32_t>(in);
    plan.grid.rows = detail::get<std::uint32_t>(in);
    plan.grid.cols = detail::get<std::uint32_t>(in);
    plan.num_rows = detail::get<std::uint32_t>(in);
    plan.num_cols = detail::get<std::uint32_t>(in);
    if (std::uint64_t{plan.grid.rows} * plan.grid.cols != plan.num_dpus) {
        throw ConsistencyError("snapshot grid does not match its DPU count");
    }
    const InputPolicy in_policy =
        plan.strategy == Strategy::row_wise ? InputPolicy::full_vector : InputPolicy::column_segment;
    const OutputPolicy out_policy = plan.strategy == Strategy::row_wise      ? OutputPolicy::disjoint_slice
                                    : plan.strategy == Strategy::column_wise ? OutputPolicy::full_partial
                                                                             : OutputPolicy::row_block_partial;
    for (std::uint32_t d = 0; d < plan.num_dpus; ++d) {
        DpuAssignment<V> a;
        a.dpu_id = detail::get<std::uint32_t>(in);
        a.rows.begin = detail::get<std::uint32_t>(in);
        a.rows.end = detail::get<std::uint32_t>(in);
        a.cols.begin = detail::get<std::uint32_t>(in);
        a.cols.end = detail::get<std::uint32_t>(in);
        a.csr = read_csr_block<V>(in);
        if (a.dpu_id != d || a.csr.num_rows != a.rows.size() || a.csr.num_cols != a.cols.size()) {
            throw ConsistencyError("snapshot DPU " + std::to_string(d) + " header is inconsistent");
        }
        a.coo = to_coo(a.csr);
        a.csc = to_csc(a.csr);
        a.input_policy = in_policy;
        a.output_policy = out_policy;
        if (d % plan.grid.cols == 0) {
            plan.row_blocks.push_back(a.rows);
        }
        if (d < plan.grid.cols) {
            plan.col_blocks.push_back(a.cols);
        }
        plan.dpus.push_back(std::move(a));
    }
    return plan;
}

} // namespace pimla
