#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "pimla/error.hpp"

namespace pimla {

/// 32-bit indices, matching the INT32 data layout on the simulated DPUs.
using index_t = std::uint32_t;

enum class Format { coo, csr, csc };

inline std::string to_string(Format f) {
    switch (f) {
    case Format::coo:
        return "coo";
    case Format::csr:
        return "csr";
    case Format::csc:
        return "csc";
    }
    return "?";
}

template <class V>
struct Triple {
    index_t row;
    index_t col;
    V value;

    friend bool operator==(const Triple&, const Triple&) = default;
};

/// Coordinate storage: triples sorted by (row, col), no duplicates.
template <class V>
struct CooMatrix {
    index_t num_rows = 0;
    index_t num_cols = 0;
    std::vector<Triple<V>> triples;

    std::size_t nnz() const { return triples.size(); }
    friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

template <class V>
struct CsrMatrix {
    index_t num_rows = 0;
    index_t num_cols = 0;
    std::vector<index_t> row_ptr{0};
    std::vector<index_t> col_indices;
    std::vector<V> values;

    std::size_t nnz() const { return col_indices.size(); }
    index_t row_nnz(index_t r) const { return row_ptr[r + 1] - row_ptr[r]; }
    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

template <class V>
struct CscMatrix {
    index_t num_rows = 0;
    index_t num_cols = 0;
    std::vector<index_t> col_ptr{0};
    std::vector<index_t> row_indices;
    std::vector<V> values;

    std::size_t nnz() const { return row_indices.size(); }
    index_t col_nnz(index_t c) const { return col_ptr[c + 1] - col_ptr[c]; }
    friend bool operator==(const CscMatrix&, const CscMatrix&) = default;
};

template <class V>
using SparseMatrix = std::variant<CooMatrix<V>, CsrMatrix<V>, CscMatrix<V>>;

/// Compressed vector: strictly increasing indices, never stores `zero`.
template <class V>
struct SparseVector {
    index_t length = 0;
    std::vector<index_t> indices;
    std::vector<V> values;

    std::size_t nnz() const { return indices.size(); }
    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

template <class V>
struct DenseVector {
    std::vector<V> values;

    index_t length() const { return static_cast<index_t>(values.size()); }
    friend bool operator==(const DenseVector&, const DenseVector&) = default;
};

template <class V>
using InputVector = std::variant<SparseVector<V>, DenseVector<V>>;

template <class V>
index_t length_of(const InputVector<V>& x) {
    return std::visit(
        [](const auto& v) -> index_t {
            if constexpr (requires { v.length(); }) {
                return v.length();
            } else {
                return v.length;
            }
        },
        x);
}

// ---------------------------------------------------------------------------
// Validation

template <class V>
void validate(const CooMatrix<V>& m) {
    for (std::size_t k = 0; k < m.triples.size(); ++k) {
        const auto& t = m.triples[k];
        if (t.row >= m.num_rows || t.col >= m.num_cols) {
            throw DimensionError("coo triple out of range");
        }
        if (k > 0) {
            const auto& p = m.triples[k - 1];
            if (std::tie(p.row, p.col) >= std::tie(t.row, t.col)) {
                throw ConsistencyError("coo triples not strictly sorted by (row, col)");
            }
        }
    }
}

namespace detail {
template <class V>
void validate_compressed(std::size_t outer, std::size_t inner_dim, const std::vector<index_t>& ptr,
                         const std::vector<index_t>& idx, const std::vector<V>& vals, const char* what) {
    if (ptr.size() != outer + 1 || ptr.front() != 0 || ptr.back() != idx.size() || idx.size() != vals.size()) {
        throw ConsistencyError(std::string(what) + ": pointer array inconsistent with nnz");
    }
    for (std::size_t o = 0; o < outer; ++o) {
        if (ptr[o] > ptr[o + 1]) {
            throw ConsistencyError(std::string(what) + ": pointer array not monotone");
        }
        for (index_t k = ptr[o]; k < ptr[o + 1]; ++k) {
            if (idx[k] >= inner_dim) {
                throw DimensionError(std::string(what) + ": index out of range");
            }
            if (k > ptr[o] && idx[k - 1] >= idx[k]) {
                throw ConsistencyError(std::string(what) + ": indices not strictly sorted");
            }
        }
    }
}
} // namespace detail

template <class V>
void validate(const CsrMatrix<V>& m) {
    detail::validate_compressed(m.num_rows, m.num_cols, m.row_ptr, m.col_indices, m.values, "csr");
}

template <class V>
void validate(const CscMatrix<V>& m) {
    detail::validate_compressed(m.num_cols, m.num_rows, m.col_ptr, m.row_indices, m.values, "csc");
}

template <class V>
void validate(const SparseVector<V>& x, V zero) {
    if (x.indices.size() != x.values.size()) {
        throw ConsistencyError("sparse vector index/value size mismatch");
    }
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
        if (x.indices[k] >= x.length) {
            throw DimensionError("sparse vector index " + std::to_string(x.indices[k]) + " >= length " +
                                 std::to_string(x.length));
        }
        if (k > 0 && x.indices[k - 1] >= x.indices[k]) {
            throw ConsistencyError("sparse vector indices not strictly increasing");
        }
        if (x.values[k] == zero) {
            throw ConsistencyError("sparse vector stores the semiring zero");
        }
    }
}

// ---------------------------------------------------------------------------
// Construction and conversion

/// Sorts triples by (row, col); on duplicate coordinates the first occurrence wins.
template <class V>
CooMatrix<V> make_coo(index_t rows, index_t cols, std::vector<Triple<V>> triples) {
    std::stable_sort(triples.begin(), triples.end(),
                     [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    triples.erase(std::unique(triples.begin(), triples.end(),
                              [](const auto& a, const auto& b) { return a.row == b.row && a.col == b.col; }),
                  triples.end());
    CooMatrix<V> m{rows, cols, std::move(triples)};
    validate(m);
    return m;
}

template <class V>
CsrMatrix<V> to_csr(const CooMatrix<V>& m) {
    CsrMatrix<V> out;
    out.num_rows = m.num_rows;
    out.num_cols = m.num_cols;
    out.row_ptr.assign(std::size_t{m.num_rows} + 1, 0);
    out.col_indices.reserve(m.nnz());
    out.values.reserve(m.nnz());
    for (const auto& t : m.triples) {
        ++out.row_ptr[t.row + 1];
        out.col_indices.push_back(t.col);
        out.values.push_back(t.value);
    }
    for (index_t r = 0; r < m.num_rows; ++r) {
        out.row_ptr[r + 1] += out.row_ptr[r];
    }
    return out;
}

template <class V>
CooMatrix<V> to_coo(const CsrMatrix<V>& m) {
    CooMatrix<V> out{m.num_rows, m.num_cols, {}};
    out.triples.reserve(m.nnz());
    for (index_t r = 0; r < m.num_rows; ++r) {
        for (index_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            out.triples.push_back({r, m.col_indices[k], m.values[k]});
        }
    }
    return out;
}

template <class V>
CscMatrix<V> to_csc(const CooMatrix<V>& m) {
    CscMatrix<V> out;
    out.num_rows = m.num_rows;
    out.num_cols = m.num_cols;
    out.col_ptr.assign(std::size_t{m.num_cols} + 1, 0);
    for (const auto& t : m.triples) {
        ++out.col_ptr[t.col + 1];
    }
    for (index_t c = 0; c < m.num_cols; ++c) {
        out.col_ptr[c + 1] += out.col_ptr[c];
    }
    out.row_indices.resize(m.nnz());
    out.values.resize(m.nnz());
    std::vector<index_t> cursor(out.col_ptr.begin(), out.col_ptr.end() - 1);
    // Row-major input order keeps row indices sorted inside each column.
    for (const auto& t : m.triples) {
        const index_t k = cursor[t.col]++;
        out.row_indices[k] = t.row;
        out.values[k] = t.value;
    }
    return out;
}

template <class V>
CooMatrix<V> to_coo(const CscMatrix<V>& m) {
    std::vector<Triple<V>> triples;
    triples.reserve(m.nnz());
    for (index_t c = 0; c < m.num_cols; ++c) {
        for (index_t k = m.col_ptr[c]; k < m.col_ptr[c + 1]; ++k) {
            triples.push_back({m.row_indices[k], c, m.values[k]});
        }
    }
    std::sort(triples.begin(), triples.end(),
              [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    return {m.num_rows, m.num_cols, std::move(triples)};
}

template <class V>
CsrMatrix<V> to_csr(const CscMatrix<V>& m) {
    return to_csr(to_coo(m));
}

template <class V>
CscMatrix<V> to_csc(const CsrMatrix<V>& m) {
    return to_csc(to_coo(m));
}

template <class V>
const CooMatrix<V>& to_coo(const CooMatrix<V>& m) {
    return m;
}

template <class V>
const CsrMatrix<V>& to_csr(const CsrMatrix<V>& m) {
    return m;
}

template <class V>
const CscMatrix<V>& to_csc(const CscMatrix<V>& m) {
    return m;
}

template <class V>
SparseMatrix<V> convert(const SparseMatrix<V>& m, Format to) {
    return std::visit(
        [to](const auto& src) -> SparseMatrix<V> {
            switch (to) {
            case Format::coo:
                return CooMatrix<V>(to_coo(src));
            case Format::csr:
                return CsrMatrix<V>(to_csr(src));
            case Format::csc:
                break;
            }
            return CscMatrix<V>(to_csc(src));
        },
        m);
}

template <class V>
Format format_of(const SparseMatrix<V>& m) {
    return static_cast<Format>(m.index());
}

template <class V>
std::size_t nnz_of(const SparseMatrix<V>& m) {
    return std::visit([](const auto& a) { return a.nnz(); }, m);
}

template <class V>
CooMatrix<V> transpose(const CooMatrix<V>& m) {
    std::vector<Triple<V>> triples;
    triples.reserve(m.nnz());
    for (const auto& t : m.triples) {
        triples.push_back({t.col, t.row, t.value});
    }
    std::sort(triples.begin(), triples.end(),
              [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    return {m.num_cols, m.num_rows, std::move(triples)};
}

/// The CSC arrays of A are exactly the CSR arrays of A^T.
template <class V>
CsrMatrix<V> transpose(const CsrMatrix<V>& m) {
    const auto csc = to_csc(m);
    return {csc.num_cols, csc.num_rows, csc.col_ptr, csc.row_indices, csc.values};
}

template <class V>
CscMatrix<V> transpose(const CscMatrix<V>& m) {
    const auto csr = to_csr(m);
    return {csr.num_cols, csr.num_rows, csr.row_ptr, csr.col_indices, csr.values};
}

template <class V>
SparseMatrix<V> transpose(const SparseMatrix<V>& m) {
    return std::visit([](const auto& a) -> SparseMatrix<V> { return transpose(a); }, m);
}

/// Row-major dense copy with `zero` in unstored positions.
template <class V>
std::vector<V> materialize(const SparseMatrix<V>& m, V zero) {
    const auto coo = std::visit([](const auto& a) { return CooMatrix<V>(to_coo(a)); }, m);
    std::vector<V> dense(std::size_t{coo.num_rows} * coo.num_cols, zero);
    for (const auto& t : coo.triples) {
        dense[std::size_t{t.row} * coo.num_cols + t.col] = t.value;
    }
    return dense;
}

// ---------------------------------------------------------------------------
// Vectors

template <class V>
DenseVector<V> densify(const SparseVector<V>& x, V zero) {
    DenseVector<V> out{std::vector<V>(x.length, zero)};
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
        if (x.indices[k] >= x.length) {
            throw DimensionError("sparse vector index out of range");
        }
        out.values[x.indices[k]] = x.values[k];
    }
    return out;
}

template <class V>
SparseVector<V> sparsify(const DenseVector<V>& x, V zero) {
    SparseVector<V> out;
    out.length = x.length();
    for (index_t i = 0; i < x.length(); ++i) {
        if (x.values[i] != zero) {
            out.indices.push_back(i);
            out.values.push_back(x.values[i]);
        }
    }
    return out;
}

/// Percentage of stored entries: 100 * nnz / length.
template <class V>
double density(const SparseVector<V>& x) {
    for (const auto i : x.indices) {
        if (i >= x.length) {
            throw DimensionError("sparse vector index " + std::to_string(i) + " >= length " +
                                 std::to_string(x.length));
        }
    }
    if (x.length == 0) {
        return 0.0;
    }
    return 100.0 * static_cast<double>(x.nnz()) / static_cast<double>(x.length);
}

} // namespace pimla
