#pragma once

// Hand-rolled generators and reference implementations shared by the test
// suites. The oracles are deliberately naive and never call library kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "pimla/pimla.hpp"

namespace testing_support {

using pimla::index_t;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::uint64_t below(Rng& rng, std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng); }

/// Values that are never the semiring zero: 1 for boolean, small integers for tropical, reals in (0, 2] for arithmetic.
template <pimla::Semiring S>
typename S::value_type random_value(Rng& rng) {
    if constexpr (std::is_same_v<S, pimla::BooleanSemiring>) {
        return 1;
    } else if constexpr (std::is_same_v<S, pimla::TropicalSemiring>) {
        return static_cast<double>(1 + below(rng, 9));
    } else {
        return uniform(rng, 0.01, 2.0);
    }
}

template <pimla::Semiring S>
pimla::CsrMatrix<typename S::value_type> random_matrix(Rng& rng, index_t rows, index_t cols, double fill) {
    std::vector<pimla::Triple<typename S::value_type>> t;
    for (index_t r = 0; r < rows; ++r) {
        for (index_t c = 0; c < cols; ++c) {
            if (uniform(rng, 0, 1) < fill) {
                t.push_back({r, c, random_value<S>(rng)});
            }
        }
    }
    return pimla::to_csr(pimla::make_coo(rows, cols, std::move(t)));
}

/// Exactly `k` distinct random indices, ascending.
inline std::vector<index_t> random_indices(Rng& rng, index_t n, index_t k) {
    std::vector<index_t> all(n);
    for (index_t i = 0; i < n; ++i) {
        all[i] = i;
    }
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

template <pimla::Semiring S>
pimla::SparseVector<typename S::value_type> random_sparse(Rng& rng, index_t n, index_t k) {
    pimla::SparseVector<typename S::value_type> x{n, random_indices(rng, n, k), {}};
    for (std::size_t i = 0; i < x.indices.size(); ++i) {
        x.values.push_back(random_value<S>(rng));
    }
    return x;
}

/// Directed graph with `arcs` random arcs (duplicates and self-loops dropped) and weights in [1, max_w].
inline pimla::EdgeList random_graph(Rng& rng, index_t n, std::size_t arcs, std::uint32_t max_w = 1) {
    std::set<std::pair<index_t, index_t>> seen;
    pimla::EdgeList g;
    g.num_nodes = n;
    for (std::size_t k = 0; k < arcs; ++k) {
        const auto s = static_cast<index_t>(below(rng, n));
        const auto d = static_cast<index_t>(below(rng, n));
        if (s == d || !seen.insert({s, d}).second) {
            continue;
        }
        g.edges.push_back({s, d, static_cast<double>(1 + below(rng, max_w))});
    }
    return g;
}

// ---------------------------------------------------------------------------
// Oracles

template <class V>
std::vector<std::vector<V>> to_dense(const pimla::CsrMatrix<V>& m, V zero) {
    std::vector<std::vector<V>> d(m.num_rows, std::vector<V>(m.num_cols, zero));
    for (index_t r = 0; r < m.num_rows; ++r) {
        for (index_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            d[r][m.col_indices[k]] = m.values[k];
        }
    }
    return d;
}

/// Dense triple loop: y[i] = plus over j of A[i][j] times x[j], j ascending, stored entries only.
template <pimla::Semiring S>
std::vector<typename S::value_type> dense_matvec(const pimla::CsrMatrix<typename S::value_type>& m,
                                                 const std::vector<typename S::value_type>& x) {
    using V = typename S::value_type;
    std::vector<V> y(m.num_rows, S::zero());
    std::vector<std::vector<bool>> stored(m.num_rows, std::vector<bool>(m.num_cols, false));
    const auto d = to_dense(m, S::zero());
    for (index_t r = 0; r < m.num_rows; ++r) {
        for (index_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            stored[r][m.col_indices[k]] = true;
        }
    }
    for (index_t i = 0; i < m.num_rows; ++i) {
        for (index_t j = 0; j < m.num_cols; ++j) {
            if (stored[i][j]) {
                y[i] = S::plus(y[i], S::times(d[i][j], x[j]));
            }
        }
    }
    return y;
}

inline std::vector<std::uint32_t> queue_bfs(const pimla::EdgeList& g, index_t s) {
    std::vector<std::vector<index_t>> adj(g.num_nodes);
    for (const auto& e : g.edges) {
        adj[e.src].push_back(e.dst);
    }
    std::vector<std::uint32_t> level(g.num_nodes, pimla::kUnreached);
    std::queue<index_t> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (const auto v : adj[u]) {
            if (level[v] == pimla::kUnreached) {
                level[v] = level[u] + 1;
                q.push(v);
            }
        }
    }
    return level;
}

inline std::vector<double> dijkstra(const pimla::EdgeList& g, index_t s) {
    const double inf = pimla::TropicalSemiring::zero();
    std::vector<std::vector<std::pair<index_t, double>>> adj(g.num_nodes);
    for (const auto& e : g.edges) {
        adj[e.src].push_back({e.dst, e.weight});
    }
    std::vector<double> dist(g.num_nodes, inf);
    using Item = std::pair<double, index_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) {
            continue;
        }
        for (const auto& [v, w] : adj[u]) {
            if (d + w < dist[v]) {
                dist[v] = d + w;
                pq.push({dist[v], v});
            }
        }
    }
    return dist;
}

/// Power iteration on dense vectors: v' = d P v + (1 - d) e_s + d (dangling mass) e_s, stop when L1 change < eps.
inline std::vector<double> dense_ppr(const pimla::EdgeList& g, index_t s, double damping, double eps,
                                     std::size_t max_iter = 1000) {
    const index_t n = g.num_nodes;
    std::vector<std::size_t> outdeg(n, 0);
    for (const auto& e : g.edges) {
        ++outdeg[e.src];
    }
    std::vector<double> v(n, 0.0);
    v[s] = 1.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        double dangling = 0;
        for (index_t u = 0; u < n; ++u) {
            if (outdeg[u] == 0) {
                dangling += v[u];
            }
        }
        std::vector<double> next(n, 0.0);
        for (const auto& e : g.edges) {
            next[e.dst] += v[e.src] / static_cast<double>(outdeg[e.src]);
        }
        for (auto& x : next) {
            x *= damping;
        }
        next[s] += (1 - damping) + damping * dangling;
        double l1 = 0;
        for (index_t i = 0; i < n; ++i) {
            l1 += std::abs(next[i] - v[i]);
        }
        v = std::move(next);
        if (l1 < eps) {
            break;
        }
    }
    return v;
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return s;
}

/// The 4-arc fixture {0->1, 0->2, 1->2, 2->0}.
inline pimla::EdgeList four_arc() {
    pimla::EdgeList g;
    g.num_nodes = 3;
    g.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}};
    return g;
}

} // namespace testing_support
