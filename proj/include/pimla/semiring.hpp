#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace pimla {

/// Cost class of a semiring operation on the simulated core. The machine
/// configuration maps each class to an instruction count.
enum class OpClass : std::uint8_t { logic, int_add, compare_select, fp_add, fp_mul };

/**
 * A semiring (plus, times, zero, one) over a carrier `value_type`.
 *
 * `zero` is the identity of plus and the annihilator of times, `one` is the
 * identity of times. Kernels are written once against this concept.
 */
template <class S>
concept Semiring = requires(typename S::value_type a, typename S::value_type b) {
    typename S::value_type;
    { S::zero() } -> std::same_as<typename S::value_type>;
    { S::one() } -> std::same_as<typename S::value_type>;
    { S::plus(a, b) } -> std::same_as<typename S::value_type>;
    { S::times(a, b) } -> std::same_as<typename S::value_type>;
    { S::saturated(a) } -> std::same_as<bool>;
    { S::idempotent_plus } -> std::convertible_to<bool>;
    { S::supports_early_exit } -> std::convertible_to<bool>;
    { S::name } -> std::convertible_to<std::string_view>;
    { S::plus_class } -> std::convertible_to<OpClass>;
    { S::times_class } -> std::convertible_to<OpClass>;
};

/// ({0,1}, OR, AND): reachability for BFS.
struct BooleanSemiring {
    using value_type = std::uint8_t;
    static constexpr std::string_view name = "bfs";
    static constexpr bool idempotent_plus = true;
    static constexpr bool supports_early_exit = true;
    static constexpr OpClass plus_class = OpClass::logic;
    static constexpr OpClass times_class = OpClass::logic;

    static constexpr value_type zero() { return 0; }
    static constexpr value_type one() { return 1; }
    static constexpr value_type plus(value_type a, value_type b) { return (a | b) ? 1 : 0; }
    static constexpr value_type times(value_type a, value_type b) { return (a & b) ? 1 : 0; }
    // OR saturates at 1: no further term can change the accumulator.
    static constexpr bool saturated(value_type a) { return a == 1; }
};

/**
 * (R ∪ {+inf}, min, +): shortest paths.
 *
 * +inf is the carrier's largest finite value; times saturates to it so
 * kernels never branch on infinity.
 */
struct TropicalSemiring {
    using value_type = double;
    static constexpr std::string_view name = "sssp";
    static constexpr bool idempotent_plus = true;
    static constexpr bool supports_early_exit = false;
    static constexpr OpClass plus_class = OpClass::compare_select;
    static constexpr OpClass times_class = OpClass::int_add;

    static constexpr value_type zero() { return std::numeric_limits<double>::max(); }
    static constexpr value_type one() { return 0.0; }
    static constexpr value_type plus(value_type a, value_type b) { return b < a ? b : a; }
    static constexpr value_type times(value_type a, value_type b) {
        if (a == zero() || b == zero()) {
            return zero();
        }
        const double sum = a + b;
        return sum >= zero() ? zero() : sum;
    }
    static constexpr bool saturated(value_type) { return false; }
};

/// (R, +, *): personalized PageRank.
struct ArithmeticSemiring {
    using value_type = double;
    static constexpr std::string_view name = "ppr";
    static constexpr bool idempotent_plus = false;
    static constexpr bool supports_early_exit = false;
    static constexpr OpClass plus_class = OpClass::fp_add;
    static constexpr OpClass times_class = OpClass::fp_mul;

    static constexpr value_type zero() { return 0.0; }
    static constexpr value_type one() { return 1.0; }
    static constexpr value_type plus(value_type a, value_type b) { return a + b; }
    static constexpr value_type times(value_type a, value_type b) { return a * b; }
    static constexpr bool saturated(value_type) { return false; }
};

static_assert(Semiring<BooleanSemiring>);
static_assert(Semiring<TropicalSemiring>);
static_assert(Semiring<ArithmeticSemiring>);

constexpr BooleanSemiring bfs_semiring() { return {}; }
constexpr TropicalSemiring sssp_semiring() { return {}; }
constexpr ArithmeticSemiring ppr_semiring() { return {}; }

template <Semiring S>
struct FoldResult {
    typename S::value_type value;
    std::size_t plus_count;
};

/// Left fold under plus seeded with zero. With `early_exit` set and a semiring
/// that allows it, stops as soon as the accumulator saturates.
template <Semiring S>
FoldResult<S> fold(std::span<const typename S::value_type> values, bool early_exit = S::supports_early_exit) {
    auto acc = S::zero();
    std::size_t count = 0;
    for (const auto v : values) {
        acc = S::plus(acc, v);
        ++count;
        if (early_exit && S::supports_early_exit && S::saturated(acc)) {
            break;
        }
    }
    return {acc, count};
}

enum class SemiringKind { bfs, sssp, ppr };

/// Invokes `f` with a default-constructed semiring of the requested kind.
template <class F>
decltype(auto) with_semiring(SemiringKind kind, F&& f) {
    switch (kind) {
    case SemiringKind::bfs:
        return f(BooleanSemiring{});
    case SemiringKind::sssp:
        return f(TropicalSemiring{});
    case SemiringKind::ppr:
        break;
    }
    return f(ArithmeticSemiring{});
}

} // namespace pimla
