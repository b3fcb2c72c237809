#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace arbor {

// ---------------------------------------------------------------------------
// Stable hashing.
//
// FNV-1a (64 bit). Used by the mock backend so that its behaviour is a pure
// function of its inputs and identical across platforms and standard library
// implementations (std::hash makes no such promise).
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 14695981039346656037ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Small string helpers.
// ---------------------------------------------------------------------------

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string_view trim_view(std::string_view s) {
    const char* ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

// Splits into lines on '\n' (tolerating trailing '\r').
inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto nl = s.find('\n', start);
        std::string_view line =
            nl == std::string_view::npos ? s.substr(start) : s.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic bounded-concurrency map.
//
// Runs fn(0..n-1) with at most max_in_flight tasks at once. The *dispatch*
// order is a seed-controlled permutation of the indices, but results are
// stored by original index, so the returned vector (and any error surfaced)
// is independent of scheduling. If several tasks throw, the exception of the
// lowest original index wins, again for determinism.
// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> parallel_map(std::size_t n, int max_in_flight, std::uint64_t schedule_seed,
                            const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (schedule_seed != 0) {
        std::mt19937_64 rng(schedule_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }

    int workers = std::max(1, max_in_flight);
    if (static_cast<std::size_t>(workers) > n) workers = static_cast<int>(n);

    if (workers <= 1) {
        for (std::size_t idx : order) {
            try {
                slots[idx].emplace(fn(idx));
            } catch (...) {
                errors[idx] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t pos = next.fetch_add(1);
                if (pos >= order.size()) return;
                std::size_t idx = order[pos];
                try {
                    slots[idx].emplace(fn(idx));
                } catch (...) {
                    errors[idx] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < n; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);

    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace arbor
