#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thermint {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Closed interval [lo, hi] on the line.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
    bool covers(const Interval& o, double tol = 0.0) const {
        return lo <= o.lo + tol && hi >= o.hi - tol;
    }
    bool approx_eq(const Interval& o, double tol) const {
        return std::abs(lo - o.lo) <= tol && std::abs(hi - o.hi) <= tol;
    }
    double clamp(double x) const { return std::min(hi, std::max(lo, x)); }
};

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    double lo = std::max(a.lo, b.lo);
    double hi = std::min(a.hi, b.hi);
    if (!(lo < hi)) return std::nullopt;
    return Interval{lo, hi};
}

inline Interval ordered(double a, double b) { return a <= b ? Interval{a, b} : Interval{b, a}; }

/// Solve g(x) = target on [lo, hi] for monotone g by bisection.  The target is
/// clamped into [g(lo), g(hi)] so image-boundary round-off cannot derail the
/// bracket.
inline double invert_monotone(const std::function<double(double)>& g, double target,
                              double lo, double hi, double tol = 1e-14) {
    double glo = g(lo), ghi = g(hi);
    const bool increasing = glo <= ghi;
    double ylo = std::min(glo, ghi), yhi = std::max(glo, ghi);
    if (target <= ylo) return increasing ? lo : hi;
    if (target >= yhi) return increasing ? hi : lo;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double m = 0.5 * (lo + hi);
        double gm = g(m);
        bool left = increasing ? (target < gm) : (target > gm);
        if (left)
            hi = m;
        else
            lo = m;
    }
    return 0.5 * (lo + hi);
}

/// One Aitken delta-squared pass.  Degenerate second differences fall back to
/// the raw entry so exactly-converged (e.g. affine) sequences survive.
inline std::vector<double> aitken(std::span<const double> s) {
    if (s.size() < 3) return {s.begin(), s.end()};
    std::vector<double> out;
    out.reserve(s.size() - 2);
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        double d1 = s[i + 1] - s[i];
        double d2 = s[i + 2] - s[i + 1];
        double denom = d2 - d1;
        if (std::abs(denom) < 1e-14 * (std::abs(d1) + std::abs(d2)) || denom == 0.0)
            out.push_back(s[i + 2]);
        else
            out.push_back(s[i + 2] - d2 * d2 / denom);
    }
    return out;
}

struct SeqLimit {
    double value = kNaN;
    double error = kInf;
    bool converged = false;
};

/// Limit of a geometrically-converging sequence via a cascade of Aitken
/// transforms.  The error is the spread of the deepest tails, so it stays an
/// honest upper estimate rather than an optimistic one.
inline SeqLimit sequence_limit(std::span<const double> s, double tol = 1e-10) {
    SeqLimit out;
    if (s.empty()) return out;
    if (s.size() == 1) {
        out.value = s[0];
        return out;
    }
    std::vector<double> cur(s.begin(), s.end());
    double value = cur.back();
    double err = std::abs(cur[cur.size() - 1] - cur[cur.size() - 2]);
    for (int level = 0; level < 3 && cur.size() >= 3; ++level) {
        std::vector<double> nxt = aitken(cur);
        if (nxt.size() < 2) break;
        double lerr = std::abs(nxt[nxt.size() - 1] - nxt[nxt.size() - 2]);
        double cross = std::abs(nxt.back() - value);
        value = nxt.back();
        err = std::max(lerr, 0.25 * cross);
        cur = std::move(nxt);
    }
    out.value = value;
    out.error = err;
    out.converged = err <= tol;
    return out;
}

inline double log_sum_exp(std::span<const double> v) {
    double m = -kInf;
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// Run body(i) for i in [0, n).  Work items are independent and write to
/// per-index slots, so results do not depend on the thread count.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t k = threads > 0 ? static_cast<std::size_t>(threads) : (hw > 0 ? hw : 1);
    k = std::min(k, n);
    if (k <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (std::size_t w = 0; w < k; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace thermint
