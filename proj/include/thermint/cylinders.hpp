#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermint/interval_map.hpp"
#include "thermint/numerics.hpp"

namespace thermint {

/// Dynamical cylinder: the set of x whose orbit follows `itinerary` through
/// the branch partition.  `image` is f^n(interval), tracked explicitly so
/// non-Markov maps refine correctly.
struct Cylinder {
    std::vector<int> itinerary;
    Interval interval;
    Interval image;
    bool increasing = true;  // orientation of f^n on the cylinder

    int depth() const { return static_cast<int>(itinerary.size()); }
};

struct Partition {
    int depth = 0;
    std::vector<Cylinder> cylinders;
};

inline constexpr double kCylinderFloor = 1e-13;  // cylinders shorter than this are not split

/// x with f^k(x) tracking path[k] and f^{|path|}(x) = y.
inline double orbit_pullback(const IntervalMap& m, std::span<const int> path, double y) {
    double cur = y;
    for (std::size_t k = path.size(); k-- > 0;) cur = m.invert_on_branch(path[k], cur);
    return cur;
}

inline Partition partition_root(const IntervalMap& m) {
    (void)m;
    Partition p;
    p.depth = 0;
    p.cylinders.push_back(Cylinder{{}, Interval{0.0, 1.0}, Interval{0.0, 1.0}, true});
    return p;
}

inline Partition branch_partition(const IntervalMap& m) {
    Partition p;
    p.depth = 1;
    for (int b = 0; b < m.branch_count(); ++b) {
        Cylinder c;
        c.itinerary = {b};
        c.interval = m.branches()[b].domain;
        c.image = m.branch_image(b);
        c.increasing = m.branches()[b].increasing;
        p.cylinders.push_back(std::move(c));
    }
    return p;
}

namespace detail {

/// Children of one cylinder under one more refinement step.
inline void refine_cylinder(const IntervalMap& m, const Cylinder& c, std::vector<Cylinder>& out) {
    if (c.interval.length() < kCylinderFloor) {
        out.push_back(c);  // resolution floor: carried forward unchanged
        return;
    }
    std::vector<Cylinder> kids;
    for (int b = 0; b < m.branch_count(); ++b) {
        auto ov = intersect(c.image, m.branches()[b].domain);
        if (!ov || ov->length() < 1e-15) continue;
        Cylinder k;
        k.itinerary = c.itinerary;
        k.itinerary.push_back(b);
        double xa = orbit_pullback(m, c.itinerary, ov->lo);
        double xb = orbit_pullback(m, c.itinerary, ov->hi);
        k.interval = ordered(xa, xb);
        // clamp into the parent to keep nesting exact
        k.interval.lo = std::max(k.interval.lo, c.interval.lo);
        k.interval.hi = std::min(k.interval.hi, c.interval.hi);
        if (!(k.interval.length() > 0.0)) continue;
        k.image = ordered(m.eval_on_branch(b, ov->lo), m.eval_on_branch(b, ov->hi));
        k.increasing = (c.increasing == m.branches()[b].increasing);
        kids.push_back(std::move(k));
    }
    std::sort(kids.begin(), kids.end(),
              [](const Cylinder& a, const Cylinder& b) { return a.interval.lo < b.interval.lo; });
    for (auto& k : kids) out.push_back(std::move(k));
}

}  // namespace detail

inline Partition refine(const IntervalMap& m, const Partition& p) {
    Partition out;
    out.depth = p.depth + 1;
    out.cylinders.reserve(p.cylinders.size() * m.branch_count());
    for (const auto& c : p.cylinders) detail::refine_cylinder(m, c, out.cylinders);
    for (std::size_t i = 0; i + 1 < out.cylinders.size(); ++i)
        if (out.cylinders[i].interval.lo > out.cylinders[i + 1].interval.lo + 1e-12)
            throw std::runtime_error("refinement produced out-of-order cylinders near x=" +
                                     std::to_string(out.cylinders[i].interval.lo));
    return out;
}

inline Partition refine_to_depth(const IntervalMap& m, int n) {
    if (n < 0) throw std::invalid_argument("depth must be >= 0");
    if (n == 0) return partition_root(m);
    Partition p = branch_partition(m);
    for (int k = 1; k < n; ++k) p = refine(m, p);
    return p;
}

/// Member of the partition containing x; boundary points resolve left.
inline const Cylinder& cylinder_containing(const Partition& p, double x) {
    if (p.cylinders.empty()) throw std::invalid_argument("empty partition");
    if (x < -1e-12 || x > 1.0 + 1e-12) throw std::domain_error("point outside [0,1]");
    // first cylinder whose right endpoint is >= x
    std::size_t lo = 0, hi = p.cylinders.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (p.cylinders[mid].interval.hi >= x)
            hi = mid;
        else
            lo = mid + 1;
    }
    return p.cylinders[lo];
}

struct PeriodicPoint {
    double x = 0.0;
    double log_multiplier = 0.0;  // log|Df^n(x)|
    std::vector<int> itinerary;
};

namespace detail {

inline double orbit_forward(const IntervalMap& m, std::span<const int> path, double x) {
    double cur = x;
    for (int b : path) cur = m.eval_on_branch(b, cur);
    return cur;
}

inline double orbit_log_slope(const IntervalMap& m, std::span<const int> path, double x) {
    double cur = x, acc = 0.0;
    for (int b : path) {
        acc += std::log(std::abs(m.deriv_on_branch(b, cur)));
        cur = m.eval_on_branch(b, cur);
    }
    return acc;
}

/// Fixed point of the composed inverse along `path`, i.e. the periodic point
/// with that itinerary, when pullback is everywhere admissible.
inline bool pullback_periodic(const IntervalMap& m, std::span<const int> path,
                              const Interval& cyl, double& out) {
    // pullback must stay inside branch images; verify once with the seed
    double y = cyl.mid();
    for (std::size_t k = path.size(); k-- > 0;) {
        Interval img = m.branch_image(path[k]);
        if (!img.contains(y, 1e-9)) return false;
        y = m.invert_on_branch(path[k], img.clamp(y));
    }
    double x = y;
    for (int it = 0; it < 200; ++it) {
        double nx = x;
        bool ok = true;
        for (std::size_t k = path.size(); k-- > 0;) {
            Interval img = m.branch_image(path[k]);
            if (!img.contains(nx, 1e-9)) {
                ok = false;
                break;
            }
            nx = m.invert_on_branch(path[k], img.clamp(nx));
        }
        if (!ok) return false;
        double step = std::abs(nx - x);
        x = nx;
        if (step < 1e-16 * (1.0 + std::abs(x))) break;
    }
    if (!cyl.contains(x, 1e-9)) return false;
    out = cyl.clamp(x);
    return true;
}

inline void newton_polish(const IntervalMap& m, std::span<const int> path, const Interval& cyl,
                          double& x) {
    for (int it = 0; it < 3; ++it) {
        double fx = orbit_forward(m, path, x) - x;
        if (std::abs(fx) < 1e-15) return;
        // chain-rule derivative of f^n - id
        double cur = x, d = 1.0;
        for (int b : path) {
            d *= m.deriv_on_branch(b, cur);
            cur = m.eval_on_branch(b, cur);
        }
        double denom = d - 1.0;
        if (denom == 0.0) return;
        double nx = x - fx / denom;
        if (!cyl.contains(nx, 0.0)) return;
        x = nx;
    }
}

}  // namespace detail

/// Fixed points of f^n, one bisection/pullback solve per n-cylinder, with
/// multipliers by the chain rule.  Cylinders whose branch restriction shows
/// more than one sign change raise an ambiguity error.
inline std::vector<PeriodicPoint> periodic_points(const IntervalMap& m, int n) {
    if (n < 1) throw std::invalid_argument("period must be >= 1");
    Partition p = refine_to_depth(m, n);
    std::vector<PeriodicPoint> pts;
    for (const auto& c : p.cylinders) {
        if (c.depth() != n) continue;  // resolution-floor remnants are skipped
        std::span<const int> w(c.itinerary);
        double root = kNaN;
        bool have = false;
        if (detail::pullback_periodic(m, w, c.interval, root)) {
            have = true;
        } else {
            auto g = [&](double x) { return detail::orbit_forward(m, w, x) - x; };
            const int scan = 8;
            double xs[scan + 1], gs[scan + 1];
            for (int i = 0; i <= scan; ++i) {
                xs[i] = c.interval.lo + c.interval.length() * i / scan;
                gs[i] = g(xs[i]);
            }
            int nseg = 0, seg = -1;
            for (int i = 0; i < scan; ++i)
                if (gs[i] * gs[i + 1] < 0.0) {
                    ++nseg;
                    seg = i;
                }
            int interior_zero = -1;
            for (int i = 1; i < scan; ++i)
                if (gs[i] == 0.0) interior_zero = i;
            if (nseg + (interior_zero >= 0 ? 1 : 0) > 1)
                throw std::runtime_error("ambiguous periodic solve: multiple roots in one cylinder");
            if (interior_zero >= 0) {
                root = xs[interior_zero];
                have = true;
            } else if (nseg == 1) {
                double lo = xs[seg], hi = xs[seg + 1], glo = gs[seg];
                for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double gm = g(mid);
                    if (gm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((gm < 0) == (glo < 0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                root = 0.5 * (lo + hi);
                have = true;
            } else if (std::abs(gs[0]) < 1e-13) {
                root = xs[0];
                have = true;
            } else if (std::abs(gs[scan]) < 1e-13) {
                root = xs[scan];
                have = true;
            }
        }
        if (!have) continue;
        detail::newton_polish(m, w, c.interval, root);
        double residual = std::abs(detail::orbit_forward(m, w, root) - root);
        if (residual > 1e-10) continue;  // spurious bracket artifact
        PeriodicPoint pp;
        pp.x = root;
        pp.log_multiplier = detail::orbit_log_slope(m, w, root);
        pp.itinerary = c.itinerary;
        pts.push_back(std::move(pp));
    }
    // shared-endpoint roots: keep the left cylinder's copy
    std::vector<PeriodicPoint> out;
    for (auto& pp : pts) {
        if (!out.empty() && std::abs(pp.x - out.back().x) <= 1e-11) continue;
        out.push_back(std::move(pp));
    }
    return out;
}

inline void write_partition_csv(const Partition& p, std::ostream& os) {
    os << "depth,itinerary,left,right\n";
    char buf[64];
    for (const auto& c : p.cylinders) {
        std::string itin;
        for (std::size_t i = 0; i < c.itinerary.size(); ++i) {
            if (i) itin += '.';
            itin += std::to_string(c.itinerary[i]);
        }
        std::snprintf(buf, sizeof(buf), "%.17g", c.interval.lo);
        std::string lo = buf;
        std::snprintf(buf, sizeof(buf), "%.17g", c.interval.hi);
        os << c.depth() << "," << itin << "," << lo << "," << buf << "\n";
    }
}

}  // namespace thermint
