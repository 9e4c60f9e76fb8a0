#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thermint/expr.hpp"
#include "thermint/numerics.hpp"

namespace thermint {

enum class MapKind { smooth, cusp };

struct CriticalPoint {
    double location = 0.0;
    double order = 2.0;  // |f(x) - f(c)| ~ |x - c|^order near c
};

struct Branch {
    Interval domain;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> inverse;  // empty -> bisection fallback
    bool increasing = true;
};

/// A piecewise-monotone self-map of [0,1].  Branch domains are ordered left
/// to right with disjoint interiors; evaluation at a shared endpoint resolves
/// to the left branch.  Immutable after construction.
class IntervalMap {
public:
    IntervalMap(std::string name, MapKind kind, std::vector<Branch> branches,
                std::vector<CriticalPoint> critical, double param = kNaN)
        : name_(std::move(name)),
          kind_(kind),
          branches_(std::move(branches)),
          critical_(std::move(critical)),
          param_(param) {
        if (branches_.empty()) throw std::invalid_argument("map needs at least one branch");
        double prev = 0.0;
        for (const auto& b : branches_) {
            if (b.domain.lo < prev - 1e-12 || b.domain.length() <= 0.0)
                throw std::invalid_argument("branch domains must be ordered and nondegenerate");
            prev = b.domain.hi;
        }
        if (branches_.front().domain.lo > 1e-12 || branches_.back().domain.hi < 1.0 - 1e-12)
            throw std::invalid_argument("branch domains must cover [0,1]");
        check_monotone_sampled();
    }

    const std::string& name() const { return name_; }
    MapKind kind() const { return kind_; }
    double param() const { return param_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<CriticalPoint>& critical_set() const { return critical_; }
    int branch_count() const { return static_cast<int>(branches_.size()); }

    /// Branch owning x; the left branch wins at a shared endpoint.
    int branch_index_of(double x) const {
        if (x < -1e-12 || x > 1.0 + 1e-12) throw std::domain_error("point outside [0,1]");
        for (int b = 0; b < branch_count(); ++b)
            if (x <= branches_[b].domain.hi + 1e-15) return b;
        return branch_count() - 1;
    }

    double eval(double x) const { return eval_on_branch(branch_index_of(x), x); }

    /// Evaluate the branch piece; x is clamped into the branch closure so a
    /// cylinder orbit cannot fall off by round-off.
    double eval_on_branch(int b, double x) const {
        const Branch& br = branches_[b];
        double y = br.f(br.domain.clamp(x));
        if (y < 0.0) {
            if (y < -1e-9) throw std::domain_error("branch value escapes [0,1]");
            y = 0.0;
        } else if (y > 1.0) {
            if (y > 1.0 + 1e-9) throw std::domain_error("branch value escapes [0,1]");
            y = 1.0;
        }
        return y;
    }

    double deriv_on_branch(int b, double x) const {
        const Branch& br = branches_[b];
        return br.df(br.domain.clamp(x));
    }

    /// log|Df(x)|: -inf where the derivative vanishes (critical points of
    /// smooth maps), +inf at singular cusp endpoints.
    double log_deriv(double x) const {
        double d = std::abs(deriv_on_branch(branch_index_of(x), x));
        if (d == 0.0) return -kInf;
        if (std::isinf(d)) return kInf;
        return std::log(d);
    }

    /// Preimage of y under branch b.  y is clamped into the branch image.
    double invert_on_branch(int b, double y) const {
        const Branch& br = branches_[b];
        if (br.inverse) {
            double x = br.inverse(y);
            return br.domain.clamp(x);
        }
        auto g = [&](double x) { return eval_on_branch(b, x); };
        return invert_monotone(g, y, br.domain.lo, br.domain.hi);
    }

    Interval branch_image(int b) const {
        const Branch& br = branches_[b];
        return ordered(eval_on_branch(b, br.domain.lo), eval_on_branch(b, br.domain.hi));
    }

    /// Every branch maps onto [0,1]?
    bool full_branch_markov(double tol = 1e-9) const {
        for (int b = 0; b < branch_count(); ++b) {
            Interval img = branch_image(b);
            if (img.lo > tol || img.hi < 1.0 - tol) return false;
        }
        return true;
    }

    std::optional<double> h_top() const { return h_top_; }
    std::optional<double> closed_form_pressure(double t) const {
        if (!pressure_) return std::nullopt;
        return pressure_(t);
    }
    void set_facts(double h_top, std::function<double(double)> pressure) {
        h_top_ = h_top;
        pressure_ = std::move(pressure);
    }

private:
    void check_monotone_sampled() const {
        for (int b = 0; b < branch_count(); ++b) {
            const Branch& br = branches_[b];
            const int m = 64;
            double prev = eval_on_branch(b, br.domain.lo);
            int sign = 0;
            for (int i = 1; i <= m; ++i) {
                double x = br.domain.lo + br.domain.length() * i / m;
                double y = eval_on_branch(b, x);
                if (y != prev) {
                    int s = y > prev ? 1 : -1;
                    if (sign == 0)
                        sign = s;
                    else if (s != sign)
                        throw std::invalid_argument("branch is not monotone (sampled)");
                }
                prev = y;
            }
            if (sign != 0 && (sign > 0) != br.increasing)
                throw std::invalid_argument("branch orientation flag disagrees with samples");
        }
    }

    std::string name_;
    MapKind kind_;
    std::vector<Branch> branches_;
    std::vector<CriticalPoint> critical_;
    double param_;
    std::optional<double> h_top_;
    std::function<double(double)> pressure_;
};

// ----------------------------------------------------------------------------
// Built-in families
// ----------------------------------------------------------------------------

inline IntervalMap tent_map() {
    std::vector<Branch> br(2);
    br[0] = {Interval{0.0, 0.5}, [](double x) { return 2.0 * x; },
             [](double) { return 2.0; }, [](double y) { return 0.5 * y; }, true};
    br[1] = {Interval{0.5, 1.0}, [](double x) { return 2.0 * (1.0 - x); },
             [](double) { return -2.0; }, [](double y) { return 1.0 - 0.5 * y; }, false};
    IntervalMap m("tent", MapKind::cusp, std::move(br), {});
    m.set_facts(std::log(2.0), [](double t) { return (1.0 - t) * std::log(2.0); });
    return m;
}

inline IntervalMap doubling_map() {
    std::vector<Branch> br(2);
    br[0] = {Interval{0.0, 0.5}, [](double x) { return 2.0 * x; },
             [](double) { return 2.0; }, [](double y) { return 0.5 * y; }, true};
    br[1] = {Interval{0.5, 1.0}, [](double x) { return 2.0 * x - 1.0; },
             [](double) { return 2.0; }, [](double y) { return 0.5 * (y + 1.0); }, true};
    IntervalMap m("doubling", MapKind::cusp, std::move(br), {});
    m.set_facts(std::log(2.0), [](double t) { return (1.0 - t) * std::log(2.0); });
    return m;
}

inline IntervalMap chebyshev_map() {
    std::vector<Branch> br(2);
    auto f = [](double x) { return 4.0 * x * (1.0 - x); };
    auto df = [](double x) { return 4.0 - 8.0 * x; };
    br[0] = {Interval{0.0, 0.5}, f, df,
             [](double y) { return 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - y))); }, true};
    br[1] = {Interval{0.5, 1.0}, f, df,
             [](double y) { return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - y))); }, false};
    IntervalMap m("chebyshev", MapKind::smooth, std::move(br), {{0.5, 2.0}});
    m.set_facts(std::log(2.0), [](double t) {
        return t >= -1.0 ? (1.0 - t) * std::log(2.0) : -t * std::log(4.0);
    });
    return m;
}

inline IntervalMap quadratic_map(double gamma) {
    if (!(gamma > 0.0 && gamma <= 4.0))
        throw std::invalid_argument("quadratic parameter must lie in (0,4]");
    std::vector<Branch> br(2);
    auto f = [gamma](double x) { return gamma * x * (1.0 - x); };
    auto df = [gamma](double x) { return gamma * (1.0 - 2.0 * x); };
    auto inv_lo = [gamma](double y) {
        return 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - 4.0 * y / gamma)));
    };
    auto inv_hi = [gamma](double y) {
        return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 4.0 * y / gamma)));
    };
    br[0] = {Interval{0.0, 0.5}, f, df, inv_lo, true};
    br[1] = {Interval{0.5, 1.0}, f, df, inv_hi, false};
    return IntervalMap("quadratic", MapKind::smooth, std::move(br), {{0.5, 2.0}}, gamma);
}

/// Two increasing full branches with a one-sided derivative 0 at the central
/// discontinuity (left limit 1, right limit 0): a contracting Lorenz-like
/// cusp map.
inline IntervalMap lorenz_cusp_map(double alpha = 1.5) {
    if (!(alpha > 1.0)) throw std::invalid_argument("cusp exponent must exceed 1");
    std::vector<Branch> br(2);
    br[0] = {Interval{0.0, 0.5},
             [alpha](double x) { return 1.0 - std::pow(std::max(0.0, 1.0 - 2.0 * x), alpha); },
             [alpha](double x) {
                 return 2.0 * alpha * std::pow(std::max(0.0, 1.0 - 2.0 * x), alpha - 1.0);
             },
             [alpha](double y) {
                 return 0.5 * (1.0 - std::pow(std::max(0.0, 1.0 - y), 1.0 / alpha));
             },
             true};
    br[1] = {Interval{0.5, 1.0},
             [alpha](double x) { return std::pow(std::max(0.0, 2.0 * x - 1.0), alpha); },
             [alpha](double x) {
                 return 2.0 * alpha * std::pow(std::max(0.0, 2.0 * x - 1.0), alpha - 1.0);
             },
             [alpha](double y) { return 0.5 * (1.0 + std::pow(std::max(0.0, y), 1.0 / alpha)); },
             true};
    return IntervalMap("lorenz-cusp", MapKind::cusp, std::move(br), {{0.5, alpha}}, alpha);
}

struct MapPiece {
    Interval domain;
    std::string expression;
};

/// Build a map from piecewise closed-form expressions; derivatives come from
/// the symbolic derivative of the same grammar, inverses from bisection.
inline IntervalMap map_from_pieces(const std::string& name, MapKind kind,
                                   const std::vector<MapPiece>& pieces,
                                   std::vector<CriticalPoint> critical) {
    std::vector<Branch> br;
    br.reserve(pieces.size());
    for (const auto& p : pieces) {
        expr::Expr e = expr::parse(p.expression);
        expr::Expr de = expr::derivative(e);
        Branch b;
        b.domain = p.domain;
        b.f = [e](double x) { return expr::eval(e, x); };
        b.df = [de](double x) { return expr::eval(de, x); };
        b.increasing = expr::eval(e, p.domain.hi - 1e-9 * p.domain.length()) >=
                       expr::eval(e, p.domain.lo + 1e-9 * p.domain.length());
        br.push_back(std::move(b));
    }
    return IntervalMap(name, kind, std::move(br), std::move(critical));
}

inline IntervalMap builtin_map(const std::string& name, double param = kNaN) {
    if (name == "tent") return tent_map();
    if (name == "doubling") return doubling_map();
    if (name == "chebyshev") return chebyshev_map();
    if (name == "quadratic") return quadratic_map(std::isnan(param) ? 3.9 : param);
    if (name == "lorenz" || name == "lorenz-cusp")
        return lorenz_cusp_map(std::isnan(param) ? 1.5 : param);
    throw std::invalid_argument("unknown built-in map '" + name + "'");
}

// ----------------------------------------------------------------------------
// Admissibility report
// ----------------------------------------------------------------------------

struct ConditionFinding {
    bool pass = false;
    std::string detail;
};

struct ClassFReport {
    bool eligible = false;  // smooth kind with at least one critical point
    ConditionFinding nonflat_orders;       // a
    ConditionFinding schwarzian_convexity; // b
    ConditionFinding transitivity;         // c (heuristic only)
    ConditionFinding critical_orbits;      // d (falsifiable, never provable, at finite depth)
    bool in_class = false;
    std::string summary;
};

/// Finite-depth admissibility check for the smooth multimodal class: non-flat
/// critical orders, sampled convexity of 1/sqrt|Df|, a dense-orbit heuristic
/// for transitivity, and critical-orbit collision search up to `depth`.
inline ClassFReport check_class_F(const IntervalMap& m, int depth) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    ClassFReport rep;
    rep.eligible = m.kind() == MapKind::smooth && !m.critical_set().empty();
    if (!rep.eligible) {
        rep.summary = "not in class: no smooth critical point with order > 1; classified cusp-class";
        rep.nonflat_orders = {false, "no critical point with order > 1"};
        rep.schwarzian_convexity = {false, "not applicable"};
        rep.transitivity = {false, "not applicable"};
        rep.critical_orbits = {false, "not applicable"};
        return rep;
    }

    {  // a) non-flat orders, estimated from the local scaling exponent
        bool ok = true;
        std::ostringstream os;
        for (const auto& c : m.critical_set()) {
            if (!(c.order > 1.0) || std::isinf(c.order)) {
                ok = false;
                os << "order at " << c.location << " outside (1,inf); ";
                continue;
            }
            double fc = m.eval(c.location);
            double d1 = 1e-4, d2 = 1e-6;
            double side = c.location + d1 <= 1.0 ? 1.0 : -1.0;
            double v1 = std::abs(m.eval(c.location + side * d1) - fc);
            double v2 = std::abs(m.eval(c.location + side * d2) - fc);
            double est = (std::log(v1) - std::log(v2)) / (std::log(d1) - std::log(d2));
            if (std::abs(est - c.order) > 0.05 * c.order) {
                ok = false;
                os << "estimated order " << est << " at " << c.location << " vs declared "
                   << c.order << "; ";
            }
        }
        rep.nonflat_orders = {ok, ok ? "orders non-flat" : os.str()};
    }

    {  // b) midpoint convexity of 1/sqrt|Df| on a uniform grid per branch
        bool ok = true;
        std::ostringstream os;
        const double tol = 1e-9;
        for (int b = 0; b < m.branch_count() && ok; ++b) {
            const auto dom = m.branches()[b].domain;
            const int grid = 257;
            std::vector<double> g(grid, kNaN);
            for (int i = 0; i < grid; ++i) {
                double x = dom.lo + dom.length() * i / (grid - 1);
                double d = std::abs(m.deriv_on_branch(b, x));
                if (d > 1e-12) g[i] = 1.0 / std::sqrt(d);
            }
            for (int i = 0; i + 2 < grid; ++i) {
                if (std::isnan(g[i]) || std::isnan(g[i + 1]) || std::isnan(g[i + 2])) continue;
                if (g[i + 1] > 0.5 * (g[i] + g[i + 2]) + tol) {
                    ok = false;
                    os << "midpoint convexity fails on branch " << b << " near x="
                       << dom.lo + dom.length() * (i + 1) / (grid - 1);
                    break;
                }
            }
        }
        rep.schwarzian_convexity = {ok, ok ? "1/sqrt|Df| midpoint-convex (sampled)" : os.str()};
    }

    {  // c) dense-orbit coverage heuristic
        const int bins = 128, iters = 20000;
        std::vector<char> hit(bins, 0);
        for (double seed : {0.1234567891, 0.7654321987}) {
            double x = seed;
            for (int i = 0; i < iters; ++i) {
                x = m.eval(x);
                int k = std::min(bins - 1, static_cast<int>(x * bins));
                hit[k] = 1;
            }
        }
        int covered = 0;
        for (char h : hit) covered += h;
        bool ok = covered >= static_cast<int>(0.98 * bins);
        std::ostringstream os;
        os << "heuristic: sampled orbits cover " << covered << "/" << bins << " bins";
        rep.transitivity = {ok, os.str()};
    }

    {  // d) pairwise collisions among forward critical orbits
        bool ok = true;
        std::ostringstream os;
        std::vector<std::vector<double>> orbits;
        for (const auto& c : m.critical_set()) {
            std::vector<double> orb(depth + 1);
            orb[0] = c.location;
            for (int n = 1; n <= depth; ++n) orb[n] = m.eval(orb[n - 1]);
            orbits.push_back(std::move(orb));
        }
        const double tol = 1e-9;
        for (std::size_t i = 0; i < orbits.size() && ok; ++i)
            for (std::size_t j = 0; j < orbits.size() && ok; ++j)
                for (int n = 1; n <= depth && ok; ++n)
                    for (int mm = 1; mm <= depth && ok; ++mm) {
                        if (i == j && n == mm) continue;
                        if (n == mm) continue;  // condition concerns distinct iterates
                        if (std::abs(orbits[i][n] - orbits[j][mm]) <= tol) {
                            ok = false;
                            os << "collision f^" << n << "(c" << i << ") = f^" << mm << "(c" << j
                               << ") = " << orbits[i][n];
                        }
                    }
        rep.critical_orbits = {ok, ok ? "no collision found up to depth " + std::to_string(depth)
                                      : os.str()};
    }

    rep.in_class = rep.nonflat_orders.pass && rep.schwarzian_convexity.pass &&
                   rep.critical_orbits.pass;
    rep.summary = rep.in_class ? "conditions a)-b) pass, d) no collision found (c heuristic)"
                               : "fails at least one finite-depth condition";
    return rep;
}

}  // namespace thermint
