#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermint/numerics.hpp"

namespace thermint {

/// Finite (or truncated countable) Markov shift: symbol set {0..n-1} with a
/// transition predicate.  Countable alphabets are handled by their callers as
/// ladders of truncations of this type.
struct ShiftSpace {
    int n = 0;
    std::function<bool(int, int)> allowed;
    bool full = false;
    bool mixing = true;  // asserted by the caller

    static ShiftSpace full_shift(int n) {
        ShiftSpace s;
        s.n = n;
        s.allowed = [](int, int) { return true; };
        s.full = true;
        return s;
    }

    static ShiftSpace from_matrix(std::vector<std::vector<int>> t) {
        int n = static_cast<int>(t.size());
        for (const auto& row : t)
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("transition matrix must be square");
        for (int i = 0; i < n; ++i) {
            bool row = false, col = false;
            for (int j = 0; j < n; ++j) {
                row |= t[i][j] != 0;
                col |= t[j][i] != 0;
            }
            if (!row || !col)
                throw std::invalid_argument("transition matrix has an empty row or column");
        }
        ShiftSpace s;
        s.n = n;
        auto tm = std::make_shared<std::vector<std::vector<int>>>(std::move(t));
        s.allowed = [tm](int i, int j) { return (*tm)[i][j] != 0; };
        s.full = false;
        return s;
    }

    /// Sub-shift on the first `keep` symbols.
    ShiftSpace restrict(int keep) const {
        if (keep < 1 || keep > n) throw std::invalid_argument("bad truncation size");
        ShiftSpace s = *this;
        s.n = keep;
        return s;
    }
};

/// Potential evaluated on cylinders: `value` returns a representative value
/// for the cylinder named by a finite word, `radius` a bound on the
/// oscillation over that cylinder.  `depth` is how many leading symbols the
/// evaluator consumes.
struct ShiftPotential {
    std::function<double(std::span<const int>)> value;
    std::function<double(std::span<const int>)> radius = [](std::span<const int>) { return 0.0; };
    int depth = 1;
    bool locally_constant = true;
    std::vector<double> variations;  // variations[k] = V_{k+1}
    bool summable = true;
    bool weak_holder = true;
    double holder_decay = 0.0;  // V_{n+1} <= holder_decay * V_n beyond the declared list

    double variation_bound(int n) const {  // V_n
        if (n < 1) return kInf;
        if (n <= static_cast<int>(variations.size())) return variations[n - 1];
        if (variations.empty()) return 0.0;
        double v = variations.back();
        for (int k = static_cast<int>(variations.size()); k < n && v > 0.0; ++k) v *= holder_decay;
        return v;
    }

    double variation_sum_from(int n0) const {  // sum_{k >= n0} V_k
        double s = 0.0;
        for (int k = std::max(1, n0); k <= static_cast<int>(variations.size()); ++k)
            s += variations[k - 1];
        if (!variations.empty() && holder_decay > 0.0 && holder_decay < 1.0) {
            double v = variations.back();
            if (n0 > static_cast<int>(variations.size())) {
                // start the geometric tail at n0 instead
                s = 0.0;
                v = variation_bound(n0);
                s += v / (1.0 - holder_decay);
                return s;
            }
            s += v * holder_decay / (1.0 - holder_decay);
        }
        return s;
    }

    static ShiftPotential constant(double c) {
        ShiftPotential p;
        p.value = [c](std::span<const int>) { return c; };
        p.depth = 1;
        return p;
    }

    static ShiftPotential depth1(std::vector<double> vals) {
        ShiftPotential p;
        auto v = std::make_shared<std::vector<double>>(std::move(vals));
        p.value = [v](std::span<const int> w) { return (*v)[w[0]]; };
        p.depth = 1;
        return p;
    }

    static ShiftPotential depth2(std::vector<std::vector<double>> vals) {
        ShiftPotential p;
        auto v = std::make_shared<std::vector<std::vector<double>>>(std::move(vals));
        int n = static_cast<int>(v->size());
        p.value = [v](std::span<const int> w) {
            if (w.size() >= 2) return (*v)[w[0]][w[1]];
            double lo = kInf, hi = -kInf;
            for (double x : (*v)[w[0]]) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            return 0.5 * (lo + hi);
        };
        p.radius = [v](std::span<const int> w) {
            if (w.size() >= 2) return 0.0;
            double lo = kInf, hi = -kInf;
            for (double x : (*v)[w[0]]) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            return 0.5 * (hi - lo);
        };
        p.depth = 2;
        double v1 = 0.0;
        for (int i = 0; i < n; ++i) {
            double lo = kInf, hi = -kInf;
            for (double x : (*v)[i]) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            v1 = std::max(v1, hi - lo);
        }
        p.variations = {v1};
        return p;
    }
};

struct PressureEstimate {
    double value = kNaN;
    double error = kInf;
    bool converged = false;
    std::vector<double> raw;     // (1/n) log Z_n
    std::vector<double> ratios;  // log Z_{n+1} - log Z_n
    int n_used = 0;
    std::string note;
};

// ----------------------------------------------------------------------------
// Partition sums
// ----------------------------------------------------------------------------

namespace detail {

inline double word_birkhoff(const ShiftPotential& pot, std::span<const int> w) {
    // S_n(phi) over the periodic word w: evaluate on each rotation, feeding the
    // evaluator enough symbols of the periodic extension.
    const int n = static_cast<int>(w.size());
    const int need = std::max(pot.depth, 1);
    std::vector<int> ext;
    ext.reserve(n + need);
    while (static_cast<int>(ext.size()) < n + need)
        for (int i = 0; i < n && static_cast<int>(ext.size()) < n + need; ++i) ext.push_back(w[i]);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += pot.value(std::span<const int>(ext.data() + k, need));
    return s;
}

}  // namespace detail

/// Z_n over periodic words with first symbol `base` (exact enumeration).
inline double partition_sum(const ShiftSpace& shift, const ShiftPotential& pot, int n, int base) {
    if (n < 1) throw std::invalid_argument("partition sum needs n >= 1");
    if (base < 0 || base >= shift.n) throw std::invalid_argument("base symbol out of range");
    std::vector<int> w(n);
    w[0] = base;
    double total = 0.0;
    bool any = false;
    std::function<void(int)> rec = [&](int k) {
        if (k == n) {
            if (!shift.allowed(w[n - 1], w[0])) return;
            any = true;
            total += std::exp(detail::word_birkhoff(pot, w));
            return;
        }
        for (int s = 0; s < shift.n; ++s) {
            if (!shift.allowed(w[k - 1], s)) continue;
            w[k] = s;
            rec(k + 1);
        }
    };
    if (n == 1) {
        if (shift.allowed(base, base)) {
            any = true;
            total = std::exp(detail::word_birkhoff(pot, w));
        }
    } else {
        rec(1);
    }
    if (!any) throw std::runtime_error("empty partition sum: no admissible loop through base");
    return total;
}

// ----------------------------------------------------------------------------
// Tabled gram machinery
// ----------------------------------------------------------------------------

namespace detail {

struct GramSystem {
    int n = 0;      // alphabet
    int d = 1;      // word length the weights live on
    int order = 0;  // d - 1 = gram length
    std::vector<std::vector<int>> grams;       // admissible grams (empty word if order==0)
    std::vector<int> gram_index;               // dense lookup over n^order (or {0})
    std::vector<double> logw;                  // [gram][symbol] log-weight, -inf inadmissible
    std::vector<int> next_state;               // [gram][symbol] successor gram or -1
    double max_radius = 0.0;

    int states() const { return static_cast<int>(grams.size()); }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(x.size(), 0.0);
        const int N = n;
        for (int g = 0; g < states(); ++g) {
            double xg = x[g];
            if (xg == 0.0) continue;
            for (int s = 0; s < N; ++s) {
                double lw = logw[g * N + s];
                int t = next_state[g * N + s];
                if (t >= 0 && lw > -kInf) y[t] += xg * std::exp(lw);
            }
        }
    }
    void apply_transpose(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(x.size(), 0.0);
        const int N = n;
        for (int g = 0; g < states(); ++g) {
            double acc = 0.0;
            for (int s = 0; s < N; ++s) {
                double lw = logw[g * N + s];
                int t = next_state[g * N + s];
                if (t >= 0 && lw > -kInf) acc += std::exp(lw) * x[t];
            }
            y[g] = acc;
        }
    }
};

inline GramSystem build_gram_system(const ShiftSpace& shift, const ShiftPotential& pot, int d) {
    GramSystem gs;
    gs.n = shift.n;
    gs.d = d;
    gs.order = d - 1;
    const int N = shift.n;
    if (gs.order == 0) {
        gs.grams.push_back({});
        gs.gram_index = {0};
    } else {
        std::size_t count = 1;
        for (int k = 0; k < gs.order; ++k) count *= N;
        gs.gram_index.assign(count, -1);
        std::vector<int> g(gs.order);
        std::function<void(int, std::size_t)> rec = [&](int k, std::size_t idx) {
            if (k == gs.order) {
                gs.gram_index[idx] = static_cast<int>(gs.grams.size());
                gs.grams.push_back(g);
                return;
            }
            for (int s = 0; s < N; ++s) {
                if (k > 0 && !shift.allowed(g[k - 1], s)) continue;
                g[k] = s;
                rec(k + 1, idx * N + s);
            }
        };
        rec(0, 0);
    }
    gs.logw.assign(gs.grams.size() * N, -kInf);
    gs.next_state.assign(gs.grams.size() * N, -1);
    std::vector<int> word(d);
    for (int gi = 0; gi < gs.states(); ++gi) {
        const auto& g = gs.grams[gi];
        for (int s = 0; s < N; ++s) {
            if (gs.order > 0 && !shift.allowed(g.back(), s)) continue;
            for (int k = 0; k < gs.order; ++k) word[k] = g[k];
            word[gs.order] = s;
            std::span<const int> ws(word.data(), d);
            gs.logw[gi * N + s] = pot.value(ws);
            gs.max_radius = std::max(gs.max_radius, pot.radius(ws));
            if (gs.order == 0) {
                gs.next_state[gi * N + s] = 0;
            } else {
                std::size_t idx = 0;
                for (int k = 1; k < gs.order; ++k) idx = idx * N + g[k];
                idx = idx * N + s;
                gs.next_state[gi * N + s] = gs.gram_index[idx];
            }
        }
    }
    return gs;
}

/// log Z_n for n = 1..n_max, cyclic periodic sums with first symbol = base,
/// computed from the gram transfer structure (exact for tabled potentials).
inline std::vector<double> cyclic_log_sums(const ShiftSpace& shift, const ShiftPotential& pot,
                                           int d, int base, int n_max) {
    const int N = shift.n;
    std::vector<double> logZ(n_max + 1, -kInf);
    if (d <= 2) {
        // states are symbols; step weight attaches to the source (d==1) or edge (d==2)
        std::vector<double> lw(N * N, -kInf);
        std::vector<int> word(2);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                if (!shift.allowed(i, j)) continue;
                word[0] = i;
                word[1] = j;
                lw[i * N + j] = pot.value(std::span<const int>(word.data(), d == 1 ? 1 : 2));
            }
        std::vector<double> v(N, 0.0), nv(N);
        v[base] = 1.0;
        double scale = 0.0;
        for (int step = 1; step <= n_max; ++step) {
            for (int j = 0; j < N; ++j) nv[j] = 0.0;
            for (int i = 0; i < N; ++i) {
                if (v[i] == 0.0) continue;
                for (int j = 0; j < N; ++j)
                    if (lw[i * N + j] > -kInf) nv[j] += v[i] * std::exp(lw[i * N + j]);
            }
            double norm = 0.0;
            for (double x : nv) norm += x;
            if (norm == 0.0) break;
            for (int j = 0; j < N; ++j) nv[j] /= norm;
            scale += std::log(norm);
            v = nv;
            if (v[base] > 0.0) logZ[step] = scale + std::log(v[base]);
        }
        return logZ;
    }
    // d == 3: states are admissible pairs; one vector per start pair (base, j)
    GramSystem gs = build_gram_system(shift, pot, 3);
    std::vector<std::vector<double>> vs;
    std::vector<int> starts;
    for (int gi = 0; gi < gs.states(); ++gi)
        if (gs.grams[gi][0] == base) starts.push_back(gi);
    // the length-1 loop is handled directly
    if (shift.allowed(base, base)) {
        std::vector<int> ext{base, base, base};
        logZ[1] = pot.value(std::span<const int>(ext.data(), 3));
    }
    std::vector<double> scales(starts.size(), 0.0);
    vs.assign(starts.size(), std::vector<double>(gs.states(), 0.0));
    for (std::size_t si = 0; si < starts.size(); ++si) vs[si][starts[si]] = 1.0;
    std::vector<double> tmp;
    for (int step = 1; step <= n_max; ++step) {
        std::vector<double> acc;
        double best = -kInf;
        std::vector<double> terms;
        for (std::size_t si = 0; si < starts.size(); ++si) {
            gs.apply(vs[si], tmp);
            double norm = 0.0;
            for (double x : tmp) norm += x;
            if (norm == 0.0) {
                vs[si].assign(gs.states(), 0.0);
                continue;
            }
            for (double& x : tmp) x /= norm;
            scales[si] += std::log(norm);
            vs[si] = tmp;
            if (step >= 2 && vs[si][starts[si]] > 0.0)
                terms.push_back(scales[si] + std::log(vs[si][starts[si]]));
        }
        if (step >= 2 && !terms.empty())
            logZ[step] = log_sum_exp(std::span<const double>(terms.data(), terms.size()));
    }
    return logZ;
}

}  // namespace detail

/// Gurevich pressure via the ratio sequence log(Z_{n+1}/Z_n) with Aitken
/// acceleration; the raw (1/n) log Z_n sequence rides along for diagnostics.
inline PressureEstimate gurevich_pressure(const ShiftSpace& shift, const ShiftPotential& pot,
                                          int n_max = 128, int base = 0) {
    if (shift.n < 1) throw std::invalid_argument("empty alphabet");
    int d = std::min(pot.depth, 3);
    if (d == 3 && shift.n > 24) d = 2;  // pair-state cost cap; radius covers the rest
    PressureEstimate est;
    std::vector<double> logZ = detail::cyclic_log_sums(shift, pot, d, base, n_max);
    bool any = false;
    for (int n = 1; n <= n_max; ++n) {
        if (logZ[n] > -kInf) any = true;
        if (logZ[n] > -kInf) est.raw.push_back(logZ[n] / n);
    }
    if (!any) throw std::runtime_error("empty partition sums: no admissible loop through base");
    for (int n = 1; n < n_max; ++n)
        if (logZ[n] > -kInf && logZ[n + 1] > -kInf) est.ratios.push_back(logZ[n + 1] - logZ[n]);
    if (est.ratios.size() < 2) {
        est.value = est.raw.empty() ? kNaN : est.raw.back();
        est.note = "too few admissible loops for the ratio estimator";
        return est;
    }
    std::size_t drop = std::min<std::size_t>(est.ratios.size() / 2, 4);
    std::span<const double> tail(est.ratios.data() + drop, est.ratios.size() - drop);
    SeqLimit lim = sequence_limit(tail, 1e-11);
    double pot_err = 0.0;
    if (!pot.locally_constant || pot.depth > d) {
        detail::GramSystem gs = detail::build_gram_system(shift, pot, d);
        pot_err = gs.max_radius + pot.variation_sum_from(d + 1);
    }
    est.value = lim.value;
    est.error = lim.error + pot_err;
    est.converged = lim.converged;
    est.n_used = n_max;
    if (!lim.converged) est.note = "ratio sequence not converged within n_max; error bar widened";
    return est;
}

struct Spectral {
    double rho = kNaN;
    std::vector<double> right, left;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

template <class Apply>
inline void power_one_side(std::size_t nstates, const Apply& apply, std::vector<double>& v,
                           double& rho, int& iters, bool& converged, double tol, int max_iter) {
    v.assign(nstates, 1.0 / static_cast<double>(nstates));
    std::vector<double> w(nstates);
    double prev = -1.0;
    int stable = 0;
    for (iters = 0; iters < max_iter; ++iters) {
        apply(v, w);
        double norm = 0.0;
        for (double x : w) norm += std::abs(x);
        if (norm == 0.0) throw std::runtime_error("transfer matrix annihilated the test vector");
        for (std::size_t i = 0; i < nstates; ++i) w[i] /= norm;
        v.swap(w);
        rho = norm;
        if (prev > 0.0 && std::abs(rho - prev) <= tol * rho) {
            if (++stable >= 3) {
                converged = true;
                ++iters;
                break;
            }
        } else {
            stable = 0;
        }
        prev = rho;
    }
}

template <class Apply, class ApplyT>
inline Spectral power_spectral(std::size_t nstates, const Apply& apply, const ApplyT& applyT,
                               double tol = 1e-13, int max_iter = 100000) {
    Spectral sp;
    int it1 = 0, it2 = 0;
    bool c1 = false, c2 = false;
    double rho1 = kNaN, rho2 = kNaN;
    power_one_side(nstates, apply, sp.right, rho1, it1, c1, tol, max_iter);
    power_one_side(nstates, applyT, sp.left, rho2, it2, c2, tol, max_iter);
    sp.rho = rho1;
    sp.iterations = it1 + it2;
    sp.converged = c1 && c2;
    return sp;
}

inline void check_irreducible(const detail::GramSystem& gs) {
    const int S = gs.states();
    const int N = gs.n;
    auto reach = [&](bool forward) {
        std::vector<char> seen(S, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int g = stack.back();
            stack.pop_back();
            for (int u = 0; u < S; ++u) {
                if (seen[u]) continue;
                bool edge = false;
                if (forward) {
                    for (int s = 0; s < N && !edge; ++s)
                        edge = gs.next_state[g * N + s] == u && gs.logw[g * N + s] > -kInf;
                } else {
                    for (int s = 0; s < N && !edge; ++s)
                        edge = gs.next_state[u * N + s] == g && gs.logw[u * N + s] > -kInf;
                }
                if (edge) {
                    seen[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        return seen;
    };
    auto fwd = reach(true), bwd = reach(false);
    for (int g = 0; g < S; ++g)
        if (!fwd[g] || !bwd[g])
            throw std::runtime_error("reducible transition structure in transfer matrix");
}

}  // namespace detail

/// log of the Perron root of the exp(phi)-weighted transition matrix on
/// (depth-1)-grams, by power iteration.  The independent oracle for the
/// Gurevich estimator on finite shifts.
inline double transfer_matrix_pressure(const ShiftSpace& shift, const ShiftPotential& pot) {
    if (!pot.locally_constant)
        throw std::invalid_argument("transfer-matrix pressure needs a locally constant potential");
    detail::GramSystem gs = detail::build_gram_system(shift, pot, std::max(1, pot.depth));
    detail::check_irreducible(gs);
    Spectral sp = detail::power_spectral(
        gs.states(), [&](const std::vector<double>& x, std::vector<double>& y) { gs.apply(x, y); },
        [&](const std::vector<double>& x, std::vector<double>& y) { gs.apply_transpose(x, y); },
        1e-13, 200000);
    if (!sp.converged) throw std::runtime_error("power iteration failed to converge");
    return std::log(sp.rho);
}

// ----------------------------------------------------------------------------
// Gibbs measures on full shifts
// ----------------------------------------------------------------------------

/// Shift-invariant Markov measure realizing the Gibbs property for a
/// zero-pressure potential on a full shift.
class GibbsMeasure {
public:
    int n_symbols = 0;
    int order = 0;  // Markov memory; 0 = Bernoulli
    double pressure = 0.0;
    double distortion_C = 1.0;
    std::string c_source;

    std::vector<double> stationary;  // per state (n^order grams)
    std::vector<double> trans;       // [state*n + s] transition probabilities
    std::vector<int> next_state;     // [state*n + s]

    double mass(std::span<const int> word) const {
        if (word.empty()) return 1.0;
        for (int s : word)
            if (s < 0 || s >= n_symbols) throw std::invalid_argument("symbol out of range");
        if (static_cast<int>(word.size()) <= order) {
            // marginal over all states extending the word
            double total = 0.0;
            for (std::size_t g = 0; g < stationary.size(); ++g) {
                std::size_t idx = g;
                bool match = true;
                // state index encodes the gram most-significant-first
                std::size_t div = 1;
                for (int k = 1; k < order; ++k) div *= n_symbols;
                std::size_t rem = idx;
                for (std::size_t k = 0; k < word.size(); ++k) {
                    int sym = static_cast<int>(rem / div);
                    if (sym != word[k]) {
                        match = false;
                        break;
                    }
                    rem %= div;
                    div /= n_symbols;
                }
                if (match) total += stationary[g];
            }
            return total;
        }
        std::size_t state = 0;
        for (int k = 0; k < order; ++k) state = state * n_symbols + word[k];
        double p = stationary[state];
        for (std::size_t k = order; k < word.size(); ++k) {
            p *= trans[state * n_symbols + word[k]];
            state = static_cast<std::size_t>(next_state[state * n_symbols + word[k]]);
        }
        return p;
    }

    std::vector<double> symbol_masses() const {
        std::vector<double> out(n_symbols, 0.0);
        std::vector<int> w(1);
        for (int s = 0; s < n_symbols; ++s) {
            w[0] = s;
            out[s] = mass(std::span<const int>(w.data(), 1));
        }
        return out;
    }
};

/// Gibbs measure for a summable-variations potential with P^G = 0 on a full
/// shift, built from the gram transfer structure at the potential's depth.
inline GibbsMeasure gibbs_measure(const ShiftSpace& shift, const ShiftPotential& pot,
                                  double pressure_tol = 1e-6) {
    if (!shift.full) throw std::invalid_argument("Gibbs construction requires a full shift");
    const int N = shift.n;
    int d = std::min(std::max(pot.depth, 1), 4);
    detail::GramSystem gs = detail::build_gram_system(shift, pot, d);
    Spectral sp = detail::power_spectral(
        gs.states(), [&](const std::vector<double>& x, std::vector<double>& y) { gs.apply(x, y); },
        [&](const std::vector<double>& x, std::vector<double>& y) { gs.apply_transpose(x, y); });
    if (!sp.converged) throw std::runtime_error("power iteration failed to converge");
    double P = std::log(sp.rho);
    if (std::abs(P) > pressure_tol)
        throw std::invalid_argument("potential is not normalized to zero pressure (P = " +
                                    std::to_string(P) + ")");
    GibbsMeasure mu;
    mu.n_symbols = N;
    mu.order = gs.order;
    mu.pressure = P;

    const int S = gs.states();
    // dense state space (full shift): states = all n^order grams in index order
    mu.stationary.assign(S, 0.0);
    double z = 0.0;
    for (int g = 0; g < S; ++g) {
        mu.stationary[g] = sp.left[g] * sp.right[g];
        z += mu.stationary[g];
    }
    for (double& x : mu.stationary) x /= z;
    mu.trans.assign(static_cast<std::size_t>(S) * N, 0.0);
    mu.next_state.assign(static_cast<std::size_t>(S) * N, 0);
    for (int g = 0; g < S; ++g) {
        double row = 0.0;
        for (int s = 0; s < N; ++s) {
            int t = gs.next_state[g * N + s];
            double w = std::exp(gs.logw[g * N + s]) * sp.right[t];
            mu.trans[g * N + s] = w;
            mu.next_state[g * N + s] = t;
            row += w;
        }
        for (int s = 0; s < N; ++s) mu.trans[g * N + s] /= row;
    }

    // distortion constant: variation sum baseline, inflated by the certified
    // eigenvector/wrap bound for the gram construction
    double varsum = 0.0;
    for (int k = 1; k <= static_cast<int>(pot.variations.size()) + 2; ++k)
        varsum += pot.variation_bound(k);
    varsum += pot.variation_sum_from(static_cast<int>(pot.variations.size()) + 3);
    double c0 = std::exp(varsum);
    double lmax = 0.0, lmin = kInf, rmax = 0.0, rmin = kInf;
    for (int g = 0; g < S; ++g) {
        lmax = std::max(lmax, sp.left[g]);
        lmin = std::min(lmin, sp.left[g]);
        rmax = std::max(rmax, sp.right[g]);
        rmin = std::min(rmin, sp.right[g]);
    }
    double vmax = -kInf, vmin = kInf;
    for (double lw : gs.logw)
        if (lw > -kInf) {
            vmax = std::max(vmax, lw);
            vmin = std::min(vmin, lw);
        }
    double c_eig = 1.0;
    if (gs.order > 0) {
        double hi = (lmax * rmax / z) * std::exp(-gs.order * vmin);
        double lo = (lmin * rmin / z) * std::exp(-gs.order * vmax);
        c_eig = std::max(hi, lo > 0.0 ? 1.0 / lo : kInf);
    }
    double tail = pot.variation_sum_from(d + 1) + gs.max_radius;
    mu.distortion_C = std::max(c0, c_eig * std::exp(2.0 * tail)) * (1.0 + 1e-9);
    mu.c_source = gs.order == 0 ? "variation sum" : "variation sum + eigenvector range";
    return mu;
}

// ----------------------------------------------------------------------------
// Cylinder-mass decay
// ----------------------------------------------------------------------------

struct DecayViolation {
    std::vector<int> word;
    double mass;
    double bound;
};

struct DecayReport {
    double lambda = 0.0;            // rate from the distortion constant
    double lambda_empirical = 0.0;  // sharpest rate observed
    int depth = 0;
    bool holds = false;
    std::vector<DecayViolation> violations;
};

/// Check mass(C_n) <= exp(-lambda n) with lambda = -log(C sup_i mass(C_i)),
/// DFS with subtree pruning once masses fall below the deepest bound.
inline DecayReport cylinder_mass_decay_check(const GibbsMeasure& mu, int depth) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    DecayReport rep;
    rep.depth = depth;
    auto syms = mu.symbol_masses();
    double supmass = 0.0;
    for (double m : syms) supmass = std::max(supmass, m);
    rep.lambda = -std::log(mu.distortion_C * supmass);
    rep.lambda_empirical = kInf;
    const double floor_bound = std::exp(-rep.lambda * depth);
    std::vector<int> w;
    std::function<void(double)> rec = [&](double parent_mass) {
        if (!w.empty()) {
            double b = std::exp(-rep.lambda * static_cast<double>(w.size()));
            if (parent_mass > b * (1.0 + 1e-12))
                rep.violations.push_back({w, parent_mass, b});
            if (parent_mass > 0.0)
                rep.lambda_empirical =
                    std::min(rep.lambda_empirical, -std::log(parent_mass) / w.size());
            if (parent_mass <= floor_bound) return;  // all extensions inherit the bound
        }
        if (static_cast<int>(w.size()) == depth) return;
        for (int s = 0; s < mu.n_symbols; ++s) {
            w.push_back(s);
            rec(mu.mass(w));
            w.pop_back();
        }
    };
    rec(1.0);
    rep.holds = rep.violations.empty();
    return rep;
}

}  // namespace thermint
