#include "reslat/quantize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <map>

namespace reslat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
const Complex kI(0.0, 1.0);

// exponent-sum term (1/(2 pi i)) sum (k_j + 1/2) M_j and its derivative
std::pair<Complex, Complex> exponent_sum(const std::vector<Complex>& m,
                                         const std::vector<Complex>& dm,
                                         const std::vector<int>& k) {
    Complex s(0.0, 0.0), ds(0.0, 0.0);
    for (size_t j = 0; j < m.size(); ++j) {
        const double kj = k[j] + 0.5;
        s += kj * m[j];
        ds += kj * dm[j];
    }
    const Complex fac = 1.0 / (kTwoPi * kI);
    return {fac * s, fac * ds};
}

}  // namespace

std::pair<Complex, Complex> bs_residual(const ActionModel& model, Complex e, long m,
                                        const std::vector<int>& k, double h) {
    if (static_cast<int>(k.size()) != model.dof_count())
        throw ConfigError("bs_residual: k length does not match the exponent count");
    const ActionEval ev = eval_action(model, e);
    const auto [es, des] = exponent_sum(ev.m, ev.dm, k);
    const Complex f  = ev.s0 / (kTwoPi * h) + ev.s1 - es - double(m);
    const Complex df = ev.ds0 / (kTwoPi * h) + ev.ds1 - des;
    return {f, df};
}

namespace {

// First-order seed: longitudinal part from inverting the S0 fit, transverse
// imaginary offset from the window-center exponents. in_window reports
// whether the longitudinal root lies inside the energy window (S0 is
// monotone there, so a target-range test is exact and avoids extrapolating
// the fit).
Complex resonance_seed(const ActionModel& model, long m, const std::vector<int>& k, double h,
                       bool* in_window = nullptr) {
    const Complex ec(model.center(), 0.0);
    const ActionEval evc = eval_action(model, ec);
    const auto [es, des] = exponent_sum(evc.m, evc.dm, k);
    (void)des;
    // real target: S0(E)/(2 pi h) = m - S1 + Re(exponent sum)
    const double target = double(m) - evc.s1.real() + es.real();
    if (in_window) {
        const double lo = model.s0(model.e_min) / (kTwoPi * h);
        const double hi = model.s0(model.e_max) / (kTwoPi * h);
        *in_window = target >= std::min(lo, hi) && target <= std::max(lo, hi);
    }
    double e = model.center();
    for (int it = 0; it < 60; ++it) {
        const double f  = model.s0(e) / (kTwoPi * h) - target;
        const double df = model.period(e) / (kTwoPi * h);
        if (std::abs(df) < 1e-300) break;
        double step = -f / df;
        e += step;
        e = std::clamp(e, model.e_min, model.e_max);
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(e))) break;
    }
    const double im = h * es.imag();
    return Complex(e, im);
}

}  // namespace

Resonance solve_resonance(const ActionModel& model, long m, const std::vector<int>& k,
                          const QuantizationInput& input) {
    input.validate();
    for (int kj : k)
        if (kj < 0) throw ConfigError("solve_resonance: k components must be non-negative");

    Complex e = resonance_seed(model, m, k, input.h);
    double fnorm = std::numeric_limits<double>::max();
    for (int it = 1; it <= input.max_iter; ++it) {
        std::pair<Complex, Complex> r;
        try {
            r = bs_residual(model, e, m, k, input.h);
        } catch (const ConfigError&) {
            throw NumericalError("solve_resonance: root escaped the validity region");
        }
        const auto [f, df] = r;
        fnorm = std::abs(f);
        if (fnorm <= input.newton_tol) {
            Resonance res;
            res.m        = m;
            res.k        = k;
            res.e        = e;
            res.residual = fnorm;
            res.iters    = it - 1;
            if (res.e.imag() > 1e-12)
                throw NumericalError("solve_resonance: root on the growth side (Im E > 0)");
            return res;
        }
        if (std::abs(df) < 1e-12)
            throw NumericalError("solve_resonance: degenerate Jacobian (|dF/dE| < 1e-12)");
        const double damp = it <= 2 ? 0.5 : 1.0;  // two damped pre-iterations
        e -= damp * f / df;
    }
    throw NumericalError("solve_resonance: Newton divergence after " +
                         std::to_string(input.max_iter) + " iterations (|F| = " +
                         std::to_string(fnorm) + ")");
}

namespace {

// all k vectors with 0 <= k_j <= k_max, lexicographic
std::vector<std::vector<int>> k_grid(int d, int k_max) {
    std::vector<std::vector<int>> out;
    std::vector<int> k(d, 0);
    for (;;) {
        out.push_back(k);
        int i = d - 1;
        while (i >= 0 && k[i] == k_max) { k[i] = 0; --i; }
        if (i < 0) break;
        ++k[i];
    }
    return out;
}

void sort_lattice(ResonanceLattice& lat) {
    std::sort(lat.resonances.begin(), lat.resonances.end(),
              [](const Resonance& a, const Resonance& b) {
                  if (a.e.real() != b.e.real()) return a.e.real() < b.e.real();
                  if (a.m != b.m) return a.m < b.m;
                  return a.k < b.k;
              });
}

}  // namespace

ResonanceLattice enumerate_lattice(const ActionModel& model, const QuantizationInput& input,
                                   int threads) {
    input.validate();
    ResonanceLattice lat;
    lat.input       = input;
    lat.system_name = model.system_name;
    lat.window_lo   = model.e_min;
    lat.window_hi   = model.e_max;
    if (!input.window_nonempty()) return lat;

    const long m_max = input.m_max();
    const int k_max  = input.k_max();
    const auto ks    = k_grid(model.dof_count(), k_max);

    struct Chunk {
        std::vector<Resonance> ok;
        std::vector<LatticeFailure> bad;
    };

    auto work_m = [&](long m) {
        Chunk ch;
        for (const auto& k : ks) {
            bool inside = false;
            resonance_seed(model, m, k, input.h, &inside);
            if (!inside) continue;
            try {
                ch.ok.push_back(solve_resonance(model, m, k, input));
            } catch (const std::exception& ex) {
                ch.bad.push_back({m, k, ex.what()});
            }
        }
        return ch;
    };

    std::vector<long> ms;
    for (long m = -m_max; m <= m_max; ++m) ms.push_back(m);

    std::vector<Chunk> chunks(ms.size());
    if (threads <= 1) {
        for (size_t i = 0; i < ms.size(); ++i) chunks[i] = work_m(ms[i]);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<size_t> next{0};
        const int nt = std::min<int>(threads, static_cast<int>(ms.size()));
        for (int t = 0; t < nt; ++t)
            futs.push_back(std::async(std::launch::async, [&]() {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= ms.size()) return;
                    chunks[i] = work_m(ms[i]);
                }
            }));
        for (auto& f : futs) f.get();
    }

    for (auto& ch : chunks) {
        lat.resonances.insert(lat.resonances.end(), ch.ok.begin(), ch.ok.end());
        lat.failures.insert(lat.failures.end(), ch.bad.begin(), ch.bad.end());
    }
    sort_lattice(lat);
    return lat;
}

std::vector<Complex> expand_model_exponents(const std::vector<Complex>& mu) {
    std::vector<Complex> dofs;
    for (const Complex& m : mu) {
        if (m.real() < -1e-14) throw ConfigError("model_oracle: need Re mu >= 0");
        dofs.push_back(m);
        if (m.real() > 1e-14 && std::abs(m.imag()) > 1e-14) dofs.push_back(std::conj(m));
    }
    // canonical order of the per-period exponents 2 pi mu: Re desc, Im desc
    std::sort(dofs.begin(), dofs.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return dofs;
}

ResonanceLattice model_oracle(const std::vector<Complex>& mu, const QuantizationInput& input,
                              double window_lo, double window_hi) {
    input.validate();
    ResonanceLattice lat;
    lat.input       = input;
    lat.system_name = "model_oracle";
    lat.window_lo   = window_lo;
    lat.window_hi   = window_hi;
    if (!input.window_nonempty()) return lat;

    const auto dofs  = expand_model_exponents(mu);
    const long m_max = input.m_max();
    const int k_max  = input.k_max();
    const auto ks    = k_grid(static_cast<int>(dofs.size()), k_max);

    for (long m = -m_max; m <= m_max; ++m) {
        for (const auto& k : ks) {
            Complex s(0.0, 0.0);
            for (size_t j = 0; j < dofs.size(); ++j) s += (k[j] + 0.5) * dofs[j];
            const Complex e = double(m) * input.h - kI * input.h * s;
            if (e.real() < window_lo || e.real() > window_hi) continue;
            Resonance r;
            r.m        = m;
            r.k        = k;
            r.e        = e;
            r.residual = 0.0;
            r.iters    = 0;
            lat.resonances.push_back(std::move(r));
        }
    }
    sort_lattice(lat);
    return lat;
}

ComparisonReport compare(const ResonanceLattice& lattice, const ResonanceLattice& oracle) {
    auto key_of = [](const Resonance& r) {
        std::string s = std::to_string(r.m);
        for (int kj : r.k) s += "," + std::to_string(kj);
        return s;
    };

    std::map<std::string, const Resonance*> a, b;
    for (const auto& r : lattice.resonances) a[key_of(r)] = &r;
    for (const auto& r : oracle.resonances) b[key_of(r)] = &r;

    if (a.size() != lattice.resonances.size() || b.size() != oracle.resonances.size())
        throw ConfigError("compare: duplicate (m, k) keys");
    if (a.size() != b.size())
        throw ConfigError("compare: index sets differ in size (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");

    ComparisonReport rep;
    rep.count = a.size();
    for (const auto& [key, ra] : a) {
        auto it = b.find(key);
        if (it == b.end())
            throw ConfigError("compare: index sets differ (unmatched key m,k = " + key + ")");
        const double dev = std::abs(ra->e - it->second->e);
        if (dev > rep.max_deviation) {
            rep.max_deviation = dev;
            rep.worst_m       = ra->m;
            rep.worst_k       = ra->k;
        }
    }
    return rep;
}

}  // namespace reslat
