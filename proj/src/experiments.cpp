#include "aggrosim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

namespace aggrosim {

int sweep_thread_cap() {
    const char* env = std::getenv("AGGROSIM_THREADS");
    int cap = env ? std::atoi(env) : 0;
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, cap);
}

RunResult run_with_mass(const RunConfig& base, double mass, std::optional<int> override_cells,
                        const std::vector<double>& exact_times, const std::vector<Observer>& observers) {
    RunConfig cfg = base;
    if (override_cells) cfg.grid.cells_per_axis = *override_cells;
    if (cfg.init.empty()) throw std::invalid_argument("run_with_mass: config has no initial bump");
    cfg.init[0].mass = mass;
    ScalarField u0 = make_initial(cfg);
    return run(u0, make_chemo(cfg), make_diffusion(cfg), cfg.stepper, cfg.t_end, cfg.observe_every,
               exact_times, observers);
}

CriticalMassSweepResult critical_mass_sweep(const std::vector<double>& masses, const RunConfig& base) {
    CriticalMassSweepResult res;
    res.rows.resize(masses.size());

    // sweep entries execute concurrently with private state, assembled in
    // input order
    const int cap = std::min<int>(sweep_thread_cap(), static_cast<int>(masses.size()));
    std::vector<std::thread> pool;
    std::vector<std::size_t> next(1, 0);
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next[0] >= masses.size()) return;
                i = next[0]++;
            }
            SweepRow row;
            row.mass = masses[i];
            RunResult r = run_with_mass(base, masses[i]);
            row.blowup = r.outcome == RunOutcome::Blowup;
            row.t_detect = r.t_detect;
            for (const auto& rec : r.series) row.max_linf = std::max(row.max_linf, rec.linf);
            if (row.blowup) {
                // blow-up vs under-resolution: confirm at doubled resolution
                RunResult r2 = run_with_mass(base, masses[i], base.grid.cells_per_axis * 2);
                row.confirmed = r2.outcome == RunOutcome::Blowup;
            }
            res.rows[i] = row;
        }
    };
    for (int t = 0; t < cap; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    bool seen_blowup = false;
    for (const auto& row : res.rows) {
        if (row.blowup) {
            seen_blowup = true;
            if (!row.confirmed) res.inconclusive = true;
        } else if (seen_blowup) {
            res.monotone = false;  // Global after Blowup: resolution artifact
        }
    }
    if (!res.monotone) res.inconclusive = true;
    res.bracket_lo = 0.0;
    res.bracket_hi = std::numeric_limits<double>::infinity();
    for (const auto& row : res.rows) {
        if (!row.blowup) res.bracket_lo = std::max(res.bracket_lo, row.mass);
        else res.bracket_hi = std::min(res.bracket_hi, row.mass);
    }
    return res;
}

DecayRateResult decay_rate(const RunConfig& base, double window_lo, double window_hi) {
    DecayRateResult res;
    res.window_lo = window_lo;
    res.window_hi = window_hi;
    RunConfig cfg = base;
    cfg.t_end = std::max(cfg.t_end, window_hi);
    ScalarField u0 = make_initial(cfg);
    RunResult r = run(u0, make_chemo(cfg), make_diffusion(cfg), cfg.stepper, cfg.t_end,
                      cfg.observe_every);
    if (r.outcome == RunOutcome::Blowup) {
        res.blowup = true;
        return res;
    }
    std::vector<double> lx, ly;
    for (const auto& rec : r.series) {
        res.t.push_back(rec.t);
        res.linf.push_back(rec.linf);
        if (rec.t >= window_lo && rec.t <= window_hi && rec.linf > 0) {
            lx.push_back(std::log1p(rec.t));
            ly.push_back(std::log(rec.linf));
        }
    }
    if (lx.size() < 4) throw std::runtime_error("decay_rate: too few frames in the fit window");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    res.exponent = num / den;
    return res;
}

std::vector<VirialCheckRow> virial_check(const RunConfig& base, const std::vector<double>& masses,
                                         double window) {
    std::vector<VirialCheckRow> rows;
    for (double mass : masses) {
        RunConfig cfg = base;
        cfg.t_end = window;
        cfg.init[0].mass = mass;
        ScalarField u0 = make_initial(cfg);
        Kernel kernel = make_kernel(cfg);
        DiffusionModel diff = make_diffusion(cfg);
        VirialCheckRow row;
        row.mass = mass;
        row.predicted = virial_rate(u0, kernel, diff).predicted;
        RunResult r = run(u0, make_chemo(cfg), diff, cfg.stepper, cfg.t_end, cfg.observe_every);
        if (r.outcome == RunOutcome::Blowup)
            throw std::runtime_error("virial_check: unexpected blow-up in measurement window");
        const auto& first = r.series.front();
        const auto& last = r.series.back();
        row.measured = (last.m2 - first.m2) / (last.t - first.t);
        row.rel_error = std::fabs(row.measured - row.predicted) / std::fabs(row.predicted);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SmallDataRow> smalldata_probe(const RunConfig& base,
                                          const std::vector<double>& amplitudes) {
    std::vector<SmallDataRow> rows;
    for (double amp : amplitudes) {
        SmallDataRow row;
        row.amplitude = amp;
        RunResult r = run_with_mass(base, amp);
        double linf0 = r.series.front().linf;
        for (const auto& rec : r.series) row.max_linf_ratio = std::max(row.max_linf_ratio, rec.linf / linf0);
        row.bounded = r.outcome == RunOutcome::Completed && row.max_linf_ratio < 10.0;
        rows.push_back(row);
    }
    return rows;
}

SelfSimReport selfsim_boundedness(const RunConfig& base, double tau_lo, double tau_hi, int frames) {
    SelfSimReport rep;
    const int d = base.grid.dim;
    std::vector<double> times;
    for (int i = 0; i < frames; ++i) {
        double tau = tau_lo + (tau_hi - tau_lo) * i / (frames - 1);
        rep.tau.push_back(tau);
        times.push_back((std::exp(d * tau) - 1.0) / d);
    }
    RunConfig cfg = base;
    cfg.t_end = times.back();
    ScalarField u0 = make_initial(cfg);
    Kernel kernel = make_kernel(cfg);
    DiffusionModel diff = make_diffusion(cfg);
    EntropyDensity ent(diff);

    std::vector<std::pair<double, ScalarField>> frames_u;
    Observer grab = [&](const SimState& st, const DiagnosticsRecord&) {
        for (double t : times)
            if (std::fabs(st.t - t) <= 1e-9 * std::max(1.0, t)) {
                frames_u.emplace_back(st.t, st.u);
                break;
            }
    };
    RunResult r = run(u0, make_chemo(cfg), diff, cfg.stepper, cfg.t_end, cfg.observe_every, times,
                      {grab});
    if (r.outcome == RunOutcome::Blowup)
        throw std::runtime_error("selfsim_boundedness: unexpected blow-up");

    double lmin = 0, lmax = 0;
    bool first = true;
    for (const auto& [t, u] : frames_u) {
        SelfSimilarFrame fr = self_similar_transform(u, t);
        double li = max_abs(fr.theta);
        rep.theta_linf.push_back(li);
        rep.theta_tail.push_back(tail_norm(fr.theta, 10.0, 1.0));
        rep.g_values.push_back(modified_free_energy(fr.theta, ent, kernel));
        if (first) {
            lmin = lmax = li;
            first = false;
        } else {
            lmin = std::min(lmin, li);
            lmax = std::max(lmax, li);
        }
    }
    // monotonicity of G within the energy tolerance used for F
    for (std::size_t i = 1; i < rep.g_values.size(); ++i) {
        double dtau = rep.tau[i] - rep.tau[i - 1];
        double tol = 1e-3 * (1.0 + std::fabs(rep.g_values[0])) * dtau;
        if (rep.g_values[i] > rep.g_values[i - 1] + tol) rep.g_monotone = false;
    }
    rep.linf_variation = lmax > 0 ? (lmax - lmin) / lmax : 0.0;
    rep.bounded = true;
    for (double v : rep.theta_linf) rep.bounded = rep.bounded && std::isfinite(v);
    return rep;
}

}  // namespace aggrosim
