#ifndef AGGROSIM_EXPERIMENTS_HPP
#define AGGROSIM_EXPERIMENTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "aggrosim/config.hpp"
#include "aggrosim/integrator.hpp"

namespace aggrosim {

/** Runs the configured problem with the initial mass rescaled to `mass`
 * (single-bump configs; the first bump carries the mass). */
RunResult run_with_mass(const RunConfig& base, double mass,
                        std::optional<int> override_cells = std::nullopt,
                        const std::vector<double>& exact_times = {},
                        const std::vector<Observer>& observers = {});

struct SweepRow {
    double mass = 0.0;
    bool blowup = false;
    double t_detect = 0.0;   // detection time when blowup
    double max_linf = 0.0;
    bool confirmed = true;   // blow-up verdict agreed at 2x resolution
};

struct CriticalMassSweepResult {
    std::vector<SweepRow> rows;      // in input mass order
    bool monotone = true;            // Global ... Global Blowup ... Blowup
    bool inconclusive = false;
    double bracket_lo = 0.0;         // largest Global mass
    double bracket_hi = 0.0;         // smallest Blowup mass
};

/** Runs each mass to t_end or blow-up; every Blowup verdict is re-run once at
 * 2x resolution and must agree, otherwise the row (and the experiment) is
 * marked inconclusive. */
CriticalMassSweepResult critical_mass_sweep(const std::vector<double>& masses, const RunConfig& base);

struct DecayRateResult {
    double exponent = 0.0;       // slope of log ||u||_inf vs log(1+t) on the window
    double window_lo = 10.0, window_hi = 100.0;
    std::vector<double> t, linf;
    bool blowup = false;
};

DecayRateResult decay_rate(const RunConfig& base, double window_lo = 10.0, double window_hi = 100.0);

struct VirialCheckRow {
    double mass = 0.0;
    double predicted = 0.0;  // 2d int A(u) + interaction term at t = 0
    double measured = 0.0;   // (M2(T) - M2(0)) / T
    double rel_error = 0.0;
};

/** Compares the measured second-moment rate against the displayed identity
 * over a short window (while the sup-norm stays within the stated factor). */
std::vector<VirialCheckRow> virial_check(const RunConfig& base, const std::vector<double>& masses,
                                         double window);

struct SmallDataRow {
    double amplitude = 0.0;
    bool bounded = false;
    double max_linf_ratio = 0.0;  // max ||u||_inf / initial
};

std::vector<SmallDataRow> smalldata_probe(const RunConfig& base, const std::vector<double>& amplitudes);

struct SelfSimReport {
    std::vector<double> tau;
    std::vector<double> theta_linf;
    std::vector<double> theta_tail;  // tail_norm(theta, 10, 1)
    std::vector<double> g_values;    // modified free energy
    double linf_variation = 0.0;     // relative spread of theta_linf
    bool bounded = true;
    bool g_monotone = true;
};

/** Transforms observer frames to self-similar variables over tau in
 * [tau_lo, tau_hi] and audits boundedness and the decay of the modified free
 * energy. */
SelfSimReport selfsim_boundedness(const RunConfig& base, double tau_lo = 1.0, double tau_hi = 2.3,
                                  int frames = 14);

/** Worker-thread cap from AGGROSIM_THREADS (0/unset = hardware). */
int sweep_thread_cap();

}  // namespace aggrosim

#endif
