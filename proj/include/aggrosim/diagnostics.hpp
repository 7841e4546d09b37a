#ifndef AGGROSIM_DIAGNOSTICS_HPP
#define AGGROSIM_DIAGNOSTICS_HPP

#include <optional>
#include <vector>

#include "aggrosim/chemo.hpp"
#include "aggrosim/diffusion.hpp"
#include "aggrosim/grid.hpp"
#include "aggrosim/kernels.hpp"

namespace aggrosim {

/** Per-frame scalar ledger. free_energy = entropy - interaction holds exactly
 * by construction. */
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double linf = 0.0;
    double l2 = 0.0;
    double lp_guard = 0.0;
    double m2 = 0.0;
    double entropy = 0.0;      // S = int Phi(u)
    double interaction = 0.0;  // W = (1/2) int u c
    double free_energy = 0.0;  // F = S - W
    double dissipation = 0.0;  // int (1/u) |A'(u) grad u - u grad c|^2
};

struct FreeEnergyParts {
    double entropy = 0.0, interaction = 0.0, total = 0.0;
};

/** S, W and F = S - W for a state (u, c); c must come from the active
 * chemoattractant rule. */
FreeEnergyParts free_energy(const ScalarField& u, const ScalarField& c, const EntropyDensity& entropy);

/** Generalized Fisher information; cells with u below the 1e-12 floor
 * contribute zero. */
double dissipation(const ScalarField& u, const ScalarField& c, const DiffusionModel& model);

struct VirialRate {
    double predicted = 0.0;         // 2d int A(u) + int int u u (x-y).grad K
    double diffusion_term = 0.0;
    double interaction_term = 0.0;
};

/** Second-moment rate from the displayed identity; the double integral is
 * assembled as one convolution with the radial profile r k'(r). */
VirialRate virial_rate(const ScalarField& u, const Kernel& kernel, const DiffusionModel& model);

struct EntropyBoundCheck {
    double lhs = 0.0;  // int u log u
    double rhs = 0.0;  // M log(eps^{d/2} M / pi^{d/2}) - eps M2(u)
    bool ok = true;
};

EntropyBoundCheck entropy_lower_bound_check(const ScalarField& u, double eps);

double boltzmann_entropy(const ScalarField& u);  // int u log u, 0 log 0 = 0

struct LogHlsReport {
    std::vector<double> scales;
    std::vector<double> q_values;  // Q(lambda)
    double max_q = 0.0;
    double variation = 0.0;  // relative spread of Q over scales <= 1
    bool scale_stable = true;
};

/** Probe of the logarithmic HLS combination
 * Q(lambda) = -int int f_l f_l log|x-y| - (||f||_1/d) int f_l log f_l,
 * f_l(x) = lambda^{-d} f(x/lambda). Exactly scale-invariant in the continuum. */
LogHlsReport log_hls_probe(const ScalarField& f, const std::vector<double>& scales);

/** Brute-force O(n^{2d}) evaluation of -int int f f log|x-y| for oracle use at
 * small n; the self-cell uses an independent local quadrature of log r. */
double log_interaction_brute_force(const ScalarField& f);

struct GnsReport {
    double alpha1 = 0.0, alpha2 = 0.0;
    std::vector<double> scales;
    std::vector<double> ratios;  // R(f(lambda .)) per scale
    double max_deviation = 0.0;  // relative to R(f)
    bool invariant_ok = true;
};

/** Gagliardo-Nirenberg ratio R(f) = ||f||_q / (||f||_p^{a2} ||grad f^k||_r^{a1})
 * with the exponent pair solved from the lemma's two linear relations;
 * asserts dilation invariance across scales (default {1/2, 1, 2}). */
GnsReport gns_probe(const ScalarField& f, double p, double q, double r, double k,
                    const std::vector<double>& scales = {0.5, 1.0, 2.0});

struct SelfSimilarFrame {
    ScalarField theta;
    double tau = 0.0;
};

/** Self-similar variables: tau = (1/d) log(1 + d t),
 * theta(eta) = e^{d tau} u(e^tau eta), resampled conservatively. */
SelfSimilarFrame self_similar_transform(const ScalarField& u, double t);

/** Inverse map u(x) = e^{-d tau} theta(e^{-tau} x) at the t matching tau. */
ScalarField inverse_self_similar_transform(const ScalarField& theta, double tau);

/** Confined free energy in self-similar variables:
 * d=2 (log kernel, linear diffusion): int theta log theta + (1/2) M2 - W;
 * d>=3 (Newtonian, PME 2-2/d): (1/(1-2/d)) int theta^{2-2/d} + (1/2) M2 - W. */
double modified_free_energy(const ScalarField& theta, const EntropyDensity& entropy,
                            const Kernel& kernel);

/** Assembles the full per-frame record. */
DiagnosticsRecord collect_diagnostics(double t, const ScalarField& u, const ScalarField& c,
                                      const EntropyDensity& entropy, const DiffusionModel& model,
                                      double guard_p);

}  // namespace aggrosim

#endif
