#ifndef AGGROSIM_CHEMO_HPP
#define AGGROSIM_CHEMO_HPP

#include <memory>
#include <string>
#include <vector>

#include "aggrosim/convolution.hpp"
#include "aggrosim/grid.hpp"
#include "aggrosim/kernels.hpp"

namespace aggrosim {

struct EllipticSolveReport {
    int iterations = 0;
    double residual = 0.0;  // relative discrete-L2 residual
    double achieved_tolerance = 0.0;
};

/** Chemoattractant rule: free-space convolution c = K * u, or the
 * variable-coefficient elliptic problem -div(a grad c) + gamma c = u with
 * homogeneous Dirichlet data on the box emulating decay at infinity.
 *
 * Elliptic models require inf a > 0, gamma >= 0, and in d = 2 strictly
 * positive gamma (the variable-coefficient local theory hypothesis). */
class ChemoModel {
  public:
    static ChemoModel convolution(const Kernel& k);
    static ChemoModel elliptic(ScalarField a, ScalarField gamma);

    bool is_convolution() const { return convolution_; }
    const Kernel& kernel() const;
    const ScalarField& a() const { return a_; }
    const ScalarField& gamma() const { return gamma_; }
    double inf_a() const { return inf_a_; }
    double inf_gamma() const { return inf_gamma_; }

  private:
    ChemoModel() = default;
    bool convolution_ = true;
    std::shared_ptr<Kernel> kernel_;
    ScalarField a_, gamma_;
    double inf_a_ = 0.0, inf_gamma_ = 0.0;
};

/** Grid-bound chemoattractant solver; caches the convolution table/plans or
 * the elliptic workspace. One instance per run (not shared across threads). */
class ChemoSolver {
  public:
    ChemoSolver(const ChemoModel& model, const GridSpec& grid, double elliptic_tol = 1e-10);

    ScalarField potential(const ScalarField& u, EllipticSolveReport* report = nullptr) const;
    const ChemoModel& model() const { return model_; }

  private:
    ChemoModel model_;
    GridSpec grid_;
    double tol_;
    std::unique_ptr<FreeSpaceConvolver> conv_;
};

/** One-shot free-space convolution c = K * u of cell averages. */
ScalarField convolve_potential(const Kernel& kernel, const ScalarField& u);

/** Face-centered second-order gradient; wall faces carry 0 (zero-flux
 * staggering shared with the integrator, making divergence adjoint). */
VectorField grad_potential(const ScalarField& c);

/** Cell-centered gradient components by central differences (diagnostics). */
std::vector<ScalarField> cell_gradient(const ScalarField& c);

ScalarField apply_elliptic_operator(const ChemoModel& model, const ScalarField& c);

std::pair<ScalarField, EllipticSolveReport> solve_elliptic(const ChemoModel& model,
                                                           const ScalarField& f, double tol);

struct VerifyTrial {
    std::string check;
    int seed = 0;
    double lhs = 0.0, rhs = 0.0;
    bool ok = true;
};

struct VerifyReport {
    std::vector<VerifyTrial> trials;
    double worst_ratio = 0.0;
    bool all_ok = true;
};

/** Randomized check of the elliptic L^p estimates: with inf gamma > 0 asserts
 * ||c||_p <= ||f||_p / inf gamma (2% discretization allowance); with
 * gamma == 0 (d = 3 only) records ||c||_p / ||f||_q for 2/d + 1/p = 1/q and
 * asserts boundedness only. */
VerifyReport verify_lp_estimate(const ChemoModel& model, const GridSpec& grid, int trials, double p,
                                std::uint64_t seed_base = 0);

/** Randomized check of ||grad c||_2 <= ||F||_2 / inf a for f = div F (1%
 * allowance). */
VerifyReport verify_h1_stability(const ChemoModel& model, const GridSpec& grid, int trials,
                                 std::uint64_t seed_base = 0);

/** Random smooth nonnegative trial field: 1-5 Gaussian bumps, centers uniform
 * in the half-box, widths in [L/16, L/4], amplitudes in [0.5, 2]. */
ScalarField random_bump_field(const GridSpec& grid, std::uint64_t seed, bool signed_amplitudes = false);

/** Coefficient-field grammar: "const:<v>" or "expr:gauss(<amp>,<width>)+<base>"
 * meaning amp * exp(-|x|^2 / width^2) + base. */
ScalarField parse_coefficient_spec(const std::string& spec, const GridSpec& grid);

}  // namespace aggrosim

#endif
