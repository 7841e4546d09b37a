#ifndef AGGROSIM_INTEGRATOR_HPP
#define AGGROSIM_INTEGRATOR_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aggrosim/chemo.hpp"
#include "aggrosim/diagnostics.hpp"
#include "aggrosim/diffusion.hpp"
#include "aggrosim/grid.hpp"

namespace aggrosim {

struct StepperConfig {
    double cfl_advect = 0.4;         // advective CFL number in (0, 1]
    double diff_theta = 1.0;         // implicitness of the diffusion update, [1/2, 1]
    double dt_max = 0.05;
    double dt_min = 1e-9;
    double blowup_linf_factor = 100.0;
    double blowup_lp = 0.0;          // guard norm exponent; 0 = auto 2(2-m)/(2-m*)
    int picard_sweeps = 2;           // linearization sweeps on the face diffusivity
    double cg_tol = 1e-12;           // diffusion solve, relative residual
    double elliptic_tol = 1e-10;     // chemoattractant solve (elliptic variant)
    double boundary_mass_tol = 1e-6; // abort when this mass fraction reaches the outer 5% ring

    void validate() const;
};

struct SimState {
    double t = 0.0;
    ScalarField u;
    ScalarField c;   // last chemoattractant
    double dt = 0.0; // last accepted step
    long step_count = 0;
};

/** Raised when a blow-up monitor fires (sup-norm factor, guard-norm doubling
 * within a step, or advective dt underflow). */
class BlowupSuspected : public std::runtime_error {
  public:
    BlowupSuspected(const std::string& reason, double t, double linf)
        : std::runtime_error("blow-up suspected at t = " + std::to_string(t) + ": " + reason),
          reason_(reason), t_detect(t), linf_at_detect(linf) {}
    std::string reason_;
    double t_detect;
    double linf_at_detect;
};

/** Raised when more than the configured mass fraction reaches the outer 5%
 * ring of the box: the truncated domain no longer represents free space. */
class BoundaryContact : public std::runtime_error {
  public:
    explicit BoundaryContact(double t)
        : std::runtime_error("boundary ring mass exceeded tolerance at t = " + std::to_string(t) +
                             "; enlarge half_width") {}
};

/** One finite-volume time integrator bound to a grid and model pair:
 * upwinded positivity-limited advection by v = grad c, theta-implicit
 * diffusion of Delta A(u) with Picard-linearized face diffusivities, exact
 * telescoping-flux mass bookkeeping. Owns its workspace; one instance per
 * concurrent run. */
class Stepper {
  public:
    Stepper(const GridSpec& grid, const ChemoModel& chemo, const DiffusionModel& diffusion,
            const StepperConfig& cfg);

    /** Advances one step of at most dt_cap. Throws BlowupSuspected /
     * BoundaryContact per the configured monitors. */
    void step(SimState& state, double dt_cap);

    double adapt_dt(const SimState& state, const VectorField& v) const;

    ScalarField chemo_potential(const ScalarField& u) const { return chemo_.potential(u); }
    double guard_p() const { return guard_p_; }
    void set_initial_scales(const ScalarField& u0);
    const EntropyDensity& entropy() const { return entropy_; }
    const DiffusionModel& diffusion() const { return diffusion_; }

  private:
    void advect(ScalarField& u, const VectorField& v, double dt);
    void diffuse(ScalarField& u, double dt);
    void cg_solve(const std::vector<double>& rhs, const std::array<std::vector<double>, 3>& D,
                  double dt_theta, std::vector<double>& w);
    void apply_diffusion(const std::vector<double>& w, const std::array<std::vector<double>, 3>& D,
                         std::vector<double>& out) const;  // out = L_D w (flux form)

    GridSpec grid_;
    ChemoSolver chemo_;
    DiffusionModel diffusion_;
    EntropyDensity entropy_;
    StepperConfig cfg_;
    double guard_p_ = 2.0;
    double linf0_ = 0.0;
    std::vector<std::size_t> ring_cells_;
    // workspace
    std::array<std::vector<double>, 3> flux_, Dface_;
    std::vector<double> scale_, rhs_, wbuf_, cg_r_, cg_z_, cg_p_, cg_ap_, diag_;
};

enum class RunOutcome { Completed, Blowup };

struct RunResult {
    SimState state;
    std::vector<DiagnosticsRecord> series;
    RunOutcome outcome = RunOutcome::Completed;
    std::string blowup_reason;
    double t_detect = 0.0;
};

using Observer = std::function<void(const SimState&, const DiagnosticsRecord&)>;

/** Advances the initial data to t_end or to blow-up detection, collecting the
 * diagnostics ledger every observe_every steps plus at the listed exact
 * times (always at t = 0 and the final time). */
RunResult run(const ScalarField& initial, const ChemoModel& chemo, const DiffusionModel& diffusion,
              const StepperConfig& cfg, double t_end, int observe_every = 20,
              const std::vector<double>& exact_observe_times = {},
              const std::vector<Observer>& observers = {});

/** Effective tail exponent m with liminf A'(z) z^{1-m} > 0, capped by m*. */
double effective_diffusion_exponent(const DiffusionModel& model, double m_star);

}  // namespace aggrosim

#endif
