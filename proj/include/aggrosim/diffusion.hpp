#ifndef AGGROSIM_DIFFUSION_HPP
#define AGGROSIM_DIFFUSION_HPP

#include <memory>
#include <optional>
#include <string>

#include "aggrosim/interp.hpp"
#include "aggrosim/kernels.hpp"

namespace aggrosim {

enum class DiffusionFamily { Linear, PorousMedium, Custom };

/** Nonlinear diffusion A(z) with A(0) = 0 and A'(z) > 0 on (0,inf).
 *
 * reg_shift carries the parabolic regularization: the regularized model uses
 * a_eps'(z) = A'(z) + (3/2) eps, the midpoint of the admissible band
 * [A'(z)+eps, A'(z)+2eps], i.e. A^eps(z) = A(z) + (3/2) eps z. */
class DiffusionModel {
  public:
    static DiffusionModel linear();
    static DiffusionModel porous_medium(double m);
    static DiffusionModel custom(const std::string& csv_path);
    static DiffusionModel custom(std::vector<double> z, std::vector<double> A,
                                 std::vector<double> Aprime);

    double A(double z) const;
    double A_prime(double z) const;

    DiffusionFamily family() const { return family_; }
    double exponent() const { return m_; }  // PME exponent; 1 for linear
    double reg_shift() const { return shift_; }

    /** Parabolic regularization A^eps; throws for eps <= 0. */
    DiffusionModel regularized(double eps) const;

    /** Sampled admissibility audit (D1)-(D3) with the witnessed constants. */
    struct Audit {
        bool positive_ok = true;      // (D1) A'(z) > 0 sampled
        double growth_c = 0.0;        // (D2) A'(z) > c for z > z_c
        double growth_zc = 1.0;
        double bounded_CA = 0.0;      // (D3) A'(z) <= C_A for z <= z_A
        double bounded_zA = 1.0;
    };
    Audit audit() const;

  private:
    DiffusionFamily family_ = DiffusionFamily::Linear;
    double m_ = 1.0;
    double shift_ = 0.0;
    std::shared_ptr<MonotoneCubic> A_tab_, Ap_tab_;
};

/** Entropy density Phi with Phi'' = A'(z)/z, Phi'(1) = 0, Phi(0) = 0.
 * Closed forms for linear (z log z - z) and porous medium ((z^m - m z)/(m-1));
 * nested adaptive quadrature for custom models. */
class EntropyDensity {
  public:
    explicit EntropyDensity(const DiffusionModel& model);

    double phi(double z) const;
    double h(double z) const;  // inner integral int_1^z A'(s)/s ds

    const DiffusionModel& model() const { return model_; }

  private:
    DiffusionModel model_;
    bool closed_form_ = true;
    MonotoneCubic h_tab_, phi_tab_;
};

EntropyDensity entropy_density(const DiffusionModel& model);

enum class Criticality { Subcritical, Critical, Supercritical };

struct CriticalityReport {
    Criticality label = Criticality::Critical;
    double liminf_estimate = 0.0;  // meaningful for the Critical label
    double tail_slope = 0.0;       // fitted slope of log rho vs log z
};

/** Classifies the pair (A, K) by the tail of rho(z) = A'(z)/z^{m*-1} on the
 * ladder z = 10^2..10^8. Throws std::runtime_error("indeterminate...") when
 * the tail oscillates beyond tolerance. */
CriticalityReport classify(const DiffusionModel& model, const Kernel& kernel, int dim);

struct CriticalMassResult {
    std::optional<double> mass;
    std::string reason;  // set when mass is absent
};

/** Critical mass from lim Phi(z)/(z log z) = (c/2d) M_c for kernels with a
 * logarithmic singularity of strength c. */
CriticalMassResult critical_mass(const DiffusionModel& model, const Kernel& kernel, int dim);

DiffusionModel parse_diffusion_spec(const std::string& spec);

}  // namespace aggrosim

#endif
