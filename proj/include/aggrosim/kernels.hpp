#ifndef AGGROSIM_KERNELS_HPP
#define AGGROSIM_KERNELS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aggrosim/grid.hpp"
#include "aggrosim/interp.hpp"

namespace aggrosim {

enum class KernelFamily { Newtonian, Logarithmic, PowerLaw, Tabulated };

struct CriticalExponent {
    double m_star = 1.0;
    double p = 0.0;  // singularity K = O(|x|^{-d/p}); infinity for logarithmic
    bool logarithmic = false;
    bool no_singularity = false;
    bool clamped = false;  // fitted s exceeded d-2 and was clamped
};

/** Radial interaction kernel K(x) = k(|x|).
 *
 * Shipped profiles are attractive (k non-increasing):
 *   newtonian   d=2: -(1/2pi) log r      d=3: 1/(4 pi r)
 *   log:c       -c log r, c >= 0 (c = 0 turns interaction off)
 *   power:s     r^{-s}, s > 0
 *   table:path  CSV "r,k" with strictly increasing r, monotone-cubic interpolated
 */
class Kernel {
  public:
    static Kernel newtonian(int dim);
    static Kernel logarithmic(double c, int dim);
    static Kernel power_law(double s, int dim);
    static Kernel tabulated(const std::string& csv_path, int dim);
    static Kernel tabulated(std::vector<double> r, std::vector<double> k, int dim);

    double eval(double r) const;         // k(r)
    double grad_radial(double r) const;  // k'(r)
    double lap(double r) const;          // k''(r) + (d-1) k'(r)/r

    int dim() const { return dim_; }
    KernelFamily family() const { return family_; }
    bool is_zero() const { return family_ == KernelFamily::Logarithmic && c_ == 0.0; }
    /** Singularity power s with K = O(|x|^{-s}); 0 flags logarithmic or bounded. */
    double singularity_power() const { return s_; }
    /** Strength c of a logarithmic singularity K = -c log|x| + o(log|x|); 0 if none. */
    double log_strength() const;

    CriticalExponent critical_exponent() const;

    /** Sampled admissibility audit: (KN) monotonicity on the dyadic ladder
     * r in {2^-20..2^10} and the (BD)-consistent bound |k''| <= C r^{-d-1}. */
    struct Audit {
        bool monotone_ok = true;
        bool second_derivative_bound_ok = true;
        double bd_constant = 0.0;
    };
    Audit audit() const;

  private:
    Kernel() = default;
    void classify_tabulated();

    KernelFamily family_ = KernelFamily::Logarithmic;
    int dim_ = 2;
    double c_ = 0.0;       // log strength
    double s_ = 0.0;       // power-law exponent
    double coeff_ = 1.0;   // newtonian d>=3 coefficient
    std::shared_ptr<MonotoneCubic> table_;
};

/** The paper's spatially varying mollification of K inside the unit ball:
 * K^eps(x) averages K over a ball of radius eps*eta(x) centered at x, with the
 * canonical radial bump eta; K^eps = K for |x| >= 1. Tabulated radially. */
class MollifiedKernel {
  public:
    MollifiedKernel(const Kernel& base, double epsilon);

    double eval(double r) const;
    const Kernel& base() const { return base_; }
    double epsilon() const { return eps_; }

  private:
    Kernel base_;
    double eps_;
    MonotoneCubic profile_;  // r in [0,1)
};

/** Canonical cutoff: radial, C^inf, eta == 1 on |x| <= 1/2, 0 < eta <= 1 on
 * |x| < 1, eta == 0 on |x| >= 1. */
double cutoff_eta(double r);

Kernel parse_kernel_spec(const std::string& spec, int dim);

MollifiedKernel mollify(const Kernel& base, double epsilon);

/** Doubled-domain convolution table. Returns a field on the 2n-per-axis grid
 * in wrap-around offset order: index i along an axis encodes the offset
 * delta = (i < n ? i : i - 2n) * h, so table(x) = table(-x) holds exactly and
 * the array feeds the FFT convolver directly. The zero-offset entry holds the
 * cell average of k over the origin cell (local tensor quadrature split at
 * the singular point); all other entries are point values k(|delta|). */
ScalarField sample_on_grid(const Kernel& kernel, const GridSpec& grid);

/** Same layout as sample_on_grid but for an arbitrary radial profile f(r)
 * (used for r k'(r) in the Virial rate and log r in the log-HLS probe). */
ScalarField sample_radial_table(const std::function<double(double)>& f, const GridSpec& grid);

}  // namespace aggrosim

#endif
