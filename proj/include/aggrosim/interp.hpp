#ifndef AGGROSIM_INTERP_HPP
#define AGGROSIM_INTERP_HPP

#include <stdexcept>
#include <vector>

namespace aggrosim {

/** Fritsch-Carlson monotone cubic interpolant. Monotone data produce a
 * monotone interpolant; evaluation outside the node range extrapolates
 * linearly with the end slope. */
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double eval(double t) const;
    double deriv(double t) const;
    double second(double t) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

  private:
    int interval(double t) const;
    std::vector<double> x_, y_, d_;
};

}  // namespace aggrosim

#endif
