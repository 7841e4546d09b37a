#ifndef AGGROSIM_QUADRATURE_HPP
#define AGGROSIM_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace aggrosim {

/** Adaptive Simpson on [a,b] with absolute tolerance. Throws on failure to
 * converge within max_depth (carrying the last interval estimate). */
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 40);

/** Nodes/weights of an N-point Gauss-Legendre rule on [-1,1], N <= 64. */
void gauss_legendre(int n, double* nodes, double* weights);

/** Integrates f over [a,b] with a composite N-point Gauss-Legendre rule on
 * `panels` equal panels. */
double gauss_panel(const std::function<double(double)>& f, double a, double b, int n, int panels);

}  // namespace aggrosim

#endif
