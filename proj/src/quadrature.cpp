#include "aggrosim/quadrature.hpp"

#include <cstdio>
#include <limits>
#include <vector>

namespace aggrosim {

namespace {

struct SimpsonState {
    const std::function<double(double)>* f;
    int max_depth;
};

double simpson_rec(const SimpsonState& st, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = (*st.f)(lm), frm = (*st.f)(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    // refining past the roundoff of the panel sums cannot help
    double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                   (std::fabs(left) + std::fabs(right) + std::fabs(whole));
    if (std::fabs(delta) <= 15.0 * tol || std::fabs(delta) <= floor)
        return left + right + delta / 15.0;
    if (depth >= st.max_depth) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.3e", std::fabs(delta) / 15.0);
        throw std::runtime_error(std::string("adaptive_simpson: no convergence, residual ") + buf);
    }
    return simpson_rec(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           simpson_rec(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    SimpsonState st{&f, max_depth};
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(st, a, b, fa, fm, fb, whole, abs_tol, 0);
}

void gauss_legendre(int n, double* nodes, double* weights) {
    if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n out of range");
    // Newton iteration on Legendre polynomials from the Chebyshev initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

double gauss_panel(const std::function<double(double)>& f, double a, double b, int n, int panels) {
    std::vector<double> x(n), w(n);
    gauss_legendre(n, x.data(), w.data());
    double s = 0.0;
    double hp = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double pa = a + p * hp;
        double c = pa + 0.5 * hp, r = 0.5 * hp;
        for (int i = 0; i < n; ++i) s += w[i] * f(c + r * x[i]) * r;
    }
    return s;
}

}  // namespace aggrosim
