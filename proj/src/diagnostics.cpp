#include "aggrosim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aggrosim/quadrature.hpp"

namespace aggrosim {

namespace {
constexpr double kDissipationFloor = 1e-12;
}

FreeEnergyParts free_energy(const ScalarField& u, const ScalarField& c,
                            const EntropyDensity& entropy) {
    FreeEnergyParts out;
    double s = 0.0, w = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        s += entropy.phi(u.values[i]);
        w += u.values[i] * c.values[i];
    }
    const double hd = u.grid.cell_volume();
    out.entropy = s * hd;
    out.interaction = 0.5 * w * hd;
    out.total = out.entropy - out.interaction;
    return out;
}

double dissipation(const ScalarField& u, const ScalarField& c, const DiffusionModel& model) {
    auto gu = cell_gradient(u);
    auto gc = cell_gradient(c);
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        double ui = u.values[i];
        if (ui < kDissipationFloor) continue;
        double ap = model.A_prime(ui);
        double acc = 0.0;
        for (int ax = 0; ax < u.grid.dim; ++ax) {
            double flux = ap * gu[ax].values[i] - ui * gc[ax].values[i];
            acc += flux * flux;
        }
        s += acc / ui;
    }
    return s * u.grid.cell_volume();
}

VirialRate virial_rate(const ScalarField& u, const Kernel& kernel, const DiffusionModel& model) {
    VirialRate out;
    double ai = 0.0;
    for (double v : u.values) ai += model.A(v);
    out.diffusion_term = 2.0 * u.grid.dim * ai * u.grid.cell_volume();
    if (!kernel.is_zero()) {
        // (x-y).grad K(x-y) = r k'(r) is radial, so the double integral is a
        // single convolution against that profile.
        ScalarField table =
            sample_radial_table([&](double r) { return r * kernel.grad_radial(r); }, u.grid);
        FreeSpaceConvolver conv(table, u.grid);
        ScalarField pu = conv.apply(u);
        double s = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) s += u.values[i] * pu.values[i];
        out.interaction_term = s * u.grid.cell_volume();
    }
    out.predicted = out.diffusion_term + out.interaction_term;
    return out;
}

double boltzmann_entropy(const ScalarField& u) {
    double s = 0.0;
    for (double v : u.values)
        if (v > 0.0) s += v * std::log(v);
    return s * u.grid.cell_volume();
}

EntropyBoundCheck entropy_lower_bound_check(const ScalarField& u, double eps) {
    EntropyBoundCheck out;
    const int d = u.grid.dim;
    double mass = integrate(u);
    out.lhs = boltzmann_entropy(u);
    out.rhs = mass * std::log(std::pow(eps, 0.5 * d) * mass / std::pow(M_PI, 0.5 * d)) -
              eps * second_moment(u);
    out.ok = out.lhs >= out.rhs - 1e-8 * (1.0 + std::fabs(out.rhs));
    return out;
}

LogHlsReport log_hls_probe(const ScalarField& f, const std::vector<double>& scales) {
    LogHlsReport rep;
    rep.scales = scales;
    const int d = f.grid.dim;
    const double mass = integrate(f);
    ScalarField table = sample_radial_table([](double r) { return std::log(r); }, f.grid);
    FreeSpaceConvolver conv(table, f.grid);
    double qmin = 0.0, qmax = 0.0;
    bool first = true;
    for (double lam : scales) {
        ScalarField fl = rescale_conservative(f, lam);
        ScalarField lf = conv.apply(fl);
        double dbl = 0.0;
        for (std::size_t i = 0; i < fl.values.size(); ++i) dbl += fl.values[i] * lf.values[i];
        dbl *= f.grid.cell_volume();
        double q = -dbl - (mass / d) * boltzmann_entropy(fl);
        rep.q_values.push_back(q);
        rep.max_q = first ? q : std::max(rep.max_q, q);
        if (lam <= 1.0 + 1e-12) {
            qmin = first ? q : std::min(qmin, q);
            qmax = first ? q : std::max(qmax, q);
            first = false;
        }
    }
    double scale_ref = std::max(std::fabs(qmin), std::fabs(qmax));
    rep.variation = scale_ref > 0 ? (qmax - qmin) / scale_ref : 0.0;
    rep.scale_stable = rep.variation <= 0.10;
    return rep;
}

double log_interaction_brute_force(const ScalarField& f) {
    const GridSpec& g = f.grid;
    if (g.dim != 2) throw std::invalid_argument("brute-force oracle implemented for d = 2");
    const int n = g.cells_per_axis;
    const double h = g.spacing();
    // independent self-cell constant: 16x16 midpoint panels of log|x| on the
    // quarter cell (integrable singularity at the corner)
    double self = 0.0;
    {
        const int m = 16;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double x = (i + 0.5) * (h / 2) / m, y = (j + 0.5) * (h / 2) / m;
                self += std::log(std::hypot(x, y));
            }
        self /= (m * m);
    }
    double s = 0.0;
    for (int j2 = 0; j2 < n; ++j2)
        for (int i2 = 0; i2 < n; ++i2) {
            double f2 = f.values[f.idx(i2, j2)];
            if (f2 == 0.0) continue;
            for (int j1 = 0; j1 < n; ++j1)
                for (int i1 = 0; i1 < n; ++i1) {
                    double f1 = f.values[f.idx(i1, j1)];
                    if (f1 == 0.0) continue;
                    double lg = (i1 == i2 && j1 == j2)
                                    ? self
                                    : std::log(h * std::hypot(double(i1 - i2), double(j1 - j2)));
                    s += f1 * f2 * lg;
                }
        }
    return -s * h * h * h * h;
}

GnsReport gns_probe(const ScalarField& f, double p, double q, double r, double k,
                    const std::vector<double>& scales) {
    const int d = f.grid.dim;
    const double s = 1.0;
    // lemma constraints
    if (!(1.0 <= p && p <= r * k && r * k <= d * k))
        throw std::invalid_argument("gns_probe: violated 1 <= p <= rk <= dk");
    double q_hi = (d > r) ? r * k * d / (d - r) : std::numeric_limits<double>::infinity();
    if (!(k < q && q < q_hi)) throw std::invalid_argument("gns_probe: violated k < q < rkd/(d-r)");
    if (!(1.0 / r - k / q - s / d < 0))
        throw std::invalid_argument("gns_probe: violated 1/r - k/q - s/d < 0");

    GnsReport rep;
    rep.alpha1 = (1.0 / q - 1.0 / p) / (-s / d + 1.0 / r - k / p);
    rep.alpha2 = 1.0 - rep.alpha1 * k;
    if (!(rep.alpha1 > 0) || !(rep.alpha2 > 0))
        throw std::invalid_argument("gns_probe: exponent relations give non-positive alpha");
    rep.scales = scales;

    // R(f) with a 4th-order cell-centered gradient so the dilation comparison
    // is not polluted by discretization error
    auto ratio = [&](const ScalarField& g) {
        const int n = g.grid.cells_per_axis;
        const double ih = 1.0 / g.grid.spacing();
        ScalarField fk(g.grid);
        for (std::size_t i = 0; i < g.values.size(); ++i)
            fk.values[i] = std::pow(std::max(g.values[i], 0.0), k);
        double grad_sum = 0.0;
        const std::ptrdiff_t stride[3] = {1, n, static_cast<std::ptrdiff_t>(n) * n};
        auto value = [&](std::size_t id, int ax, int off) -> double {
            return fk.values[id + off * stride[ax]];
        };
        auto cell_ok = [&](int c, int off) { return c + off >= 0 && c + off < n; };
        const std::size_t total = g.values.size();
        int ix[3] = {0, 0, 0};
        for (std::size_t id = 0; id < total; ++id) {
            double acc = 0.0;
            for (int ax = 0; ax < d; ++ax) {
                int c = ix[ax];
                double der;
                if (cell_ok(c, -2) && cell_ok(c, 2)) {
                    der = (value(id, ax, -2) - 8.0 * value(id, ax, -1) + 8.0 * value(id, ax, 1) -
                           value(id, ax, 2)) /
                          12.0 * ih;
                } else if (cell_ok(c, -1) && cell_ok(c, 1)) {
                    der = 0.5 * (value(id, ax, 1) - value(id, ax, -1)) * ih;
                } else if (cell_ok(c, 1)) {
                    der = (value(id, ax, 1) - value(id, ax, 0)) * ih;
                } else {
                    der = (value(id, ax, 0) - value(id, ax, -1)) * ih;
                }
                acc += der * der;
            }
            grad_sum += std::pow(acc, r / 2.0);
            ++ix[0];
            for (int ax = 0; ax < d - 1 && ix[ax] == n; ++ax) {
                ix[ax] = 0;
                ++ix[ax + 1];
            }
        }
        double grad_norm = std::pow(grad_sum * g.grid.cell_volume(), 1.0 / r);
        double nq = lp_norm(g, q), np = lp_norm(g, p);
        return nq / (std::pow(np, rep.alpha2) * std::pow(grad_norm, rep.alpha1));
    };

    double r_base = ratio(f);
    for (double lam : scales) {
        ScalarField g = (lam == 1.0) ? f : rescale_conservative(f, 1.0 / lam);
        if (lam != 1.0) {
            double amp = std::pow(lam, d);
            for (double& v : g.values) v *= amp;  // recover f(lambda x) from the mass-form rescale
        }
        double rv = ratio(g);
        rep.ratios.push_back(rv);
        rep.max_deviation = std::max(rep.max_deviation, std::fabs(rv / r_base - 1.0));
    }
    rep.invariant_ok = rep.max_deviation <= 0.01;
    return rep;
}

SelfSimilarFrame self_similar_transform(const ScalarField& u, double t) {
    if (t < 0) throw std::invalid_argument("self_similar_transform: t must be >= 0");
    const int d = u.grid.dim;
    SelfSimilarFrame fr;
    fr.tau = std::log(1.0 + d * t) / d;
    double lambda = std::exp(-fr.tau);  // theta = lambda^{-d} u(x / lambda), lambda <= 1
    fr.theta = rescale_conservative(u, lambda);
    double m0 = integrate(u), m1 = integrate(fr.theta);
    if (std::fabs(m1 - m0) > 1e-6 * std::max(1.0, std::fabs(m0)))
        throw std::runtime_error("self_similar_transform: mass not preserved by resampling");
    return fr;
}

ScalarField inverse_self_similar_transform(const ScalarField& theta, double tau) {
    double lambda = std::exp(tau);
    ScalarField u = rescale_conservative(theta, lambda);
    double m0 = integrate(theta), m1 = integrate(u);
    if (std::fabs(m1 - m0) > 1e-6 * std::max(1.0, std::fabs(m0)))
        throw std::runtime_error(
            "inverse self-similar transform: rescaled support exceeds the box; enlarge half_width");
    return u;
}

double modified_free_energy(const ScalarField& theta, const EntropyDensity& entropy,
                            const Kernel& kernel) {
    const int d = theta.grid.dim;
    auto ce = kernel.critical_exponent();
    double ent;
    if (d == 2) {
        if (!ce.logarithmic || entropy.model().family() != DiffusionFamily::Linear)
            throw std::invalid_argument(
                "modified_free_energy: d = 2 form needs a log-singular kernel and linear diffusion");
        ent = boltzmann_entropy(theta);
    } else {
        if (kernel.family() != KernelFamily::Newtonian ||
            entropy.model().family() != DiffusionFamily::PorousMedium ||
            std::fabs(entropy.model().exponent() - (2.0 - 2.0 / d)) > 1e-12)
            throw std::invalid_argument(
                "modified_free_energy: d >= 3 form needs the Newtonian kernel and PME exponent 2-2/d");
        double mexp = 2.0 - 2.0 / d, s = 0.0;
        for (double v : theta.values) s += v > 0 ? std::pow(v, mexp) : 0.0;
        ent = s * theta.grid.cell_volume() / (1.0 - 2.0 / d);
    }
    ScalarField c = convolve_potential(kernel, theta);
    double w = 0.0;
    for (std::size_t i = 0; i < theta.values.size(); ++i) w += theta.values[i] * c.values[i];
    w *= 0.5 * theta.grid.cell_volume();
    return ent + 0.5 * second_moment(theta) - w;
}

DiagnosticsRecord collect_diagnostics(double t, const ScalarField& u, const ScalarField& c,
                                      const EntropyDensity& entropy, const DiffusionModel& model,
                                      double guard_p) {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = integrate(u);
    r.linf = max_abs(u);
    r.l2 = lp_norm(u, 2.0);
    r.lp_guard = lp_norm(u, guard_p);
    r.m2 = second_moment(u);
    auto fe = free_energy(u, c, entropy);
    r.entropy = fe.entropy;
    r.interaction = fe.interaction;
    r.free_energy = fe.total;
    r.dissipation = dissipation(u, c, model);
    return r;
}

}  // namespace aggrosim
