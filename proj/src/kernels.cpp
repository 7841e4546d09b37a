#include "aggrosim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "aggrosim/quadrature.hpp"

namespace aggrosim {

namespace {

double sphere_area(int d) { return d == 2 ? 2.0 * M_PI : 4.0 * M_PI; }

// least-squares slope of y against x; optionally reports the rms residual
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* rms_residual = nullptr) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    double slope = den > 0 ? num / den : 0.0;
    if (rms_residual) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = y[i] - my - slope * (x[i] - mx);
            r2 += e * e;
        }
        *rms_residual = std::sqrt(r2 / x.size());
    }
    return slope;
}

}  // namespace

double cutoff_eta(double r) {
    if (r >= 1.0) return 0.0;
    double t = std::max(0.0, 2.0 * r - 1.0);
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

Kernel Kernel::newtonian(int dim) {
    Kernel k;
    k.family_ = KernelFamily::Newtonian;
    k.dim_ = dim;
    if (dim == 2) {
        k.c_ = 1.0 / (2.0 * M_PI);
        k.s_ = 0.0;
    } else {
        k.s_ = dim - 2;
        k.coeff_ = std::tgamma(dim / 2.0 + 1.0) / (dim * (dim - 2) * std::pow(M_PI, dim / 2.0));
    }
    return k;
}

Kernel Kernel::logarithmic(double c, int dim) {
    if (c < 0) throw std::invalid_argument("kernel: log strength must be >= 0");
    Kernel k;
    k.family_ = KernelFamily::Logarithmic;
    k.dim_ = dim;
    k.c_ = c;
    return k;
}

Kernel Kernel::power_law(double s, int dim) {
    if (!(s > 0)) throw std::invalid_argument("kernel: power-law exponent must be > 0");
    Kernel k;
    k.family_ = KernelFamily::PowerLaw;
    k.dim_ = dim;
    k.s_ = s;
    return k;
}

Kernel Kernel::tabulated(std::vector<double> r, std::vector<double> kv, int dim) {
    Kernel k;
    k.family_ = KernelFamily::Tabulated;
    k.dim_ = dim;
    k.table_ = std::make_shared<MonotoneCubic>(std::move(r), std::move(kv));
    k.classify_tabulated();
    return k;
}

Kernel Kernel::tabulated(const std::string& csv_path, int dim) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("kernel: cannot open table " + csv_path);
    std::vector<double> r, k;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double rv, kv;
        if (!(ls >> rv >> kv)) throw std::runtime_error("kernel: bad table line: " + line);
        r.push_back(rv);
        k.push_back(kv);
    }
    return tabulated(std::move(r), std::move(k), dim);
}

void Kernel::classify_tabulated() {
    // Singularity detector on the window [1e-6, 1e-3] (or the smallest
    // available decade). A power law is linear in log k vs log r, a
    // logarithmic singularity is linear in k vs -log r; both fits are taken
    // and the smaller relative rms residual decides. A pure -c log r profile
    // would otherwise pass the power fit with the spurious slope
    // -1/|log r| ~ 0.1, so the slope threshold alone cannot separate them.
    const double rmin = table_->x_front();
    double wlo = std::max(rmin, 1e-6), whi = 1e-3;
    if (whi <= wlo) whi = rmin * 100.0;
    std::vector<double> lr, lk, kw, mlr;
    bool all_positive = true;
    for (int i = 0; i < 24; ++i) {
        double r = wlo * std::pow(whi / wlo, i / 23.0);
        double kv = table_->eval(r);
        kw.push_back(kv);
        mlr.push_back(-std::log(r));
        lr.push_back(std::log(r));
        if (kv > 0) lk.push_back(std::log(kv));
        else all_positive = false;
    }
    double res_pow = std::numeric_limits<double>::infinity(), slope_pow = 0.0;
    if (all_positive) slope_pow = lsq_slope(lr, lk, &res_pow);
    double res_log = 0.0;
    double cfit = lsq_slope(mlr, kw, &res_log);
    double kscale = 0.0;
    for (double kv : kw) kscale = std::max(kscale, std::fabs(kv));
    double rel_pow = res_pow;  // log k already dimensionless
    double rel_log = kscale > 0 ? res_log / kscale : 0.0;
    if (all_positive && slope_pow < -0.05 && rel_pow < rel_log) {
        s_ = -slope_pow;
        c_ = 0.0;
    } else {
        s_ = 0.0;
        c_ = cfit > 0.05 ? cfit : 0.0;
    }
}

double Kernel::eval(double r) const {
    if (r <= 0.0) {
        bool singular = s_ > 0.0 || c_ > 0.0 || family_ == KernelFamily::Newtonian;
        if (singular) throw std::domain_error("kernel: eval at r <= 0 for singular profile");
        return family_ == KernelFamily::Tabulated ? table_->eval(table_->x_front()) : 0.0;
    }
    switch (family_) {
        case KernelFamily::Newtonian:
            return dim_ == 2 ? -std::log(r) / (2.0 * M_PI) : coeff_ * std::pow(r, 2.0 - dim_);
        case KernelFamily::Logarithmic:
            return -c_ * std::log(r);
        case KernelFamily::PowerLaw:
            return std::pow(r, -s_);
        case KernelFamily::Tabulated: {
            if (r < table_->x_front()) {
                double r0 = table_->x_front(), k0 = table_->eval(r0);
                if (s_ > 0) return k0 * std::pow(r / r0, -s_);
                if (c_ > 0) return k0 + c_ * std::log(r0 / r);
                return k0;
            }
            return table_->eval(r);
        }
    }
    return 0.0;
}

double Kernel::grad_radial(double r) const {
    if (r <= 0.0) throw std::domain_error("kernel: grad at r <= 0");
    switch (family_) {
        case KernelFamily::Newtonian:
            return dim_ == 2 ? -1.0 / (2.0 * M_PI * r) : coeff_ * (2.0 - dim_) * std::pow(r, 1.0 - dim_);
        case KernelFamily::Logarithmic:
            return -c_ / r;
        case KernelFamily::PowerLaw:
            return -s_ * std::pow(r, -s_ - 1.0);
        case KernelFamily::Tabulated: {
            if (r < table_->x_front()) {
                double r0 = table_->x_front(), k0 = table_->eval(r0);
                if (s_ > 0) return -s_ * k0 * std::pow(r / r0, -s_) / r;
                if (c_ > 0) return -c_ / r;
                return 0.0;
            }
            return table_->deriv(r);
        }
    }
    return 0.0;
}

double Kernel::lap(double r) const {
    if (r <= 0.0) throw std::domain_error("kernel: lap at r <= 0");
    double kpp;
    switch (family_) {
        case KernelFamily::Newtonian:
            kpp = dim_ == 2 ? 1.0 / (2.0 * M_PI * r * r)
                            : coeff_ * (2.0 - dim_) * (1.0 - dim_) * std::pow(r, -static_cast<double>(dim_));
            break;
        case KernelFamily::Logarithmic:
            kpp = c_ / (r * r);
            break;
        case KernelFamily::PowerLaw:
            kpp = s_ * (s_ + 1.0) * std::pow(r, -s_ - 2.0);
            break;
        case KernelFamily::Tabulated:
            kpp = r < table_->x_front() ? 0.0 : table_->second(r);
            break;
        default:
            kpp = 0.0;
    }
    return kpp + (dim_ - 1) * grad_radial(r) / r;
}

double Kernel::log_strength() const {
    if (family_ == KernelFamily::Newtonian && dim_ == 2) return 1.0 / (2.0 * M_PI);
    if (family_ == KernelFamily::Logarithmic || family_ == KernelFamily::Tabulated) return c_;
    return 0.0;
}

CriticalExponent Kernel::critical_exponent() const {
    CriticalExponent ce;
    const double m_max = 2.0 - 2.0 / dim_;
    if (is_zero() || (s_ == 0.0 && log_strength() == 0.0)) {
        ce.m_star = 1.0;
        ce.no_singularity = true;
        return ce;
    }
    if (s_ == 0.0) {  // logarithmic singularity, convention p = infinity
        ce.m_star = 1.0;
        ce.logarithmic = true;
        ce.p = std::numeric_limits<double>::infinity();
        return ce;
    }
    double s = s_;
    if (s > dim_ - 2 + 1e-12 && dim_ > 2) {
        ce.clamped = true;
        s = dim_ - 2;
    } else if (dim_ == 2) {
        // in d = 2 any power singularity exceeds the admissible range
        ce.clamped = true;
        ce.m_star = m_max;  // = 1
        ce.p = std::numeric_limits<double>::infinity();
        return ce;
    }
    ce.p = dim_ / s;
    ce.m_star = (ce.p + 1.0) / ce.p;
    if (ce.m_star > m_max) {
        ce.m_star = m_max;
        ce.clamped = true;
    }
    return ce;
}

Kernel::Audit Kernel::audit() const {
    Audit a;
    if (is_zero()) return a;
    std::vector<double> logr, logrho;
    for (int j = -20; j <= 10; ++j) {
        double r = std::ldexp(1.0, j);
        if (grad_radial(r) > 1e-12 * (std::fabs(eval(r)) + 1.0)) a.monotone_ok = false;
        double kpp = lap(r) - (dim_ - 1) * grad_radial(r) / r;
        double rho = std::fabs(kpp) * std::pow(r, dim_ + 1.0);
        a.bd_constant = std::max(a.bd_constant, rho);
        if (j <= -10 && rho > 0) {
            logr.push_back(j * std::log(2.0));
            logrho.push_back(std::log(rho));
        }
    }
    // (BD) consistency: the ratio |k''| r^{d+1} must not diverge as r -> 0
    if (logr.size() >= 3 && lsq_slope(logr, logrho) < -0.05) a.second_derivative_bound_ok = false;
    return a;
}

Kernel parse_kernel_spec(const std::string& spec, int dim) {
    if (spec == "newtonian") return Kernel::newtonian(dim);
    if (spec.rfind("log:c=", 0) == 0) return Kernel::logarithmic(std::stod(spec.substr(6)), dim);
    if (spec.rfind("power:s=", 0) == 0) return Kernel::power_law(std::stod(spec.substr(8)), dim);
    if (spec.rfind("table:", 0) == 0) return Kernel::tabulated(spec.substr(6), dim);
    throw std::invalid_argument("kernel: unknown spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Mollification

namespace {

struct MollifyContext {
    const Kernel* k;
    int d;
    double c_eta;  // integral of eta over R^d
};

// angular factor Theta(rho) = int_{S^{d-1}} psi_w(x - rho*omega) domega at |x| = r
double angular_factor(const MollifyContext& mc, double r, double rho, double w) {
    double denom = 2.0 * r * rho;
    double cos_min = denom > 0 ? (r * r + rho * rho - w * w) / denom : -1.0;
    if (cos_min >= 1.0) return 0.0;
    double phi_max = cos_min <= -1.0 ? M_PI : std::acos(cos_min);
    auto psi = [&](double phi) {
        double u2 = r * r + rho * rho - 2.0 * r * rho * std::cos(phi);
        double u = std::sqrt(std::max(u2, 0.0));
        double eta = cutoff_eta(u / w);
        if (mc.d == 2) return 2.0 * eta / (mc.c_eta * w * w);
        return 2.0 * M_PI * eta * std::sin(phi) / (mc.c_eta * w * w * w);
    };
    return gauss_panel(psi, 0.0, phi_max, 24, 2);
}

double mollified_value(const MollifyContext& mc, double r, double w) {
    if (w < 1e-8) return mc.k->eval(r);  // vanishing mollification radius
    auto g = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        return mc.k->eval(rho) * std::pow(rho, mc.d - 1.0) * angular_factor(mc, r, rho, w);
    };
    double lo = std::max(0.0, r - w), hi = r + w;
    double kref = std::fabs(mc.k->eval(std::max(r, 0.5 * w))) + 1.0;
    return adaptive_simpson(g, lo, hi, 1e-9 * kref, 32);
}

double mollified_origin(const MollifyContext& mc, double w) {
    auto g = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        return mc.k->eval(rho) * std::pow(rho, mc.d - 1.0) * cutoff_eta(rho / w);
    };
    double integral = adaptive_simpson(g, 0.0, w, 1e-11, 32);
    return sphere_area(mc.d) * integral / (mc.c_eta * std::pow(w, mc.d));
}

}  // namespace

MollifiedKernel::MollifiedKernel(const Kernel& base, double epsilon) : base_(base), eps_(epsilon) {
    if (!(epsilon > 0.0) || epsilon > 0.25)
        throw std::invalid_argument("mollify: epsilon must lie in (0, 1/4]");
    MollifyContext mc;
    mc.k = &base_;
    mc.d = base_.dim();
    mc.c_eta = sphere_area(mc.d) *
               gauss_panel([&](double t) { return cutoff_eta(t) * std::pow(t, mc.d - 1.0); }, 0.0,
                           1.0, 48, 8);

    std::vector<double> nodes;
    nodes.push_back(0.0);
    for (int i = 0; i <= 160; ++i) nodes.push_back(1e-6 * std::pow(0.1 / 1e-6, i / 160.0));
    for (int i = 1; i <= 340; ++i) nodes.push_back(0.1 + (1.0 - 1e-9 - 0.1) * i / 340.0);

    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double r = nodes[i];
        double w = eps_ * cutoff_eta(r);
        vals[i] = (r == 0.0) ? mollified_origin(mc, eps_) : mollified_value(mc, r, w);
    }
    profile_ = MonotoneCubic(std::move(nodes), std::move(vals));
}

double MollifiedKernel::eval(double r) const {
    if (r >= 1.0) return base_.eval(r);
    if (r < 0.0) throw std::domain_error("mollified kernel: negative radius");
    return profile_.eval(r);
}

MollifiedKernel mollify(const Kernel& base, double epsilon) { return MollifiedKernel(base, epsilon); }

// ---------------------------------------------------------------------------
// Doubled-domain convolution tables

namespace {

// cell average of f(|x|) over the origin cell [-h/2, h/2)^d, quadrature split
// into orthants so no node hits the singular point
double origin_cell_average(const std::function<double(double)>& f, int d, double h) {
    if (d == 2) {
        const int m = 24;
        std::vector<double> x(m), w(m);
        gauss_legendre(m, x.data(), w.data());
        double s = 0.0, r0 = h / 4.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double xi = r0 + r0 * x[i], yj = r0 + r0 * x[j];
                s += w[i] * w[j] * f(std::hypot(xi, yj));
            }
        return s / 4.0;  // orthant weights r0^2 = (h/4)^2 over cell area h^2, times 4 orthants
    }
    const int m = 12;
    std::vector<double> x(m), w(m);
    gauss_legendre(m, x.data(), w.data());
    double s = 0.0, r0 = h / 4.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                double xi = r0 + r0 * x[i], yj = r0 + r0 * x[j], zk = r0 + r0 * x[k];
                s += w[i] * w[j] * w[k] * f(std::sqrt(xi * xi + yj * yj + zk * zk));
            }
    return s / 8.0;
}

}  // namespace

ScalarField sample_radial_table(const std::function<double(double)>& f, const GridSpec& grid) {
    grid.validate();
    GridSpec dbl = grid;
    dbl.cells_per_axis = 2 * grid.cells_per_axis;
    dbl.half_width = 2.0 * grid.half_width;
    ScalarField table(dbl);
    const int n = grid.cells_per_axis, N = 2 * n;
    const double h = grid.spacing();
    auto offset = [&](int i) { return (i < n ? i : i - N) * h; };
    if (grid.dim == 2) {
        for (int j = 0; j < N; ++j) {
            double dy = offset(j);
            for (int i = 0; i < N; ++i) {
                double dx = offset(i);
                double r = std::hypot(dx, dy);
                table.values[table.idx(i, j)] = (r == 0.0) ? origin_cell_average(f, 2, h) : f(r);
            }
        }
    } else {
        for (int k = 0; k < N; ++k) {
            double dz = offset(k);
            for (int j = 0; j < N; ++j) {
                double dy = offset(j);
                for (int i = 0; i < N; ++i) {
                    double dx = offset(i);
                    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                    table.values[table.idx(i, j, k)] = (r == 0.0) ? origin_cell_average(f, 3, h) : f(r);
                }
            }
        }
    }
    return table;
}

ScalarField sample_on_grid(const Kernel& kernel, const GridSpec& grid) {
    if (kernel.is_zero()) {
        GridSpec dbl = grid;
        dbl.cells_per_axis = 2 * grid.cells_per_axis;
        dbl.half_width = 2.0 * grid.half_width;
        return ScalarField(dbl);
    }
    return sample_radial_table([&](double r) { return kernel.eval(r); }, grid);
}

}  // namespace aggrosim
