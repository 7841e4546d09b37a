#include "aggrosim/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "aggrosim/quadrature.hpp"

namespace aggrosim {

DiffusionModel DiffusionModel::linear() { return DiffusionModel{}; }

DiffusionModel DiffusionModel::porous_medium(double m) {
    if (!(m > 1.0)) throw std::invalid_argument("diffusion: PME exponent must be > 1");
    DiffusionModel d;
    d.family_ = DiffusionFamily::PorousMedium;
    d.m_ = m;
    return d;
}

DiffusionModel DiffusionModel::custom(std::vector<double> z, std::vector<double> A,
                                      std::vector<double> Aprime) {
    DiffusionModel d;
    d.family_ = DiffusionFamily::Custom;
    d.A_tab_ = std::make_shared<MonotoneCubic>(z, std::move(A));
    d.Ap_tab_ = std::make_shared<MonotoneCubic>(std::move(z), std::move(Aprime));
    return d;
}

DiffusionModel DiffusionModel::custom(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("diffusion: cannot open table " + csv_path);
    std::vector<double> z, A, Ap;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double zv, av, apv;
        if (!(ls >> zv >> av >> apv)) throw std::runtime_error("diffusion: bad table line: " + line);
        z.push_back(zv);
        A.push_back(av);
        Ap.push_back(apv);
    }
    return custom(std::move(z), std::move(A), std::move(Ap));
}

double DiffusionModel::A(double z) const {
    double base;
    switch (family_) {
        case DiffusionFamily::Linear:
            base = z;
            break;
        case DiffusionFamily::PorousMedium:
            base = z <= 0.0 ? 0.0 : std::pow(z, m_);
            break;
        default:
            base = z <= 0.0 ? 0.0 : std::max(0.0, A_tab_->eval(z));
    }
    return base + shift_ * z;
}

double DiffusionModel::A_prime(double z) const {
    double base;
    switch (family_) {
        case DiffusionFamily::Linear:
            base = 1.0;
            break;
        case DiffusionFamily::PorousMedium:
            base = z <= 0.0 ? 0.0 : m_ * std::pow(z, m_ - 1.0);
            break;
        default:
            base = z <= 0.0 ? std::max(0.0, Ap_tab_->eval(Ap_tab_->x_front()))
                            : std::max(0.0, Ap_tab_->eval(z));
    }
    return base + shift_;
}

DiffusionModel DiffusionModel::regularized(double eps) const {
    if (!(eps > 0.0)) throw std::invalid_argument("regularize: epsilon must be > 0");
    DiffusionModel d = *this;
    d.shift_ += 1.5 * eps;
    return d;
}

DiffusionModel::Audit DiffusionModel::audit() const {
    Audit a;
    // (D2) constants witnessed on z in {1, 10, ..., 1e8}; (D3) on (0, 1]
    a.growth_c = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 8; ++k) {
        double z = std::pow(10.0, k);
        double ap = A_prime(z);
        if (!(ap > 0)) a.positive_ok = false;
        a.growth_c = std::min(a.growth_c, ap);
    }
    a.growth_c *= 0.5;
    for (int k = 0; k <= 8; ++k) {
        double z = std::pow(10.0, -k);
        double ap = A_prime(z);
        if (!(ap > 0)) a.positive_ok = false;
        a.bounded_CA = std::max(a.bounded_CA, ap);
    }
    return a;
}

// ---------------------------------------------------------------------------

EntropyDensity::EntropyDensity(const DiffusionModel& model) : model_(model) {
    closed_form_ = model.family() != DiffusionFamily::Custom;
    if (closed_form_) return;

    // h(z) = int_1^z A'(s)/s ds with adaptive Simpson (tol 1e-10), then
    // Phi(z) = int_0^z h(s) ds (tol 1e-8), both tabulated on a log ladder.
    auto integrand_h = [&](double s) { return model_.A_prime(s) / s; };
    std::vector<double> nodes{0.0};
    for (int i = 0; i <= 400; ++i) nodes.push_back(1e-8 * std::pow(1e9 / 1e-8, i / 400.0));
    std::vector<double> pv(nodes.size());
    // h is integrated outward from z = 1 in both directions
    std::vector<double> hnodes(nodes.begin() + 1, nodes.end());
    std::vector<double> hvals(hnodes.size());
    int i1 = 0;
    while (hnodes[i1] < 1.0) ++i1;
    double acc = 0.0, prev = 1.0;
    try {
        for (int i = i1; i >= 0; --i) {
            acc -= adaptive_simpson(integrand_h, hnodes[i], prev, 1e-10, 44);
            if (!std::isfinite(acc)) throw std::runtime_error("accumulated -inf");
            hvals[i] = acc;
            prev = hnodes[i];
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(
            std::string("entropy_density: quadrature diverges near 0 (A'(s)/s must stay "
                        "integrable against the construction, i.e. A' bounded near 0): ") +
            e.what());
    }
    acc = 0.0;
    prev = 1.0;
    for (std::size_t i = i1 + 1; i < hnodes.size(); ++i) {
        acc += adaptive_simpson(integrand_h, prev, hnodes[i], 1e-10, 44);
        hvals[i] = acc;
        prev = hnodes[i];
    }
    h_tab_ = MonotoneCubic(hnodes, hvals);

    // Phi by cumulative quadrature of the h table; Phi(0) = 0
    pv[0] = 0.0;
    acc = 0.0;
    prev = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        acc += adaptive_simpson([&](double s) { return h_tab_.eval(s); }, prev, nodes[i], 1e-8, 40);
        pv[i] = acc;
        prev = nodes[i];
    }
    phi_tab_ = MonotoneCubic(nodes, pv);
}

double EntropyDensity::h(double z) const {
    if (z <= 0.0) return -std::numeric_limits<double>::infinity();
    const double sh = model_.reg_shift();
    switch (model_.family()) {
        case DiffusionFamily::Linear:
            return (1.0 + sh) * std::log(z);
        case DiffusionFamily::PorousMedium: {
            double m = model_.exponent();
            return m / (m - 1.0) * (std::pow(z, m - 1.0) - 1.0) + sh * std::log(z);
        }
        default:
            return h_tab_.eval(z) + sh * std::log(z);
    }
}

double EntropyDensity::phi(double z) const {
    if (z <= 0.0) return 0.0;
    const double sh = model_.reg_shift();
    const double reg_part = sh * (z * std::log(z) - z);  // the shifted part of A' integrates to this
    switch (model_.family()) {
        case DiffusionFamily::Linear:
            return z * std::log(z) - z + reg_part;
        case DiffusionFamily::PorousMedium: {
            double m = model_.exponent();
            return (std::pow(z, m) - m * z) / (m - 1.0) + reg_part;
        }
        default:
            return phi_tab_.eval(z) + reg_part;
    }
}

EntropyDensity entropy_density(const DiffusionModel& model) { return EntropyDensity(model); }

// ---------------------------------------------------------------------------

CriticalityReport classify(const DiffusionModel& model, const Kernel& kernel, int dim) {
    if (kernel.dim() != dim) throw std::invalid_argument("classify: kernel dimension mismatch");
    const double m_star = kernel.critical_exponent().m_star;
    std::vector<double> logz, logrho, rho;
    for (int k = 2; k <= 8; ++k) {
        double z = std::pow(10.0, k);
        double r = model.A_prime(z) / std::pow(z, m_star - 1.0);
        rho.push_back(r);
        logz.push_back(k * std::log(10.0));
        logrho.push_back(std::log(std::max(r, 1e-300)));
    }
    // tail slope over the last three ladder points
    std::vector<double> tz(logz.end() - 3, logz.end()), tr(logrho.end() - 3, logrho.end());
    double mz = (tz[0] + tz[1] + tz[2]) / 3.0, mr = (tr[0] + tr[1] + tr[2]) / 3.0;
    double num = 0, den = 0;
    for (int i = 0; i < 3; ++i) {
        num += (tz[i] - mz) * (tr[i] - mr);
        den += (tz[i] - mz) * (tz[i] - mz);
    }
    double slope = num / den;
    double resid = 0.0;
    for (int i = 0; i < 3; ++i)
        resid = std::max(resid, std::fabs(tr[i] - mr - slope * (tz[i] - mz)));
    if (resid > 0.1 * (1.0 + std::fabs(slope) * (tz[2] - tz[0])))
        throw std::runtime_error("classify: indeterminate (oscillatory diffusivity ratio)");

    CriticalityReport rep;
    rep.tail_slope = slope;
    if (slope > 0.05)
        rep.label = Criticality::Subcritical;
    else if (slope < -0.05)
        rep.label = Criticality::Supercritical;
    else {
        rep.label = Criticality::Critical;
        rep.liminf_estimate = std::min({rho[rho.size() - 1], rho[rho.size() - 2], rho[rho.size() - 3]});
    }
    return rep;
}

CriticalMassResult critical_mass(const DiffusionModel& model, const Kernel& kernel, int dim) {
    CriticalMassResult res;
    auto ce = kernel.critical_exponent();
    if (ce.m_star != 1.0 || !ce.logarithmic) {
        res.reason =
            "critical mass requires m* = 1 (logarithmic kernel singularity); for m* > 1 see the "
            "degenerate-diffusion global regime";
        return res;
    }
    double c = kernel.log_strength();
    if (!(c > 0.0)) {
        res.reason = "kernel has no logarithmic singularity strength";
        return res;
    }
    CriticalityReport cls = classify(model, kernel, dim);
    if (cls.label != Criticality::Critical) {
        res.reason = cls.label == Criticality::Subcritical
                         ? "subcritical pair: entropy dominates, no finite critical mass"
                         : "supercritical pair: no critical-mass dichotomy";
        return res;
    }
    // limit of Phi(z) / (z log z)
    double limit;
    switch (model.family()) {
        case DiffusionFamily::Linear:
            limit = 1.0 + model.reg_shift();
            break;
        case DiffusionFamily::PorousMedium:
            res.reason = "Phi(z)/(z log z) diverges for porous-medium entropy; no finite critical mass";
            return res;
        default: {
            EntropyDensity ent(model);
            double l1 = ent.phi(1e6) / (1e6 * std::log(1e6));
            double l2 = ent.phi(1e7) / (1e7 * std::log(1e7));
            double l3 = ent.phi(1e8) / (1e8 * std::log(1e8));
            if (std::fabs(l3 - l2) + std::fabs(l2 - l1) > 0.05 * std::fabs(l3) + 1e-12) {
                res.reason = "entropy limit did not stabilize on the sample ladder";
                return res;
            }
            limit = l3;
        }
    }
    res.mass = 2.0 * dim * limit / c;
    return res;
}

DiffusionModel parse_diffusion_spec(const std::string& spec) {
    if (spec == "linear") return DiffusionModel::linear();
    if (spec.rfind("pme:m=", 0) == 0) return DiffusionModel::porous_medium(std::stod(spec.substr(6)));
    if (spec.rfind("custom:", 0) == 0) return DiffusionModel::custom(spec.substr(7));
    throw std::invalid_argument("diffusion: unknown spec '" + spec + "'");
}

}  // namespace aggrosim
