#include "aggrosim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aggrosim {

void StepperConfig::validate() const {
    if (!(cfl_advect > 0 && cfl_advect <= 1)) throw std::invalid_argument("stepper: cfl_advect in (0,1]");
    if (!(diff_theta >= 0.5 && diff_theta <= 1.0))
        throw std::invalid_argument("stepper: diff_theta in [1/2,1]");
    if (!(dt_min < dt_max)) throw std::invalid_argument("stepper: dt_min must be < dt_max");
    if (picard_sweeps < 1) throw std::invalid_argument("stepper: picard_sweeps >= 1");
}

double effective_diffusion_exponent(const DiffusionModel& model, double m_star) {
    double m_model;
    switch (model.family()) {
        case DiffusionFamily::Linear:
            m_model = 1.0;
            break;
        case DiffusionFamily::PorousMedium:
            m_model = model.exponent();
            break;
        default: {
            // tail fit of log A' against log z
            double z1 = 1e6, z2 = 1e8;
            double s = (std::log(model.A_prime(z2)) - std::log(model.A_prime(z1))) /
                       (std::log(z2) - std::log(z1));
            m_model = 1.0 + std::max(0.0, s);
        }
    }
    return std::clamp(std::min(m_model, m_star), 1.0, m_star);
}

Stepper::Stepper(const GridSpec& grid, const ChemoModel& chemo, const DiffusionModel& diffusion,
                 const StepperConfig& cfg)
    : grid_(grid),
      chemo_(chemo, grid, cfg.elliptic_tol),
      diffusion_(diffusion),
      entropy_(diffusion),
      cfg_(cfg) {
    cfg_.validate();
    grid_.validate();
    const std::size_t total = grid_.cell_count();
    for (int ax = 0; ax < grid_.dim; ++ax) {
        flux_[ax].assign(total, 0.0);
        Dface_[ax].assign(total, 0.0);
    }
    scale_.assign(total, 1.0);
    rhs_.assign(total, 0.0);
    wbuf_.assign(total, 0.0);
    cg_r_.assign(total, 0.0);
    cg_z_.assign(total, 0.0);
    cg_p_.assign(total, 0.0);
    cg_ap_.assign(total, 0.0);
    diag_.assign(total, 0.0);

    double m_star = 1.0;
    if (chemo.is_convolution()) m_star = chemo.kernel().critical_exponent().m_star;
    else m_star = 2.0 - 2.0 / grid.dim;  // variable-coefficient convention
    if (cfg_.blowup_lp > 0)
        guard_p_ = cfg_.blowup_lp;
    else {
        double m = effective_diffusion_exponent(diffusion_, m_star);
        guard_p_ = std::max(1.0, 2.0 * (2.0 - m) / (2.0 - m_star));
    }

    // outer 5% ring of the box
    const int n = grid_.cells_per_axis;
    const int ring = std::max(1, static_cast<int>(std::ceil(0.05 * n)));
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    auto in_ring = [&](int c) { return c < ring || c >= n - ring; };
    if (grid_.dim == 2) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (in_ring(i) || in_ring(j)) ring_cells_.push_back(i + static_cast<std::size_t>(n) * j);
    } else {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    if (in_ring(i) || in_ring(j) || in_ring(k))
                        ring_cells_.push_back(i + static_cast<std::size_t>(n) * j + nn * k);
    }
}

void Stepper::set_initial_scales(const ScalarField& u0) { linf0_ = max_abs(u0); }

double Stepper::adapt_dt(const SimState& state, const VectorField& v) const {
    double vmax = 0.0;
    for (int ax = 0; ax < grid_.dim; ++ax)
        for (double f : v.component[ax]) vmax = std::max(vmax, std::fabs(f));
    const double h = grid_.spacing();
    double dt = cfg_.dt_max;
    if (vmax > 0) dt = std::min(dt, cfg_.cfl_advect * h / vmax);
    if (cfg_.diff_theta < 1.0) {
        double dmax = 0.0;
        for (double u : state.u.values) dmax = std::max(dmax, diffusion_.A_prime(u));
        if (dmax > 0)
            dt = std::min(dt, h * h / (2.0 * grid_.dim * (1.0 - cfg_.diff_theta) * dmax));
    }
    return std::max(dt, cfg_.dt_min);
}

void Stepper::advect(ScalarField& u, const VectorField& v, double dt) {
    const int n = grid_.cells_per_axis;
    const double h = grid_.spacing();
    const std::size_t total = u.values.size();
    const std::ptrdiff_t stride[3] = {1, n, static_cast<std::ptrdiff_t>(n) * n};

    // upwind face fluxes (flux_[ax][id] lives on the face id -> id+stride)
    for (int ax = 0; ax < grid_.dim; ++ax) {
        const auto& vel = v.component[ax];
        auto& F = flux_[ax];
        for (std::size_t id = 0; id < total; ++id) {
            double w = vel[id];
            if (w == 0.0) {
                F[id] = 0.0;
                continue;
            }
            F[id] = w > 0 ? w * u.values[id] : w * u.values[id + stride[ax]];
        }
    }
    // positivity limiter: scale every donor cell's outgoing fluxes so the cell
    // cannot be drained below zero within this step
    const double lam = dt / h;
    std::fill(scale_.begin(), scale_.end(), 1.0);
    int ix[3] = {0, 0, 0};
    for (std::size_t id = 0; id < total; ++id) {
        double outflow = 0.0;
        for (int ax = 0; ax < grid_.dim; ++ax) {
            double fup = flux_[ax][id];
            if (fup > 0) outflow += fup;
            if (ix[ax] > 0) {
                double fdn = flux_[ax][id - stride[ax]];
                if (fdn < 0) outflow -= fdn;
            }
        }
        outflow *= lam;
        if (outflow > u.values[id] && outflow > 0.0)
            scale_[id] = u.values[id] / outflow * (1.0 - 1e-12);
        ++ix[0];
        for (int ax = 0; ax < grid_.dim - 1 && ix[ax] == n; ++ax) {
            ix[ax] = 0;
            ++ix[ax + 1];
        }
    }
    for (int ax = 0; ax < grid_.dim; ++ax) {
        auto& F = flux_[ax];
        for (std::size_t id = 0; id < total; ++id) {
            if (F[id] == 0.0) continue;
            std::size_t donor = F[id] > 0 ? id : id + stride[ax];
            F[id] *= scale_[donor];
        }
    }
    // conservative update
    ix[0] = ix[1] = ix[2] = 0;
    for (std::size_t id = 0; id < total; ++id) {
        double div = 0.0;
        for (int ax = 0; ax < grid_.dim; ++ax) {
            div += flux_[ax][id];
            if (ix[ax] > 0) div -= flux_[ax][id - stride[ax]];
        }
        u.values[id] -= lam * div;
        ++ix[0];
        for (int ax = 0; ax < grid_.dim - 1 && ix[ax] == n; ++ax) {
            ix[ax] = 0;
            ++ix[ax + 1];
        }
    }
}

void Stepper::apply_diffusion(const std::vector<double>& w,
                              const std::array<std::vector<double>, 3>& D,
                              std::vector<double>& out) const {
    const int n = grid_.cells_per_axis;
    const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
    const std::ptrdiff_t stride[3] = {1, n, static_cast<std::ptrdiff_t>(n) * n};
    const std::size_t total = w.size();
    int ix[3] = {0, 0, 0};
    for (std::size_t id = 0; id < total; ++id) {
        double acc = 0.0;
        for (int ax = 0; ax < grid_.dim; ++ax) {
            if (ix[ax] + 1 < n) acc += D[ax][id] * (w[id + stride[ax]] - w[id]);
            if (ix[ax] > 0) acc -= D[ax][id - stride[ax]] * (w[id] - w[id - stride[ax]]);
        }
        out[id] = acc * ih2;
        ++ix[0];
        for (int ax = 0; ax < grid_.dim - 1 && ix[ax] == n; ++ax) {
            ix[ax] = 0;
            ++ix[ax + 1];
        }
    }
}

void Stepper::cg_solve(const std::vector<double>& rhs, const std::array<std::vector<double>, 3>& D,
                       double dt_theta, std::vector<double>& w) {
    const int n = grid_.cells_per_axis;
    const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
    const std::ptrdiff_t stride[3] = {1, n, static_cast<std::ptrdiff_t>(n) * n};
    const std::size_t total = rhs.size();

    // Jacobi diagonal of (I - dt*theta*L_D)
    int ix[3] = {0, 0, 0};
    for (std::size_t id = 0; id < total; ++id) {
        double dsum = 0.0;
        for (int ax = 0; ax < grid_.dim; ++ax) {
            if (ix[ax] + 1 < n) dsum += D[ax][id];
            if (ix[ax] > 0) dsum += D[ax][id - stride[ax]];
        }
        diag_[id] = 1.0 + dt_theta * dsum * ih2;
        ++ix[0];
        for (int ax = 0; ax < grid_.dim - 1 && ix[ax] == n; ++ax) {
            ix[ax] = 0;
            ++ix[ax + 1];
        }
    }

    auto apply_M = [&](const std::vector<double>& x, std::vector<double>& y) {
        apply_diffusion(x, D, y);
        for (std::size_t i = 0; i < total; ++i) y[i] = x[i] - dt_theta * y[i];
    };

    // start from the rhs (identity part dominates for small dt)
    w = rhs;
    apply_M(w, cg_ap_);
    double bnorm2 = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        cg_r_[i] = rhs[i] - cg_ap_[i];
        bnorm2 += rhs[i] * rhs[i];
    }
    if (bnorm2 == 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        return;
    }
    const double stop2 = bnorm2 * cfg_.cg_tol * cfg_.cg_tol;
    double rz = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        cg_z_[i] = cg_r_[i] / diag_[i];
        rz += cg_r_[i] * cg_z_[i];
    }
    cg_p_ = cg_z_;
    double rnorm2 = 0.0;
    for (std::size_t i = 0; i < total; ++i) rnorm2 += cg_r_[i] * cg_r_[i];
    for (int it = 0; it < 10000 && rnorm2 > stop2; ++it) {
        apply_M(cg_p_, cg_ap_);
        double pAp = 0.0;
        for (std::size_t i = 0; i < total; ++i) pAp += cg_p_[i] * cg_ap_[i];
        double alpha = rz / pAp;
        rnorm2 = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            w[i] += alpha * cg_p_[i];
            cg_r_[i] -= alpha * cg_ap_[i];
            rnorm2 += cg_r_[i] * cg_r_[i];
        }
        if (rnorm2 <= stop2) break;
        double rz_new = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            cg_z_[i] = cg_r_[i] / diag_[i];
            rz_new += cg_r_[i] * cg_z_[i];
        }
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < total; ++i) cg_p_[i] = cg_z_[i] + beta * cg_p_[i];
    }
    if (rnorm2 > stop2)
        throw std::runtime_error("diffusion solve: CG stalled, relative residual " +
                                 std::to_string(std::sqrt(rnorm2 / bnorm2)));
}

namespace {
// secant (chord) diffusivity of A across a face; reduces to A' in the
// coincidence limit and keeps degenerate fronts moving into vacuum
inline double chord_diffusivity(const DiffusionModel& A, double a, double b) {
    double lo = std::min(a, b), hi = std::max(a, b);
    if (hi - lo > 1e-12 * (std::fabs(hi) + 1e-300)) return (A.A(hi) - A.A(lo)) / (hi - lo);
    return A.A_prime(0.5 * (a + b));
}
}  // namespace

void Stepper::diffuse(ScalarField& u, double dt) {
    const int n = grid_.cells_per_axis;
    const std::size_t total = u.values.size();
    const std::ptrdiff_t stride[3] = {1, n, static_cast<std::ptrdiff_t>(n) * n};
    const double theta = cfg_.diff_theta;

    // rhs = u + dt (1-theta) L_A(u), flux form with direct A-differences
    if (theta < 1.0) {
        int ix[3] = {0, 0, 0};
        std::vector<double>& Lu = cg_ap_;
        const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
        for (std::size_t id = 0; id < total; ++id) {
            double acc = 0.0;
            for (int ax = 0; ax < grid_.dim; ++ax) {
                if (ix[ax] + 1 < n)
                    acc += diffusion_.A(u.values[id + stride[ax]]) - diffusion_.A(u.values[id]);
                if (ix[ax] > 0)
                    acc -= diffusion_.A(u.values[id]) - diffusion_.A(u.values[id - stride[ax]]);
            }
            Lu[id] = acc * ih2;
            ++ix[0];
            for (int ax = 0; ax < grid_.dim - 1 && ix[ax] == n; ++ax) {
                ix[ax] = 0;
                ++ix[ax + 1];
            }
        }
        for (std::size_t id = 0; id < total; ++id)
            rhs_[id] = u.values[id] + dt * (1.0 - theta) * Lu[id];
    } else {
        rhs_ = u.values;
    }

    const int sweeps = diffusion_.family() == DiffusionFamily::Linear ? 1 : cfg_.picard_sweeps;
    const std::vector<double>* iterate = &u.values;
    for (int s = 0; s < sweeps; ++s) {
        int ix[3] = {0, 0, 0};
        for (std::size_t id = 0; id < total; ++id) {
            for (int ax = 0; ax < grid_.dim; ++ax) {
                Dface_[ax][id] = (ix[ax] + 1 < n)
                                     ? chord_diffusivity(diffusion_, (*iterate)[id],
                                                         (*iterate)[id + stride[ax]])
                                     : 0.0;
            }
            ++ix[0];
            for (int ax = 0; ax < grid_.dim - 1 && ix[ax] == n; ++ax) {
                ix[ax] = 0;
                ++ix[ax + 1];
            }
        }
        cg_solve(rhs_, Dface_, dt * theta, wbuf_);
        iterate = &wbuf_;
    }

    // flux-form reconstruction makes the update mass-exact regardless of the
    // CG residual: u_new = rhs + dt*theta*L_D(w)
    apply_diffusion(wbuf_, Dface_, cg_ap_);
    for (std::size_t id = 0; id < total; ++id) u.values[id] = rhs_[id] + dt * theta * cg_ap_[id];
}

void Stepper::step(SimState& state, double dt_cap) {
    const double mass0 = integrate(state.u);
    const double guard0 = lp_norm(state.u, guard_p_);

    ScalarField c = chemo_.potential(state.u);
    VectorField v = grad_potential(c);
    double dt = adapt_dt(state, v);
    if (dt <= cfg_.dt_min * (1.0 + 1e-12) && dt_cap > cfg_.dt_min)
        throw BlowupSuspected("advective dt underflow at dt_min", state.t, max_abs(state.u));
    dt = std::min(dt, dt_cap);

    advect(state.u, v, dt);
    diffuse(state.u, dt);

    // positivity: the implicit M-matrix solve is nonnegative up to the CG
    // residual; clamp that dust and renormalize the mass it moved
    double clamped = 0.0;
    for (double& w : state.u.values)
        if (w < 0.0) {
            clamped -= w;
            w = 0.0;
        }
    double mass1 = integrate(state.u);
    double drift = std::fabs(mass1 - mass0) / std::max(mass0, 1e-300);
    if (mass0 > 0 && drift > 1e-12)
        throw std::runtime_error("step: per-step mass drift " + std::to_string(drift) +
                                 " exceeds 1e-12 (telescoping-flux integrity)");
    if (mass1 > 0) {
        double fix = mass0 / mass1;
        for (double& w : state.u.values) w *= fix;
    }

    state.c = std::move(c);
    state.t += dt;
    state.dt = dt;
    ++state.step_count;

    // blow-up and boundary monitors
    double linf = max_abs(state.u);
    if (linf0_ > 0 && linf > cfg_.blowup_linf_factor * linf0_)
        throw BlowupSuspected("sup-norm exceeded " + std::to_string(cfg_.blowup_linf_factor) +
                                  "x the initial peak",
                              state.t, linf);
    double guard1 = lp_norm(state.u, guard_p_);
    if (guard0 > 0 && guard1 > 2.0 * guard0)
        throw BlowupSuspected("guard norm doubled within one step", state.t, linf);
    double ring_mass = 0.0;
    for (std::size_t id : ring_cells_) ring_mass += state.u.values[id];
    ring_mass *= grid_.cell_volume();
    if (ring_mass > cfg_.boundary_mass_tol * mass0) throw BoundaryContact(state.t);
}

RunResult run(const ScalarField& initial, const ChemoModel& chemo, const DiffusionModel& diffusion,
              const StepperConfig& cfg, double t_end, int observe_every,
              const std::vector<double>& exact_observe_times, const std::vector<Observer>& observers) {
    if (!(t_end >= 0)) throw std::invalid_argument("run: t_end must be >= 0");
    if (min_value(initial) < 0) throw std::invalid_argument("run: initial data must be nonnegative");
    RunResult res;
    Stepper stepper(initial.grid, chemo, diffusion, cfg);
    stepper.set_initial_scales(initial);

    res.state.u = initial;
    res.state.t = 0.0;

    std::vector<double> targets(exact_observe_times);
    targets.push_back(t_end);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    auto observe = [&](SimState& st) {
        st.c = stepper.chemo_potential(st.u);
        DiagnosticsRecord rec = collect_diagnostics(st.t, st.u, st.c, stepper.entropy(),
                                                    stepper.diffusion(), stepper.guard_p());
        res.series.push_back(rec);
        for (const auto& ob : observers) ob(st, rec);
    };

    observe(res.state);
    if (t_end == 0.0) {
        res.series.clear();  // t_end = 0: initial state back, empty series
        return res;
    }

    std::size_t target_i = 0;
    const double t_eps = 1e-12 * std::max(1.0, t_end);
    while (res.state.t < t_end - t_eps) {
        while (target_i < targets.size() && targets[target_i] <= res.state.t + t_eps) ++target_i;
        double next_target = target_i < targets.size() ? targets[target_i] : t_end;
        try {
            stepper.step(res.state, next_target - res.state.t);
        } catch (const BlowupSuspected& b) {
            res.outcome = RunOutcome::Blowup;
            res.blowup_reason = b.reason_;
            res.t_detect = b.t_detect;
            observe(res.state);
            return res;
        }
        bool at_target = res.state.t >= next_target - t_eps;
        if (at_target || (observe_every > 0 && res.state.step_count % observe_every == 0))
            observe(res.state);
    }
    if (res.series.empty() || res.series.back().t < res.state.t - t_eps) observe(res.state);
    return res;
}

}  // namespace aggrosim
