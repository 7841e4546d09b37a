#include "aggrosim/chemo.hpp"

#include <algorithm>
#include <cmath>

#include "aggrosim/rng.hpp"

namespace aggrosim {

ChemoModel ChemoModel::convolution(const Kernel& k) {
    ChemoModel m;
    m.convolution_ = true;
    m.kernel_ = std::make_shared<Kernel>(k);
    return m;
}

ChemoModel ChemoModel::elliptic(ScalarField a, ScalarField gamma) {
    if (!(a.grid == gamma.grid)) throw std::invalid_argument("chemo: a and gamma grids differ");
    ChemoModel m;
    m.convolution_ = false;
    m.inf_a_ = min_value(a);
    m.inf_gamma_ = min_value(gamma);
    if (!(m.inf_a_ > 0)) throw std::invalid_argument("chemo: a(x) must be strictly positive");
    if (m.inf_gamma_ < 0) throw std::invalid_argument("chemo: gamma(x) must be non-negative");
    if (a.grid.dim == 2 && !(m.inf_gamma_ > 0))
        throw std::invalid_argument(
            "chemo: in d = 2 the elliptic model requires strictly positive gamma");
    m.a_ = std::move(a);
    m.gamma_ = std::move(gamma);
    return m;
}

const Kernel& ChemoModel::kernel() const {
    if (!convolution_) throw std::logic_error("chemo: not a convolution model");
    return *kernel_;
}

// ---------------------------------------------------------------------------
// Elliptic operator: cell-centered 5/7-point flux stencil with arithmetic-mean
// face coefficients and homogeneous Dirichlet walls (ghost = -interior).

namespace {

template <typename Body>
void for_each_cell(const GridSpec& g, Body body) {
    const int n = g.cells_per_axis;
    if (g.dim == 2) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) body(i, j, 0);
    } else {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) body(i, j, k);
    }
}

std::size_t flat(const GridSpec& g, int i, int j, int k) {
    std::size_t n = g.cells_per_axis;
    return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + (g.dim == 3 ? n * k : 0));
}

}  // namespace

ScalarField apply_elliptic_operator(const ChemoModel& model, const ScalarField& c) {
    const GridSpec& g = c.grid;
    const int n = g.cells_per_axis;
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    const auto& a = model.a().values;
    const auto& gam = model.gamma().values;
    ScalarField out(g);
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * static_cast<std::size_t>(n)};
    for_each_cell(g, [&](int i, int j, int k) {
        std::size_t id = flat(g, i, j, k);
        const int idx3[3] = {i, j, k};
        double v = gam[id] * c.values[id];
        for (int ax = 0; ax < g.dim; ++ax) {
            // + side
            if (idx3[ax] + 1 < n) {
                std::size_t nb = id + stride[ax];
                v += 0.5 * (a[id] + a[nb]) * (c.values[id] - c.values[nb]) * ih2;
            } else {
                v += 2.0 * a[id] * c.values[id] * ih2;
            }
            // - side
            if (idx3[ax] > 0) {
                std::size_t nb = id - stride[ax];
                v += 0.5 * (a[id] + a[nb]) * (c.values[id] - c.values[nb]) * ih2;
            } else {
                v += 2.0 * a[id] * c.values[id] * ih2;
            }
        }
        out.values[id] = v;
    });
    return out;
}

std::pair<ScalarField, EllipticSolveReport> solve_elliptic(const ChemoModel& model,
                                                           const ScalarField& f, double tol) {
    if (model.is_convolution()) throw std::logic_error("solve_elliptic: convolution model");
    if (!(tol > 1e-14 && tol < 1e-2)) throw std::invalid_argument("solve_elliptic: tol out of range");
    const GridSpec& g = f.grid;
    const int n = g.cells_per_axis;
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    const auto& a = model.a().values;
    const auto& gam = model.gamma().values;

    // Jacobi preconditioner
    std::vector<double> diag(f.values.size());
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * static_cast<std::size_t>(n)};
    for_each_cell(g, [&](int i, int j, int k) {
        std::size_t id = flat(g, i, j, k);
        const int idx3[3] = {i, j, k};
        double dsum = gam[id];
        for (int ax = 0; ax < g.dim; ++ax) {
            dsum += (idx3[ax] + 1 < n) ? 0.5 * (a[id] + a[id + stride[ax]]) * ih2 : 2.0 * a[id] * ih2;
            dsum += (idx3[ax] > 0) ? 0.5 * (a[id] + a[id - stride[ax]]) * ih2 : 2.0 * a[id] * ih2;
        }
        diag[id] = dsum;
    });

    ScalarField c(g);
    std::vector<double> r = f.values, z(r.size()), p(r.size()), Ap;
    double bnorm = 0.0;
    for (double v : r) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    EllipticSolveReport rep;
    rep.achieved_tolerance = tol;
    if (bnorm == 0.0) return {c, rep};

    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) rz += r[i] * z[i];
    const int max_iter = 20000;
    double rnorm = bnorm;
    for (int it = 0; it < max_iter; ++it) {
        ScalarField pf(g);
        pf.values = p;
        ScalarField Apf = apply_elliptic_operator(model, pf);
        double pAp = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) pAp += p[i] * Apf.values[i];
        double alpha = rz / pAp;
        rnorm = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            c.values[i] += alpha * p[i];
            r[i] -= alpha * Apf.values[i];
            rnorm += r[i] * r[i];
        }
        rnorm = std::sqrt(rnorm);
        rep.iterations = it + 1;
        rep.residual = rnorm / bnorm;
        if (rep.residual <= tol) return {c, rep};
        double rz_new = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            z[i] = r[i] / diag[i];
            rz_new += r[i] * z[i];
        }
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    throw std::runtime_error("solve_elliptic: no convergence, best relative residual " +
                             std::to_string(rep.residual));
}

// ---------------------------------------------------------------------------

ChemoSolver::ChemoSolver(const ChemoModel& model, const GridSpec& grid, double elliptic_tol)
    : model_(model), grid_(grid), tol_(elliptic_tol) {
    if (model_.is_convolution() && !model_.kernel().is_zero()) {
        ScalarField table = sample_on_grid(model_.kernel(), grid_);
        conv_ = std::make_unique<FreeSpaceConvolver>(table, grid_);
    }
    if (!model_.is_convolution() && !(model_.a().grid == grid))
        throw std::invalid_argument("chemo: coefficient fields not on the run grid");
}

ScalarField ChemoSolver::potential(const ScalarField& u, EllipticSolveReport* report) const {
    if (model_.is_convolution()) {
        if (!conv_) return ScalarField(u.grid);  // zero kernel
        return conv_->apply(u);
    }
    auto [c, rep] = solve_elliptic(model_, u, tol_);
    if (report) *report = rep;
    return c;
}

ScalarField convolve_potential(const Kernel& kernel, const ScalarField& u) {
    if (kernel.is_zero()) return ScalarField(u.grid);
    ScalarField table = sample_on_grid(kernel, u.grid);
    FreeSpaceConvolver conv(table, u.grid);
    return conv.apply(u);
}

VectorField grad_potential(const ScalarField& c) {
    const GridSpec& g = c.grid;
    const int n = g.cells_per_axis;
    const double ih = 1.0 / g.spacing();
    VectorField v(g);
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * static_cast<std::size_t>(n)};
    for_each_cell(g, [&](int i, int j, int k) {
        std::size_t id = flat(g, i, j, k);
        const int idx3[3] = {i, j, k};
        for (int ax = 0; ax < g.dim; ++ax)
            v.component[ax][id] =
                (idx3[ax] + 1 < n) ? (c.values[id + stride[ax]] - c.values[id]) * ih : 0.0;
    });
    return v;
}

std::vector<ScalarField> cell_gradient(const ScalarField& c) {
    const GridSpec& g = c.grid;
    const int n = g.cells_per_axis;
    const double i2h = 0.5 / g.spacing();
    std::vector<ScalarField> out(g.dim, ScalarField(g));
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n) * static_cast<std::size_t>(n)};
    for_each_cell(g, [&](int i, int j, int k) {
        std::size_t id = flat(g, i, j, k);
        const int idx3[3] = {i, j, k};
        for (int ax = 0; ax < g.dim; ++ax) {
            double up = (idx3[ax] + 1 < n) ? c.values[id + stride[ax]] : c.values[id];
            double dn = (idx3[ax] > 0) ? c.values[id - stride[ax]] : c.values[id];
            double scale = (idx3[ax] + 1 < n && idx3[ax] > 0) ? i2h : 2.0 * i2h;
            out[ax].values[id] = (up - dn) * scale;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Randomized estimate checks

ScalarField random_bump_field(const GridSpec& grid, std::uint64_t seed, bool signed_amplitudes) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 1234567ULL);
    const double L = grid.half_width;
    int nb = rng.uniform_int(1, 5);
    struct Bump {
        double c[3], w, amp;
    };
    std::vector<Bump> bumps(nb);
    for (auto& b : bumps) {
        for (int ax = 0; ax < grid.dim; ++ax) b.c[ax] = rng.uniform(-L / 2, L / 2);
        b.w = rng.uniform(L / 16, L / 4);
        b.amp = rng.uniform(0.5, 2.0);
        if (signed_amplitudes && rng.uniform(0, 1) < 0.5) b.amp = -b.amp;
    }
    return sample_field(grid, [&](const double* x) {
        double v = 0.0;
        for (const auto& b : bumps) {
            double r2 = 0.0;
            for (int ax = 0; ax < grid.dim; ++ax) r2 += (x[ax] - b.c[ax]) * (x[ax] - b.c[ax]);
            v += b.amp * std::exp(-r2 / (2.0 * b.w * b.w));
        }
        return v;
    });
}

VerifyReport verify_lp_estimate(const ChemoModel& model, const GridSpec& grid, int trials, double p,
                                std::uint64_t seed_base) {
    VerifyReport rep;
    const bool inhomog = model.inf_gamma() > 0;
    if (!inhomog && grid.dim != 3)
        throw std::invalid_argument("verify_lp_estimate: gamma == 0 requires d = 3");
    if (!inhomog && !(p > 3.0)) throw std::invalid_argument("verify_lp_estimate: need p > d for gamma == 0");
    for (int t = 0; t < trials; ++t) {
        ScalarField f = random_bump_field(grid, seed_base + t);
        auto [c, srep] = solve_elliptic(model, f, 1e-10);
        VerifyTrial tr;
        tr.seed = static_cast<int>(seed_base) + t;
        if (inhomog) {
            tr.check = "elliptic_lp_inhomog";
            tr.lhs = lp_norm(c, p);
            tr.rhs = lp_norm(f, p) / model.inf_gamma();
            tr.ok = tr.lhs <= tr.rhs * 1.02;
        } else {
            tr.check = "elliptic_lp_homog";
            double q = 1.0 / (2.0 / grid.dim + 1.0 / p);
            tr.lhs = lp_norm(c, p);
            tr.rhs = lp_norm(f, q) / model.inf_a();
            tr.ok = std::isfinite(tr.lhs) && tr.lhs <= 100.0 * tr.rhs;  // boundedness only
        }
        rep.worst_ratio = std::max(rep.worst_ratio, tr.rhs > 0 ? tr.lhs / tr.rhs : 0.0);
        rep.all_ok = rep.all_ok && tr.ok;
        rep.trials.push_back(tr);
    }
    return rep;
}

VerifyReport verify_h1_stability(const ChemoModel& model, const GridSpec& grid, int trials,
                                 std::uint64_t seed_base) {
    VerifyReport rep;
    const int n = grid.cells_per_axis;
    const double h = grid.spacing();
    for (int t = 0; t < trials; ++t) {
        // random face field F, zero on wall faces
        VectorField F(grid);
        for (int ax = 0; ax < grid.dim; ++ax) {
            ScalarField comp = random_bump_field(grid, seed_base + 31 * t + 7 * ax + 1, true);
            F.component[ax] = comp.values;
        }
        const std::size_t stride[3] = {1, static_cast<std::size_t>(n),
                                       static_cast<std::size_t>(n) * static_cast<std::size_t>(n)};
        for_each_cell(grid, [&](int i, int j, int k) {
            const int idx3[3] = {i, j, k};
            for (int ax = 0; ax < grid.dim; ++ax)
                if (idx3[ax] + 1 >= n) F.component[ax][flat(grid, i, j, k)] = 0.0;
        });
        // f = div F
        ScalarField f(grid);
        for_each_cell(grid, [&](int i, int j, int k) {
            std::size_t id = flat(grid, i, j, k);
            const int idx3[3] = {i, j, k};
            double div = 0.0;
            for (int ax = 0; ax < grid.dim; ++ax) {
                double fp = F.component[ax][id];
                double fm = (idx3[ax] > 0) ? F.component[ax][id - stride[ax]] : 0.0;
                div += (fp - fm) / h;
            }
            f.values[id] = div;
        });
        auto [c, srep] = solve_elliptic(model, f, 1e-11);
        VectorField gc = grad_potential(c);
        double gnorm = 0.0, Fnorm = 0.0;
        for (int ax = 0; ax < grid.dim; ++ax)
            for (std::size_t id = 0; id < gc.component[ax].size(); ++id) {
                gnorm += gc.component[ax][id] * gc.component[ax][id];
                Fnorm += F.component[ax][id] * F.component[ax][id];
            }
        VerifyTrial tr;
        tr.check = "elliptic_h1_stability";
        tr.seed = static_cast<int>(seed_base) + t;
        tr.lhs = std::sqrt(gnorm * grid.cell_volume());
        tr.rhs = std::sqrt(Fnorm * grid.cell_volume()) / model.inf_a();
        tr.ok = tr.lhs <= tr.rhs * 1.01;
        rep.worst_ratio = std::max(rep.worst_ratio, tr.rhs > 0 ? tr.lhs / tr.rhs : 0.0);
        rep.all_ok = rep.all_ok && tr.ok;
        rep.trials.push_back(tr);
    }
    return rep;
}

ScalarField parse_coefficient_spec(const std::string& spec, const GridSpec& grid) {
    if (spec.rfind("const:", 0) == 0) {
        double v = std::stod(spec.substr(6));
        ScalarField f(grid);
        std::fill(f.values.begin(), f.values.end(), v);
        return f;
    }
    if (spec.rfind("expr:gauss(", 0) == 0) {
        std::size_t open = spec.find('('), close = spec.find(')');
        if (close == std::string::npos) throw std::invalid_argument("coefficient: missing ')' in " + spec);
        std::string args = spec.substr(open + 1, close - open - 1);
        std::size_t comma = args.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("coefficient: gauss needs two args");
        double amp = std::stod(args.substr(0, comma));
        double width = std::stod(args.substr(comma + 1));
        double base = 0.0;
        std::size_t plus = spec.find('+', close);
        if (plus != std::string::npos) base = std::stod(spec.substr(plus + 1));
        return sample_field(grid, [&](const double* x) {
            double r2 = 0.0;
            for (int ax = 0; ax < grid.dim; ++ax) r2 += x[ax] * x[ax];
            return amp * std::exp(-r2 / (width * width)) + base;
        });
    }
    throw std::invalid_argument("coefficient: unknown spec '" + spec + "'");
}

}  // namespace aggrosim
