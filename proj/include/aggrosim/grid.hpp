#ifndef AGGROSIM_GRID_HPP
#define AGGROSIM_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aggrosim {

/** Uniform Cartesian grid on the truncated box [-L, L)^d, d in {2,3}.
 *
 * Cells are indexed per axis by i = 0..n-1 with centers x_i = -L + (i+1/2)h,
 * h = 2L/n. n must be a power of two (>= 16) so that free-space convolutions
 * can run on the doubled domain. Fields store cell averages in row-major
 * order with the x index fastest. */
struct GridSpec {
    int dim = 2;
    double half_width = 1.0;
    int cells_per_axis = 16;

    double spacing() const { return 2.0 * half_width / cells_per_axis; }
    std::size_t cell_count() const {
        std::size_t c = 1;
        for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(cells_per_axis);
        return c;
    }
    double center(int i) const { return -half_width + (i + 0.5) * spacing(); }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing();
        return v;
    }
    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

/** Cell-averaged scalar field on a GridSpec. */
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g) : grid(g), values(g.cell_count(), 0.0) {}

    double& operator()(int i, int j) { return values[idx(i, j)]; }
    double operator()(int i, int j) const { return values[idx(i, j)]; }
    double& operator()(int i, int j, int k) { return values[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return values[idx(i, j, k)]; }

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(grid.cells_per_axis) * static_cast<std::size_t>(j);
    }
    std::size_t idx(int i, int j, int k) const {
        std::size_t n = grid.cells_per_axis;
        return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + n * static_cast<std::size_t>(k));
    }
};

/** d face-normal component arrays. component[ax][cell] holds the value on the
 * face between this cell and its +ax neighbour; the last cell along ax holds
 * the wall face. Matches the integrator's staggering so that the discrete
 * divergence and face gradient are adjoint. */
struct VectorField {
    GridSpec grid;
    std::array<std::vector<double>, 3> component;

    VectorField() = default;
    explicit VectorField(const GridSpec& g) : grid(g) {
        for (int a = 0; a < g.dim; ++a) component[a].assign(g.cell_count(), 0.0);
    }
};

// Integral functionals (midpoint rule on cell averages).
double integrate(const ScalarField& f);
double lp_norm(const ScalarField& f, double p);
double weak_lp_norm(const ScalarField& f, double p);
double second_moment(const ScalarField& f);
double tail_norm(const ScalarField& f, double k, double q);
double min_value(const ScalarField& f);
double max_abs(const ScalarField& f);

/** Evaluates g(x) = lambda^{-d} f(x/lambda) in the finite-volume sense:
 * each target cell receives the exact box average of (the piecewise-constant
 * extension of) f over the preimage cell, zero outside the box. Mass is
 * preserved exactly for lambda <= 1; for lambda > 1 mass leaves through the
 * box edge if f has support outside [-L/lambda, L/lambda)^d. */
ScalarField rescale_conservative(const ScalarField& f, double lambda);

/** Builds a field by sampling fn at cell centers. fn receives a pointer to
 * dim coordinates. */
template <typename Fn>
ScalarField sample_field(const GridSpec& g, Fn&& fn) {
    ScalarField f(g);
    const int n = g.cells_per_axis;
    double x[3] = {0, 0, 0};
    if (g.dim == 2) {
        for (int j = 0; j < n; ++j) {
            x[1] = g.center(j);
            for (int i = 0; i < n; ++i) {
                x[0] = g.center(i);
                f.values[f.idx(i, j)] = fn(x);
            }
        }
    } else {
        for (int k = 0; k < n; ++k) {
            x[2] = g.center(k);
            for (int j = 0; j < n; ++j) {
                x[1] = g.center(j);
                for (int i = 0; i < n; ++i) {
                    x[0] = g.center(i);
                    f.values[f.idx(i, j, k)] = fn(x);
                }
            }
        }
    }
    return f;
}

/** One Gaussian bump of the initial-data grammar: mass * (eps/pi)^{d/2}
 * exp(-eps |x-center|^2). */
struct GaussianSpec {
    double mass = 1.0;
    std::array<double, 3> center = {0, 0, 0};
    double eps = 1.0;
};

ScalarField gaussian_field(const GridSpec& g, const std::vector<GaussianSpec>& bumps);

// "AGGS" snapshot format: magic 'AGGS', u32 version=1, u32 d, u32 n, f64 L,
// then n^d f64 values little-endian, row-major (x fastest). Bit-exact.
void write_snapshot(const ScalarField& f, const std::string& path);
ScalarField read_snapshot(const std::string& path);

}  // namespace aggrosim

#endif
