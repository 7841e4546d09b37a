#include "aggrosim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

namespace aggrosim {

void GridSpec::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("grid: dim must be 2 or 3");
    if (!(half_width > 0)) throw std::invalid_argument("grid: half_width must be > 0");
    if (cells_per_axis < 16 || (cells_per_axis & (cells_per_axis - 1)) != 0)
        throw std::invalid_argument("grid: cells_per_axis must be a power of two >= 16");
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::fabs(v));
    return m;
}

double min_value(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f.values) m = std::min(m, v);
    return m;
}

double lp_norm(const ScalarField& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) return max_abs(f);
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::fabs(v), p);
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

double weak_lp_norm(const ScalarField& f, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("weak_lp_norm: p must be > 1");
    // Dyadic level ladder 2^j, j = -40..40, intersected with [min |f|>0, max |f|].
    // The dyadic sup under-estimates the true sup by at most a factor 2^{1/p}.
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : f.values) {
        double a = std::fabs(v);
        if (a > 0.0) lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (hi == 0.0) return 0.0;
    const double hd = f.grid.cell_volume();
    double best = 0.0;
    for (int j = -40; j <= 40; ++j) {
        double lam = std::ldexp(1.0, j);
        if (lam < lo || lam > hi) continue;
        std::size_t count = 0;
        for (double v : f.values)
            if (std::fabs(v) > lam) ++count;
        if (count == 0) continue;
        best = std::max(best, lam * std::pow(static_cast<double>(count) * hd, 1.0 / p));
    }
    return best;
}

double second_moment(const ScalarField& f) {
    const int n = f.grid.cells_per_axis;
    double s = 0.0;
    if (f.grid.dim == 2) {
        for (int j = 0; j < n; ++j) {
            double y = f.grid.center(j), y2 = y * y;
            for (int i = 0; i < n; ++i) {
                double x = f.grid.center(i);
                s += (x * x + y2) * f.values[f.idx(i, j)];
            }
        }
    } else {
        for (int k = 0; k < n; ++k) {
            double z = f.grid.center(k), z2 = z * z;
            for (int j = 0; j < n; ++j) {
                double y = f.grid.center(j), yz = y * y + z2;
                for (int i = 0; i < n; ++i) {
                    double x = f.grid.center(i);
                    s += (x * x + yz) * f.values[f.idx(i, j, k)];
                }
            }
        }
    }
    return s * f.grid.cell_volume();
}

double tail_norm(const ScalarField& f, double k, double q) {
    ScalarField g(f.grid);
    for (std::size_t c = 0; c < f.values.size(); ++c) g.values[c] = std::max(f.values[c] - k, 0.0);
    return lp_norm(g, q);
}

namespace {

// 1D overlap weights: row i lists (source cell p, overlap length) of the
// interval [a_i/lambda, b_i/lambda) against the source cells, clipped to the box.
struct OverlapRow {
    int first = 0;
    std::vector<double> w;
};

std::vector<OverlapRow> overlap_rows(const GridSpec& g, double lambda) {
    const int n = g.cells_per_axis;
    const double h = g.spacing(), L = g.half_width;
    std::vector<OverlapRow> rows(n);
    for (int i = 0; i < n; ++i) {
        double a = (-L + i * h) / lambda, b = (-L + (i + 1) * h) / lambda;
        a = std::max(a, -L);
        b = std::min(b, L);
        if (b <= a) continue;
        int p0 = std::clamp(static_cast<int>(std::floor((a + L) / h)), 0, n - 1);
        int p1 = std::clamp(static_cast<int>(std::floor((b + L) / h - 1e-14)), 0, n - 1);
        rows[i].first = p0;
        rows[i].w.resize(p1 - p0 + 1);
        for (int p = p0; p <= p1; ++p) {
            double ca = -L + p * h, cb = ca + h;
            rows[i].w[p - p0] = std::max(0.0, std::min(b, cb) - std::max(a, ca));
        }
    }
    return rows;
}

}  // namespace

ScalarField rescale_conservative(const ScalarField& f, double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("rescale: lambda must be > 0");
    const GridSpec& g = f.grid;
    const int n = g.cells_per_axis;
    const double h = g.spacing();
    auto rows = overlap_rows(g, lambda);
    ScalarField out(g);
    if (g.dim == 2) {
        // contract x then y
        std::vector<double> tmp(static_cast<std::size_t>(n) * n, 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const auto& r = rows[i];
                double s = 0.0;
                for (std::size_t t = 0; t < r.w.size(); ++t)
                    s += r.w[t] * f.values[f.idx(r.first + static_cast<int>(t), j)];
                tmp[i + static_cast<std::size_t>(n) * j] = s;
            }
        for (int j = 0; j < n; ++j) {
            const auto& r = rows[j];
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t t = 0; t < r.w.size(); ++t)
                    s += r.w[t] * tmp[i + static_cast<std::size_t>(n) * (r.first + static_cast<int>(t))];
                out.values[out.idx(i, j)] = s / (h * h);
            }
        }
    } else {
        std::size_t nn = static_cast<std::size_t>(n) * n;
        std::vector<double> t1(nn * n, 0.0), t2(nn * n, 0.0);
        auto at = [n](std::vector<double>& v, int i, int j, int k) -> double& {
            return v[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n) * k)];
        };
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const auto& r = rows[i];
                    double s = 0.0;
                    for (std::size_t t = 0; t < r.w.size(); ++t)
                        s += r.w[t] * f.values[f.idx(r.first + static_cast<int>(t), j, k)];
                    at(t1, i, j, k) = s;
                }
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const auto& r = rows[j];
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (std::size_t t = 0; t < r.w.size(); ++t)
                        s += r.w[t] * at(t1, i, r.first + static_cast<int>(t), k);
                    at(t2, i, j, k) = s;
                }
            }
        const double h3 = h * h * h;
        for (int k = 0; k < n; ++k) {
            const auto& r = rows[k];
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (std::size_t t = 0; t < r.w.size(); ++t)
                        s += r.w[t] * at(t2, i, j, r.first + static_cast<int>(t));
                    out.values[out.idx(i, j, k)] = s / h3;
                }
        }
    }
    return out;
}

ScalarField gaussian_field(const GridSpec& g, const std::vector<GaussianSpec>& bumps) {
    const double pre = g.dim / 2.0;
    return sample_field(g, [&](const double* x) {
        double v = 0.0;
        for (const auto& b : bumps) {
            double r2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                double dx = x[a] - b.center[a];
                r2 += dx * dx;
            }
            v += b.mass * std::pow(b.eps / M_PI, pre) * std::exp(-b.eps * r2);
        }
        return v;
    });
}

namespace {
void put_u32(FILE* fp, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, fp);
}
std::uint32_t get_u32(FILE* fp) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, fp) != 4) throw std::runtime_error("snapshot: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void write_snapshot(const ScalarField& f, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("snapshot: cannot open " + path);
    std::fwrite("AGGS", 1, 4, fp);
    put_u32(fp, 1u);
    put_u32(fp, static_cast<std::uint32_t>(f.grid.dim));
    put_u32(fp, static_cast<std::uint32_t>(f.grid.cells_per_axis));
    // doubles written in host order; this code targets little-endian hosts
    double L = f.grid.half_width;
    std::fwrite(&L, sizeof(double), 1, fp);
    std::fwrite(f.values.data(), sizeof(double), f.values.size(), fp);
    if (std::fclose(fp) != 0) throw std::runtime_error("snapshot: close failed for " + path);
}

ScalarField read_snapshot(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("snapshot: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, fp) != 4 || std::memcmp(magic, "AGGS", 4) != 0) {
        std::fclose(fp);
        throw std::runtime_error("snapshot: bad magic in " + path);
    }
    std::uint32_t version = get_u32(fp);
    if (version != 1) {
        std::fclose(fp);
        throw std::runtime_error("snapshot: unsupported version");
    }
    GridSpec g;
    g.dim = static_cast<int>(get_u32(fp));
    g.cells_per_axis = static_cast<int>(get_u32(fp));
    if (std::fread(&g.half_width, sizeof(double), 1, fp) != 1) {
        std::fclose(fp);
        throw std::runtime_error("snapshot: truncated header");
    }
    g.validate();
    ScalarField f(g);
    if (std::fread(f.values.data(), sizeof(double), f.values.size(), fp) != f.values.size()) {
        std::fclose(fp);
        throw std::runtime_error("snapshot: truncated data");
    }
    std::fclose(fp);
    return f;
}

}  // namespace aggrosim
