#include "aggrosim/convolution.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace aggrosim {

namespace {
// FFTW planning is not thread-safe; execution with separate buffers is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct FreeSpaceConvolver::Impl {
    GridSpec grid;
    int N = 0;               // doubled cells per axis
    std::size_t real_size = 0, cplx_size = 0;
    double* work = nullptr;          // (N)^d real scratch
    fftw_complex* khat = nullptr;    // transformed kernel table
    fftw_complex* uhat = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;

    ~Impl() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (work) fftw_free(work);
        if (khat) fftw_free(khat);
        if (uhat) fftw_free(uhat);
    }
};

FreeSpaceConvolver::FreeSpaceConvolver(const ScalarField& table, const GridSpec& grid)
    : impl_(std::make_unique<Impl>()) {
    grid.validate();
    const int n = grid.cells_per_axis, N = 2 * n, d = grid.dim;
    if (table.grid.cells_per_axis != N || table.grid.dim != d)
        throw std::invalid_argument("convolver: table is not on the doubled grid");
    impl_->grid = grid;
    impl_->N = N;
    impl_->real_size = table.values.size();
    impl_->cplx_size = (d == 2) ? static_cast<std::size_t>(N) * (N / 2 + 1)
                                : static_cast<std::size_t>(N) * N * (N / 2 + 1);
    impl_->work = fftw_alloc_real(impl_->real_size);
    impl_->khat = fftw_alloc_complex(impl_->cplx_size);
    impl_->uhat = fftw_alloc_complex(impl_->cplx_size);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (d == 2) {
            impl_->fwd = fftw_plan_dft_r2c_2d(N, N, impl_->work, impl_->uhat, FFTW_ESTIMATE);
            impl_->bwd = fftw_plan_dft_c2r_2d(N, N, impl_->uhat, impl_->work, FFTW_ESTIMATE);
        } else {
            impl_->fwd = fftw_plan_dft_r2c_3d(N, N, N, impl_->work, impl_->uhat, FFTW_ESTIMATE);
            impl_->bwd = fftw_plan_dft_c2r_3d(N, N, N, impl_->uhat, impl_->work, FFTW_ESTIMATE);
        }
    }
    // Transform the kernel table once. Note: FFTW r2c uses row-major with the
    // LAST index fastest, while fields store x fastest; both the table and u
    // are loaded with the same axis order, so the convolution is unaffected.
    std::memcpy(impl_->work, table.values.data(), impl_->real_size * sizeof(double));
    fftw_execute_dft_r2c(impl_->fwd, impl_->work, impl_->khat);
}

FreeSpaceConvolver::~FreeSpaceConvolver() = default;

ScalarField FreeSpaceConvolver::apply(const ScalarField& u) const {
    const GridSpec& g = impl_->grid;
    if (!(u.grid == g)) throw std::invalid_argument("convolver: field grid mismatch");
    const int n = g.cells_per_axis, N = impl_->N, d = g.dim;
    std::memset(impl_->work, 0, impl_->real_size * sizeof(double));
    if (d == 2) {
        for (int j = 0; j < n; ++j)
            std::memcpy(impl_->work + static_cast<std::size_t>(j) * N, u.values.data() + u.idx(0, j),
                        static_cast<std::size_t>(n) * sizeof(double));
    } else {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                std::memcpy(impl_->work + (static_cast<std::size_t>(k) * N + j) * N,
                            u.values.data() + u.idx(0, j, k), static_cast<std::size_t>(n) * sizeof(double));
    }
    fftw_execute_dft_r2c(impl_->fwd, impl_->work, impl_->uhat);
    const double scale = g.cell_volume() / static_cast<double>(impl_->real_size);
    for (std::size_t i = 0; i < impl_->cplx_size; ++i) {
        double ur = impl_->uhat[i][0], ui = impl_->uhat[i][1];
        double kr = impl_->khat[i][0], ki = impl_->khat[i][1];
        impl_->uhat[i][0] = (ur * kr - ui * ki) * scale;
        impl_->uhat[i][1] = (ur * ki + ui * kr) * scale;
    }
    fftw_execute_dft_c2r(impl_->bwd, impl_->uhat, impl_->work);
    ScalarField out(g);
    if (d == 2) {
        for (int j = 0; j < n; ++j)
            std::memcpy(out.values.data() + out.idx(0, j), impl_->work + static_cast<std::size_t>(j) * N,
                        static_cast<std::size_t>(n) * sizeof(double));
    } else {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                std::memcpy(out.values.data() + out.idx(0, j, k),
                            impl_->work + (static_cast<std::size_t>(k) * N + j) * N,
                            static_cast<std::size_t>(n) * sizeof(double));
    }
    return out;
}

}  // namespace aggrosim
