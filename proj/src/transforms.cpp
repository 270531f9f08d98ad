#include "fcslab/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "fcslab/summation.hpp"

namespace fcslab {
namespace detail {
namespace {

// FFTW plans are cached per (dims, sign). Planning is not thread-safe and is
// guarded; execution through fftw_execute_dft is re-entrant. Plans are built
// once on fftw_malloc'd scratch with FFTW_ESTIMATE (deterministic plan choice)
// and executed on equally aligned per-call buffers.
struct PlanKey {
    std::vector<int> dims;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (sign != o.sign) return sign < o.sign;
        return dims < o.dims;
    }
};

class PlanCache {
public:
    fftw_plan get(const GridSpec& grid, int sign) {
        PlanKey key{std::vector<int>(grid.dimension(), grid.points_per_axis()), sign};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        // Plans are created and executed out-of-place (execute_dft requires
        // matching in-placeness and alignment; all buffers come from
        // fftw_malloc).
        const std::size_t n = grid.point_count();
        fftw_complex* scratch_in = fftw_alloc_complex(n);
        fftw_complex* scratch_out = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft(grid.dimension(), key.dims.data(), scratch_in,
                                       scratch_out, sign, FFTW_ESTIMATE);
        fftw_free(scratch_in);
        fftw_free(scratch_out);
        if (!plan) throw Error("fftw planning failed");
        return plans_.emplace(std::move(key), plan).first->second;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(fftw_alloc_complex(n)) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

void run(const GridSpec& grid, int sign, std::span<const std::complex<double>> in,
         std::span<std::complex<double>> out) {
    const std::size_t n = grid.point_count();
    FftwBuffer a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a.data[i][0] = in[i].real();
        a.data[i][1] = in[i].imag();
    }
    fftw_execute_dft(plan_cache().get(grid, sign), a.data, b.data);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::complex<double>(b.data[i][0], b.data[i][1]);
    }
}

}  // namespace

void fft_forward_raw(const GridSpec& grid, std::span<const std::complex<double>> in,
                     std::span<std::complex<double>> out) {
    run(grid, FFTW_FORWARD, in, out);
}

void fft_backward_raw(const GridSpec& grid, std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) {
    run(grid, FFTW_BACKWARD, in, out);
}

namespace {

// Parity (-1)^(k_1+...+k_N) accounting for the -L/2 lattice offset. Wrapped
// index and signed frequency agree mod 2 because M is even.
double index_parity(const GridSpec& grid, std::size_t flat) {
    int sum = 0;
    const std::size_t m = static_cast<std::size_t>(grid.points_per_axis());
    for (int d = 0; d < grid.dimension(); ++d) {
        sum += static_cast<int>(flat % m);
        flat /= m;
    }
    return (sum & 1) ? -1.0 : 1.0;
}

}  // namespace
}  // namespace detail

SpectralField forward_transform(const Field& u) {
    const GridSpec& grid = u.grid();
    const std::size_t n = grid.point_count();
    std::vector<std::complex<double>> in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = u[i];
    detail::fft_forward_raw(grid, in, out);
    const double hn = grid.cell_volume();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] *= hn * detail::index_parity(grid, i);
    }
    return SpectralField(grid, std::move(out));
}

Field inverse_transform(const SpectralField& v) {
    const GridSpec& grid = v.grid();
    const std::size_t n = grid.point_count();
    const double ln = std::pow(grid.box_length(), grid.dimension());
    std::vector<std::complex<double>> in(n), out(n);
    auto coeffs = v.coefficients();
    for (std::size_t i = 0; i < n; ++i) {
        in[i] = coeffs[i] * (detail::index_parity(grid, i) / ln);
    }
    detail::fft_backward_raw(grid, in, out);

    double max_abs = 0.0, max_imag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_abs = std::max(max_abs, std::abs(out[i]));
        max_imag = std::max(max_imag, std::abs(out[i].imag()));
    }
    if (max_abs > 0.0 && max_imag > 1e-10 * max_abs) {
        throw NonHermitianInput(
            "inverse_transform: reconstruction has a non-negligible imaginary part");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = out[i].real();
    return Field::from_values(grid, std::move(values));
}

double integrate_power(const Field& u, double p) {
    if (!std::isfinite(p) || p < 1.0) {
        throw DomainError("integrate_power: need finite p >= 1");
    }
    CompensatedSum acc;
    if (p == 2.0) {
        for (double v : u.values()) acc.add(v * v);
    } else {
        for (double v : u.values()) acc.add(std::pow(std::abs(v), p));
    }
    return u.grid().cell_volume() * acc.value();
}

}  // namespace fcslab
