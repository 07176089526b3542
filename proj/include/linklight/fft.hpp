#pragma once

// Thin wrapper over FFTW for in-place 2D complex transforms.

#include <complex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace linklight {

// data is row-major with ny rows of nx samples. sign: FFTW_FORWARD or
// FFTW_BACKWARD. The backward transform is scaled by 1/(nx*ny) so that
// forward followed by backward is the identity.
inline void fft2d(std::vector<std::complex<double>>& data, int nx, int ny, int sign) {
    if (static_cast<std::size_t>(nx) * ny != data.size())
        throw std::invalid_argument("fft2d: size mismatch");
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = fftw_plan_dft_2d(ny, nx, ptr, ptr, sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    if (sign == FFTW_BACKWARD) {
        const double scale = 1.0 / (static_cast<double>(nx) * ny);
        for (auto& v : data) v *= scale;
    }
}

// DFT frequency of bin m out of n, in cycles per sample.
inline double fft_freq(int m, int n) {
    return (m <= n / 2 ? m : m - n) / static_cast<double>(n);
}

}  // namespace linklight
