#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace eit {

/// In-place 2D complex FFT of an n x n row-major array (n a power of two).
/// Thread-safe: plans are cached per thread and size.  Unnormalized forward;
/// inverse carries the 1/n^2 factor.
void fft2(std::vector<std::complex<double>>& data, int n, bool inverse);

/// Exact (non-wrapping) discrete convolution of an n x n field with a kernel
/// given on the (2n) x (2n) displacement grid:
///
///   out(i,j) = sum_{p,q} kernel(i - p, j - q) * field(p, q)
///
/// Displacements a, b range over [-n, n); the caller supplies kernel samples
/// through a callable kernel(a, b).  The kernel transform is precomputed once.
class PaddedConvolution {
public:
    template <class KernelFn>
    PaddedConvolution(int n, KernelFn&& kernel) : n_(n), kernel_hat_(4 * static_cast<std::size_t>(n) * n) {
        const int n2 = 2 * n;
        for (int b = -n; b < n; ++b) {
            const int ib = (b + n2) % n2;
            for (int a = -n; a < n; ++a) {
                const int ia = (a + n2) % n2;
                kernel_hat_[static_cast<std::size_t>(ib) * n2 + ia] = kernel(a, b);
            }
        }
        fft2(kernel_hat_, n2, false);
    }

    int size() const { return n_; }

    /// field and out are n x n row-major; out may alias field.
    void apply(const std::vector<std::complex<double>>& field,
               std::vector<std::complex<double>>& out) const;

private:
    int n_;
    std::vector<std::complex<double>> kernel_hat_;
};

/// Two padded convolutions sharing one forward transform of the field; used
/// where a solver applies a kernel pair to the same field every iteration.
class DualConvolution {
public:
    template <class KernelA, class KernelB>
    DualConvolution(int n, KernelA&& ka, KernelB&& kb)
        : n_(n),
          kernel_a_(4 * static_cast<std::size_t>(n) * n),
          kernel_b_(4 * static_cast<std::size_t>(n) * n) {
        const int n2 = 2 * n;
        for (int b = -n; b < n; ++b) {
            const int ib = (b + n2) % n2;
            for (int a = -n; a < n; ++a) {
                const int ia = (a + n2) % n2;
                kernel_a_[static_cast<std::size_t>(ib) * n2 + ia] = ka(a, b);
                kernel_b_[static_cast<std::size_t>(ib) * n2 + ia] = kb(a, b);
            }
        }
        fft2(kernel_a_, n2, false);
        fft2(kernel_b_, n2, false);
    }

    void apply(const std::vector<std::complex<double>>& field,
               std::vector<std::complex<double>>& out_a,
               std::vector<std::complex<double>>& out_b) const;

private:
    int n_;
    std::vector<std::complex<double>> kernel_a_, kernel_b_;
};

}  // namespace eit
