#include "eit/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace eit {

namespace {

std::mutex g_plan_mutex;  // fftw plan creation is not thread-safe

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t count = 0;

    ~PlanPair() {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

PlanPair& plans_for(int n) {
    thread_local std::map<int, std::unique_ptr<PlanPair>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto p = std::make_unique<PlanPair>();
        p->count = static_cast<std::size_t>(n) * n;
        {
            std::lock_guard<std::mutex> lock(g_plan_mutex);
            p->buf = fftw_alloc_complex(p->count);
            p->fwd = fftw_plan_dft_2d(n, n, p->buf, p->buf, FFTW_FORWARD, FFTW_ESTIMATE);
            p->bwd = fftw_plan_dft_2d(n, n, p->buf, p->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        if (!p->fwd || !p->bwd) throw std::runtime_error("fftw plan creation failed");
        it = cache.emplace(n, std::move(p)).first;
    }
    return *it->second;
}

}  // namespace

void fft2(std::vector<std::complex<double>>& data, int n, bool inverse) {
    PlanPair& pp = plans_for(n);
    if (data.size() != pp.count) throw std::invalid_argument("fft2: size mismatch");
    auto* buf = reinterpret_cast<std::complex<double>*>(pp.buf);
    std::copy(data.begin(), data.end(), buf);
    fftw_execute(inverse ? pp.bwd : pp.fwd);
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(pp.count);
        for (std::size_t i = 0; i < pp.count; ++i) data[i] = buf[i] * scale;
    } else {
        std::copy(buf, buf + pp.count, data.begin());
    }
}

void PaddedConvolution::apply(const std::vector<std::complex<double>>& field,
                              std::vector<std::complex<double>>& out) const {
    const int n = n_;
    const int n2 = 2 * n;
    const std::size_t total = static_cast<std::size_t>(n2) * n2;
    std::vector<std::complex<double>> work(total, std::complex<double>(0.0, 0.0));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            work[static_cast<std::size_t>(j) * n2 + i] = field[static_cast<std::size_t>(j) * n + i];
    fft2(work, n2, false);
    for (std::size_t i = 0; i < total; ++i) work[i] *= kernel_hat_[i];
    fft2(work, n2, true);
    out.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(j) * n + i] = work[static_cast<std::size_t>(j) * n2 + i];
}

void DualConvolution::apply(const std::vector<std::complex<double>>& field,
                            std::vector<std::complex<double>>& out_a,
                            std::vector<std::complex<double>>& out_b) const {
    const int n = n_;
    const int n2 = 2 * n;
    const std::size_t total = static_cast<std::size_t>(n2) * n2;
    std::vector<std::complex<double>> hat(total, std::complex<double>(0.0, 0.0));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            hat[static_cast<std::size_t>(j) * n2 + i] = field[static_cast<std::size_t>(j) * n + i];
    fft2(hat, n2, false);
    std::vector<std::complex<double>> work(total);
    out_a.resize(static_cast<std::size_t>(n) * n);
    out_b.resize(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < total; ++i) work[i] = hat[i] * kernel_a_[i];
    fft2(work, n2, true);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out_a[static_cast<std::size_t>(j) * n + i] = work[static_cast<std::size_t>(j) * n2 + i];
    for (std::size_t i = 0; i < total; ++i) work[i] = hat[i] * kernel_b_[i];
    fft2(work, n2, true);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out_b[static_cast<std::size_t>(j) * n + i] = work[static_cast<std::size_t>(j) * n2 + i];
}

}  // namespace eit
