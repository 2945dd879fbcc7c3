#include "eit/gmres.hpp"

#include <cmath>
#include <stdexcept>

namespace eit {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

GmresResult gmres(std::size_t n,
                  const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                  const std::vector<double>& rhs,
                  std::vector<double>& x,
                  double tol,
                  int max_iter) {
    GmresResult res;
    if (rhs.size() != n) throw std::invalid_argument("gmres: rhs size mismatch");
    if (x.size() != n) x.assign(n, 0.0);

    const double bnorm = norm(rhs);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        res.converged = true;
        return res;
    }

    std::vector<double> r(n), w(n);
    apply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    const double beta = norm(r);
    if (beta / bnorm <= tol) {
        res.converged = true;
        res.relative_residual = beta / bnorm;
        return res;
    }

    std::vector<std::vector<double>> basis;
    basis.push_back(r);
    for (double& v : basis[0]) v /= beta;

    std::vector<std::vector<double>> hcols;  // rotated Hessenberg columns (upper triangular part)
    std::vector<double> cs, sn;
    std::vector<double> g{beta};

    auto finish = [&](int cols, double rel) {
        std::vector<double> y(static_cast<std::size_t>(cols), 0.0);
        for (int i = cols - 1; i >= 0; --i) {
            double sum = g[static_cast<std::size_t>(i)];
            for (int t = i + 1; t < cols; ++t)
                sum -= hcols[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(t)];
            const double hii = hcols[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(i)] = hii != 0.0 ? sum / hii : 0.0;
        }
        for (int i = 0; i < cols; ++i) {
            const double yi = y[static_cast<std::size_t>(i)];
            const auto& vi = basis[static_cast<std::size_t>(i)];
            for (std::size_t t = 0; t < n; ++t) x[t] += yi * vi[t];
        }
        res.iterations = cols;
        res.relative_residual = rel;
        res.converged = rel <= tol;
    };

    for (int j = 0; j < max_iter; ++j) {
        apply(basis[static_cast<std::size_t>(j)], w);
        std::vector<double> h(static_cast<std::size_t>(j) + 2, 0.0);
        for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
            h[static_cast<std::size_t>(i)] = dot(w, basis[static_cast<std::size_t>(i)]);
            const double hi = h[static_cast<std::size_t>(i)];
            const auto& vi = basis[static_cast<std::size_t>(i)];
            for (std::size_t t = 0; t < n; ++t) w[t] -= hi * vi[t];
        }
        const double hraw = norm(w);
        h[static_cast<std::size_t>(j) + 1] = hraw;

        for (int i = 0; i < j; ++i) {
            const double t = cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] +
                             sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1];
            h[static_cast<std::size_t>(i) + 1] = -sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] +
                                                 cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1];
            h[static_cast<std::size_t>(i)] = t;
        }
        const double denom = std::hypot(h[static_cast<std::size_t>(j)], h[static_cast<std::size_t>(j) + 1]);
        double c = 1.0, s = 0.0;
        if (denom > 0.0) {
            c = h[static_cast<std::size_t>(j)] / denom;
            s = h[static_cast<std::size_t>(j) + 1] / denom;
        }
        cs.push_back(c);
        sn.push_back(s);
        h[static_cast<std::size_t>(j)] = denom;
        h[static_cast<std::size_t>(j) + 1] = 0.0;
        hcols.push_back(std::move(h));
        g.push_back(-s * g[static_cast<std::size_t>(j)]);
        g[static_cast<std::size_t>(j)] *= c;

        const double rel = std::abs(g[static_cast<std::size_t>(j) + 1]) / bnorm;
        if (rel <= tol || hraw == 0.0 || j + 1 == max_iter) {
            finish(j + 1, rel);
            return res;
        }
        std::vector<double> vnext = w;
        for (double& v : vnext) v /= hraw;
        basis.push_back(std::move(vnext));
    }
    return res;
}

}  // namespace eit
