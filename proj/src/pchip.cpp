#include "dynacc/pchip.hpp"

#include <algorithm>
#include <cmath>

#include "dynacc/util.hpp"

namespace dynacc {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    std::size_t n = x_.size();
    if (n == 0 || n != y_.size()) throw Error("MonotoneCubic: bad input sizes");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(x_[i] < x_[i + 1])) throw Error("MonotoneCubic: x must be strictly increasing");
    }
    slope_.assign(n, 0.0);
    if (n == 1) return;

    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    slope_[0] = d.front();
    slope_[n - 1] = d.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        double dkm1 = d[k - 1];
        double dk = d[k];
        if (dkm1 == 0.0 || dk == 0.0 || (dkm1 > 0) != (dk > 0)) {
            slope_[k] = 0.0;
        } else {
            // weighted harmonic mean; bounded by 3*min(|dkm1|,|dk|)
            double hkm1 = x_[k] - x_[k - 1];
            double hk = x_[k + 1] - x_[k];
            double w1 = 2.0 * hk + hkm1;
            double w2 = hk + 2.0 * hkm1;
            slope_[k] = (w1 + w2) / (w1 / dkm1 + w2 / dk);
        }
    }
}

double MonotoneCubic::operator()(double q) const {
    if (q <= x_.front()) return y_.front();
    if (q >= x_.back()) return y_.back();
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(x_.begin(), x_.end(), q) - x_.begin());
    std::size_t lo = hi - 1;
    double h = x_[hi] - x_[lo];
    double t = (q - x_[lo]) / h;
    double t2 = t * t;
    double t3 = t2 * t;
    double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    double h10 = t3 - 2.0 * t2 + t;
    double h01 = -2.0 * t3 + 3.0 * t2;
    double h11 = t3 - t2;
    return h00 * y_[lo] + h10 * h * slope_[lo] + h01 * y_[hi] + h11 * h * slope_[hi];
}

}  // namespace dynacc
