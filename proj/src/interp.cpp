#include "aggrosim/interp.hpp"

#include <algorithm>
#include <cmath>

namespace aggrosim {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need >= 2 nodes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("MonotoneCubic: x not increasing");
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0)
            d_[i] = 0.0;
        else {
            double w1 = 2.0 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
            double w2 = (x_[i + 1] - x_[i]) + 2.0 * (x_[i] - x_[i - 1]);
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Fritsch-Carlson limiter
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            d_[i] = d_[i + 1] = 0.0;
            continue;
        }
        double a = d_[i] / delta[i], b = d_[i + 1] / delta[i];
        double s = a * a + b * b;
        if (s > 9.0) {
            double t = 3.0 / std::sqrt(s);
            d_[i] = t * a * delta[i];
            d_[i + 1] = t * b * delta[i];
        }
    }
}

int MonotoneCubic::interval(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    int i = static_cast<int>(it - x_.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

double MonotoneCubic::eval(double t) const {
    if (t <= x_.front()) return y_.front() + d_.front() * (t - x_.front());
    if (t >= x_.back()) return y_.back() + d_.back() * (t - x_.back());
    int i = interval(t);
    double h = x_[i + 1] - x_[i], s = (t - x_[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::deriv(double t) const {
    if (t <= x_.front()) return d_.front();
    if (t >= x_.back()) return d_.back();
    int i = interval(t);
    double h = x_[i + 1] - x_[i], s = (t - x_[i]) / h;
    double g00 = (6 * s * s - 6 * s) / h, g10 = 3 * s * s - 4 * s + 1;
    double g01 = (6 * s - 6 * s * s) / h, g11 = 3 * s * s - 2 * s;
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

double MonotoneCubic::second(double t) const {
    if (t <= x_.front() || t >= x_.back()) return 0.0;
    int i = interval(t);
    double h = x_[i + 1] - x_[i], s = (t - x_[i]) / h;
    double q00 = (12 * s - 6) / (h * h), q10 = (6 * s - 4) / h;
    double q01 = (6 - 12 * s) / (h * h), q11 = (6 * s - 2) / h;
    return q00 * y_[i] + q10 * d_[i] + q01 * y_[i + 1] + q11 * d_[i + 1];
}

}  // namespace aggrosim
