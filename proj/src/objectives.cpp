#include "trusthmd/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "trusthmd/core.hpp"

namespace trusthmd {

double log1p_exp_neg(double z) noexcept {
    if (z > 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LinearObjective::LinearObjective(LinearLoss loss, double l2, std::vector<double> rows, std::vector<double> targets,
                                 std::size_t dim)
    : loss_(loss), l2_(l2), rows_(std::move(rows)), targets_(std::move(targets)), dim_(dim) {
    if (rows_.size() != targets_.size() * dim_) {
        throw Error("LinearObjective: design matrix does not match targets x dim");
    }
    if (targets_.empty()) {
        throw Error("LinearObjective: no rows");
    }
}

double LinearObjective::score(std::span<const double> params, std::size_t i) const {
    const double* row = rows_.data() + i * dim_;
    double s = params[dim_];
    for (std::size_t j = 0; j < dim_; ++j) s += params[j] * row[j];
    return s;
}

double LinearObjective::value(std::span<const double> params) const {
    double risk = 0.0;
    for (std::size_t i = 0; i < targets_.size(); ++i) {
        const double margin = targets_[i] * score(params, i);
        risk += loss_ == LinearLoss::logistic ? log1p_exp_neg(margin) : std::max(0.0, 1.0 - margin);
    }
    risk /= static_cast<double>(targets_.size());
    double norm2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) norm2 += params[j] * params[j];
    return risk + 0.5 * l2_ * norm2;
}

void LinearObjective::gradient(std::span<const double> params, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(targets_.size());
    for (std::size_t i = 0; i < targets_.size(); ++i) {
        const double y = targets_[i];
        const double margin = y * score(params, i);
        double coeff = 0.0;  // d loss_i / d score
        if (loss_ == LinearLoss::logistic) {
            coeff = -y * sigmoid(-margin);
        } else if (margin < 1.0) {
            coeff = -y;
        }
        if (coeff == 0.0) continue;
        const double* row = rows_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j) grad[j] += coeff * row[j];
        grad[dim_] += coeff;
    }
    for (std::size_t j = 0; j < dim_; ++j) grad[j] = grad[j] * inv_n + l2_ * params[j];
    grad[dim_] *= inv_n;
}

}  // namespace trusthmd
