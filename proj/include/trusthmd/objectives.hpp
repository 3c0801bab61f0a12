#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trusthmd {

enum class LinearLoss { logistic, hinge };

/// Regularized empirical risk of a binary linear scorer s(x) = w·x + b over
/// targets in {-1, +1}:
///
///   logistic: (1/n) Σ log(1 + exp(-y s))     + (l2/2)‖w‖²
///   hinge:    (1/n) Σ max(0, 1 - y s)        + (l2/2)‖w‖²
///
/// The bias is not regularized. Parameters are packed as [w_0 .. w_{d-1}, b].
/// For hinge, gradient() returns the subgradient that takes 0 at the kink.
class LinearObjective {
public:
    LinearObjective(LinearLoss loss, double l2, std::vector<double> rows, std::vector<double> targets,
                    std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t num_params() const noexcept { return dim_ + 1; }
    std::size_t size() const noexcept { return targets_.size(); }

    double value(std::span<const double> params) const;
    void gradient(std::span<const double> params, std::span<double> grad) const;

    double score(std::span<const double> params, std::size_t i) const;

private:
    LinearLoss loss_;
    double l2_;
    std::vector<double> rows_;  // row-major n x dim
    std::vector<double> targets_;
    std::size_t dim_;
};

/// Numerically stable log(1 + exp(-z)).
double log1p_exp_neg(double z) noexcept;
double sigmoid(double z) noexcept;

}  // namespace trusthmd
