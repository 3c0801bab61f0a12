#include <cmath>
#include <vector>

#include "trusthmd/learners.hpp"
#include "trusthmd/objectives.hpp"

namespace trusthmd {

namespace {

struct DescentResult {
    std::vector<double> params;
    bool converged = false;
    int iterations = 0;
};

// Full-batch (sub)gradient descent. Each iteration starts from the configured
// learning rate and halves it until the loss does not increase, so the loss
// sequence is non-increasing for any learning rate. Stops when the decrease
// falls below tolerance (converged) or max_iters is reached (not converged).
DescentResult descend(const LinearObjective& objective, const GradientParams& gp) {
    constexpr int kMaxHalvings = 60;
    DescentResult result;
    result.params.assign(objective.num_params(), 0.0);
    std::vector<double> grad(objective.num_params());
    std::vector<double> candidate(objective.num_params());
    double loss = objective.value(result.params);
    for (int it = 0; it < gp.max_iters; ++it) {
        result.iterations = it + 1;
        objective.gradient(result.params, grad);
        double step = gp.learning_rate;
        double next = loss;
        bool moved = false;
        for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
            for (std::size_t j = 0; j < candidate.size(); ++j) candidate[j] = result.params[j] - step * grad[j];
            next = objective.value(candidate);
            if (std::isfinite(next) && next <= loss) {
                moved = true;
                break;
            }
        }
        if (!moved) {
            // No non-increasing step exists along the (sub)gradient: stationary to machine precision.
            result.converged = true;
            break;
        }
        const double decrease = loss - next;
        result.params.swap(candidate);
        loss = next;
        if (decrease < gp.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace

TrainedLearner train_linear(const LearnerConfig& config, const Dataset& data) {
    const std::size_t d = data.dim();
    const std::size_t k = data.num_classes();
    const LinearLoss loss = config.kind == LearnerKind::logistic ? LinearLoss::logistic : LinearLoss::hinge;

    std::vector<double> rows;
    rows.reserve(data.size() * d);
    for (const Sample& s : data.samples()) rows.insert(rows.end(), s.features.begin(), s.features.end());

    const std::size_t n_rows = k == 2 ? 1 : k;
    LinearModel model;
    bool converged = true;
    int iterations = 0;
    for (std::size_t row = 0; row < n_rows; ++row) {
        const Label positive = k == 2 ? 1 : static_cast<Label>(row);
        std::vector<double> targets;
        targets.reserve(data.size());
        for (const Sample& s : data.samples()) targets.push_back(*s.label == positive ? 1.0 : -1.0);
        const LinearObjective objective(loss, config.gradient.l2, rows, std::move(targets), d);
        DescentResult fit = descend(objective, config.gradient);
        converged = converged && fit.converged;
        iterations = std::max(iterations, fit.iterations);
        model.bias.push_back(fit.params[d]);
        fit.params.pop_back();
        model.weights.push_back(std::move(fit.params));
    }
    return TrainedLearner(config.kind, k, d, std::move(model), converged, config.seed, iterations);
}

}  // namespace trusthmd
