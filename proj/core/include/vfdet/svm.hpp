#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vfdet/dataset.hpp"
#include "vfdet/forest.hpp"

namespace vfdet {

struct SvmTrainConfig {
    double c = 100.0;
    double gamma = 45.0;
    double tolerance = 1e-3;
    std::size_t cache_mb = 256;  // kernel row cache budget
};

struct SvmModel {
    std::vector<double> support_vectors;  // row-major, n_sv x dim
    std::size_t n_sv = 0;
    std::size_t dim = 0;
    std::vector<double> dual_coefficients;  // alpha_i * y_i
    double bias = 0.0;
    double gamma = 0.0;
    double c = 0.0;
    FeatureMask mask;  // mask the model was trained under (identity if none)

    std::span<const double> support_vector(std::size_t i) const {
        return {support_vectors.data() + i * dim, dim};
    }
};

struct SvmPrediction {
    int label = +1;  // +1 = fibrillation
    double decision_value = 0.0;
};

double rbf_kernel(std::span<const double> x, std::span<const double> x2, double gamma);

// Soft-margin dual solved by sequential minimal optimization with
// second-order working-set selection. Deterministic given data order.
// `alphas_out`, when given, receives the full dual solution (one per row).
SvmModel train_svm(const Dataset& data, const SvmTrainConfig& cfg,
                   std::vector<double>* alphas_out = nullptr);

// `x` is either an already-masked vector of the model's dimension or a full
// feature row the embedded mask applies to.
SvmPrediction predict(const SvmModel& model, std::span<const double> x);

// Dual objective 1/2 a'Qa - sum(a), recomputed from scratch; used to compare
// against reference solvers.
double dual_objective(const Dataset& data, std::span<const double> alphas, double gamma);

enum class GridObjective { GMean, Accuracy };

struct GridSearchSpec {
    std::vector<double> c_values{1.0, 10.0, 100.0};
    std::vector<double> gamma_values{15.0, 30.0, 45.0, 60.0};
    GridObjective objective = GridObjective::GMean;
    double tolerance = 1e-3;
    std::size_t cache_mb = 64;  // per grid point, points train in parallel
    unsigned jobs = 0;
};

struct GridPointReport {
    double c = 0.0;
    double gamma = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double accuracy = 0.0;
    double g_mean = 0.0;
    double objective_value = 0.0;
};

struct GridSearchResult {
    double best_c = 0.0;
    double best_gamma = 0.0;
    std::vector<GridPointReport> points;  // row-major over (c, gamma)
};

GridSearchResult grid_search(const Dataset& train, const Dataset& validation,
                             const GridSearchSpec& spec);

// Per-class training subsample: the first n_vf/n_not_vf of each class after a
// seeded shuffle go to training, the rest to validation. Requests larger than
// class_count - 1 are clamped so validation keeps at least one sample.
struct TrainValidationSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> validation_indices;
};
TrainValidationSplit subsample_split(std::span<const int> labels, std::size_t n_vf,
                                     std::size_t n_not_vf, std::uint64_t seed);

}  // namespace vfdet
