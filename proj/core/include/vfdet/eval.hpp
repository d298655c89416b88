#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfdet/dataset.hpp"
#include "vfdet/smote.hpp"
#include "vfdet/svm.hpp"

namespace vfdet {

// Positive class is fibrillation.
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    void count(int truth, int predicted);
};

// A zero denominator leaves the metric absent rather than reporting 0.
struct Metrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    std::optional<double> g_mean;
};

Metrics metrics(const ConfusionMatrix& cm);

struct FoldSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

// Seeded shuffle, then deal into k folds. Stratified dealing keeps per-class
// counts within one sample of each other across folds.
std::vector<FoldSplit> kfold_split(std::size_t n, std::size_t k, bool stratified,
                                   std::span<const int> labels, std::uint64_t seed);

struct CrossValidationConfig {
    std::size_t k = 10;
    bool stratified = true;
    std::uint64_t seed = 1;
    unsigned jobs = 0;

    bool smote_enabled = true;
    // Default matches the published procedure: balance the whole dataset,
    // then split. Enabling this moves synthesis inside each training fold.
    bool smote_within_folds = false;
    SmoteConfig smote;

    SvmTrainConfig svm;
};

struct MetricSummary {
    std::optional<double> mean;
    std::optional<double> stddev;  // population formula, divisor = fold count
    std::size_t defined_folds = 0;
};

struct EvalReport {
    std::vector<Metrics> test_folds;
    std::vector<Metrics> train_folds;
    std::vector<ConfusionMatrix> test_confusion;
    MetricSummary test_sensitivity, test_specificity, test_accuracy, test_g_mean;
    MetricSummary train_sensitivity, train_specificity, train_accuracy, train_g_mean;
    std::string config_snapshot;
};

// K-fold cross validation of the SVM on an already-featurized dataset.
EvalReport run_cross_validation(const Dataset& data, const CrossValidationConfig& cfg);

std::string format_report(const EvalReport& report);
std::string format_report_key_value(const EvalReport& report);

}  // namespace vfdet
