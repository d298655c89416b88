#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vfdet/emd.hpp"
#include "vfdet/episode.hpp"
#include "vfdet/eval.hpp"
#include "vfdet/filters.hpp"
#include "vfdet/smote.hpp"
#include "vfdet/svm.hpp"

namespace vfdet {

// Every knob of the pipeline in one flat structure. Serializes to a
// `key = value` text file; unknown keys are rejected when parsing.
struct PipelineConfig {
    double episode_length_s = 5.0;
    double hop_s = 1.0;
    std::size_t channel = 0;
    double vf_overlap_threshold = 0.5;
    double sampling_rate_hz = 250.0;

    int ma_order = 5;
    double hp_cutoff_hz = 1.0;
    int hp_order = 2;
    double lp_cutoff_hz = 20.0;
    int lp_order = 12;

    double emd_alpha = 0.05;
    double emd_beta = 0.02;
    int emd_max_imfs = 2;
    double emd_sift_sd_threshold = 0.2;
    int emd_max_sift_iterations = 100;
    bool emd_noise_level_from_abs_max = false;
    bool emd_invert_nlcr_branch = false;

    std::size_t rank_n_trees = 750;
    std::size_t rank_max_features = 0;  // 0 = round(sqrt(dim))
    double feature_fraction = 0.24;
    std::size_t rank_vf_subsample = 3000;
    std::size_t rank_not_vf_subsample = 5000;

    bool smote_enabled = true;
    std::size_t smote_k_neighbors = 5;
    double smote_target_ratio = 1.0;
    bool smote_within_folds = false;

    double svm_c = 100.0;
    double svm_gamma = 45.0;
    double svm_tolerance = 1e-3;
    std::size_t svm_cache_mb = 256;

    std::vector<double> grid_c_values{1.0, 10.0, 100.0};
    std::vector<double> grid_gamma_values{15.0, 30.0, 45.0, 60.0};
    GridObjective grid_objective = GridObjective::GMean;

    std::size_t cv_folds = 10;
    bool cv_stratified = true;

    std::uint64_t seed = 1;

    void validate() const;

    EpisodeWindowing windowing() const;
    FilterChainConfig filter_chain() const;
    EmdConfig emd() const;
    SmoteConfig smote() const;
    SvmTrainConfig svm() const;
    GridSearchSpec grid() const;
};

std::string serialize(const PipelineConfig& cfg);
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

// FNV-1a over the canonical serialization with the seed excluded, so caches
// survive seed overrides while any processing-parameter change invalidates
// them.
std::uint64_t config_hash(const PipelineConfig& cfg);

std::uint64_t fnv1a_hash(std::string_view bytes);

}  // namespace vfdet
