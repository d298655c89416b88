// Command line front end: ingest -> features -> rank -> train -> evaluate /
// predict, plus synth and grid-search. Results go to stdout or --out; logs
// go to stderr. Exit codes: 0 success, 2 bad input, 3 internal failure.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vfdet/config.hpp"
#include "vfdet/errors.hpp"
#include "vfdet/eval.hpp"
#include "vfdet/feature_pipeline.hpp"
#include "vfdet/forest.hpp"
#include "vfdet/rng.hpp"
#include "vfdet/smote.hpp"
#include "vfdet/storage.hpp"
#include "vfdet/svm.hpp"
#include "vfdet/synth.hpp"
#include "vfdet/wfdb.hpp"

namespace {

using namespace vfdet;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> episode_length;
    unsigned jobs = 0;
    std::string format = "binary";
    std::string out;

    std::vector<std::string> inputs;
    std::string mask_path;
    std::string model_path;
    std::size_t synth_vf = 500;
    std::size_t synth_not_vf = 500;
    double synth_noise = 0.02;
};

void note(const std::string& msg) { std::cerr << "vfdet: " << msg << '\n'; }

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

PipelineConfig effective_config(const Options& opt) {
    PipelineConfig cfg;
    if (!opt.config_path.empty()) cfg = load_config(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.episode_length) cfg.episode_length_s = *opt.episode_length;
    cfg.validate();
    return cfg;
}

void require_hash(std::uint64_t artifact, std::uint64_t current, const std::string& what) {
    if (artifact == current) return;
    throw InputError(what + " was produced under a different configuration (its hash " +
                     hash_hex(artifact) + " vs current " + hash_hex(current) +
                     "); regenerate it or pass the matching --config");
}

void write_text_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    atomic_write(out_path, [&](std::ostream& out) { out << text; });
}

void log_class_counts(std::span<const EcgEpisode> episodes) {
    std::size_t vf = 0;
    for (const auto& ep : episodes) vf += ep.label == Rhythm::Vf;
    const double fraction =
        episodes.empty() ? 0.0 : static_cast<double>(vf) / static_cast<double>(episodes.size());
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu episodes (%zu VF, %zu NOT_VF, %.1f%% VF)",
                  episodes.size(), vf, episodes.size() - vf, 100.0 * fraction);
    note(buf);
}

void cmd_ingest(const Options& opt) {
    if (opt.inputs.empty()) throw InputError("ingest: no inputs");
    if (opt.out.empty()) throw InputError("ingest: --out is required");
    const PipelineConfig cfg = effective_config(opt);

    std::vector<EcgEpisode> episodes;
    std::size_t failures = 0;
    for (const auto& input : opt.inputs) {
        try {
            const std::filesystem::path path(input);
            if (path.extension() == ".hea") {
                const EcgRecord record = read_record(path);
                auto slices = extract_episodes(record, cfg.windowing());
                note(input + ": " + std::to_string(slices.size()) + " episodes");
                episodes.insert(episodes.end(), std::make_move_iterator(slices.begin()),
                                std::make_move_iterator(slices.end()));
            } else if (path.extension() == ".csv") {
                episodes.push_back(read_csv_episode(path));
            } else {
                throw InputError("unsupported input (expected .hea or .csv): " + input);
            }
        } catch (const Error& e) {
            ++failures;
            note(std::string("skipping ") + input + ": " + e.what());
        }
    }
    if (episodes.empty())
        throw InputError("ingest: no episodes produced (" + std::to_string(failures) +
                         " input(s) failed)");
    log_class_counts(episodes);

    const std::uint64_t hash = config_hash(cfg);
    if (opt.format == "csv")
        write_episode_cache_csv(opt.out, episodes, hash);
    else
        write_episode_cache(opt.out, episodes, hash);
    note("wrote " + opt.out);
}

void cmd_features(const Options& opt) {
    if (opt.inputs.size() != 1) throw InputError("features: need exactly one episode cache");
    if (opt.out.empty()) throw InputError("features: --out is required");
    const PipelineConfig cfg = effective_config(opt);
    const std::uint64_t hash = config_hash(cfg);

    const EpisodeCache cache = read_episode_cache(opt.inputs[0]);
    require_hash(cache.config_hash, hash, "episode cache " + opt.inputs[0]);

    const FeatureExtractionResult result = build_dataset(cache.episodes, cfg, opt.jobs);
    if (result.skipped)
        note(std::to_string(result.skipped) + " episode(s) skipped (not featurizable)");
    if (result.dataset.n_rows == 0) throw InputError("features: nothing featurized");
    note(std::to_string(result.dataset.n_rows) + " rows of dimension " +
         std::to_string(result.dataset.n_cols));

    if (opt.format == "csv") {
        write_feature_cache_csv(opt.out, result.dataset, hash);
        note("wrote " + opt.out + " (csv export; downstream stages read binary caches)");
    } else {
        write_feature_cache(opt.out, result.dataset, hash);
        note("wrote " + opt.out);
    }
}

void cmd_rank(const Options& opt) {
    if (opt.inputs.size() != 1) throw InputError("rank: need exactly one feature cache");
    if (opt.out.empty()) throw InputError("rank: --out is required");
    const PipelineConfig cfg = effective_config(opt);
    const std::uint64_t hash = config_hash(cfg);

    const FeatureCache cache = read_feature_cache(opt.inputs[0]);
    require_hash(cache.config_hash, hash, "feature cache " + opt.inputs[0]);

    const auto split = subsample_split(cache.data.labels, cfg.rank_vf_subsample,
                                       cfg.rank_not_vf_subsample, mix_seed(cfg.seed, 11));
    const Dataset train = cache.data.subset(split.train_indices);
    note("ranking forest trains on " + std::to_string(train.n_rows) + " rows");

    ForestConfig forest_cfg;
    forest_cfg.n_trees = cfg.rank_n_trees;
    forest_cfg.max_features_per_split = cfg.rank_max_features;
    forest_cfg.seed = mix_seed(cfg.seed, 12);
    forest_cfg.jobs = opt.jobs;
    const RandomForestModel forest = train_forest(train, forest_cfg);
    note("out-of-bag accuracy " + std::to_string(forest.oob_accuracy));

    const auto importances = feature_importances(forest);
    const FeatureMask mask = select_top_fraction(importances, cfg.feature_fraction);
    write_mask(opt.out, mask, hash);
    note("wrote " + opt.out + " (" + std::to_string(mask.selected_indices.size()) + " of " +
         std::to_string(mask.full_dim) + " features)");

    std::filesystem::path listing(opt.out);
    listing.replace_extension(".importances.csv");
    atomic_write(listing, [&](std::ostream& out) {
        out << "feature,importance,selected\n";
        out.precision(17);
        std::vector<char> selected(importances.size(), 0);
        for (std::size_t idx : mask.selected_indices) selected[idx] = 1;
        for (std::size_t f = 0; f < importances.size(); ++f)
            out << f << ',' << importances[f] << ',' << int(selected[f]) << '\n';
    });
    note("wrote " + listing.string());
}

FeatureMask load_mask_checked(const std::string& path, std::uint64_t current_hash) {
    if (path.empty()) return {};
    std::uint64_t mask_hash = 0;
    FeatureMask mask = read_mask(path, &mask_hash);
    require_hash(mask_hash, current_hash, "feature mask " + path);
    return mask;
}

void cmd_train(const Options& opt) {
    if (opt.inputs.size() != 1) throw InputError("train: need exactly one feature cache");
    if (opt.out.empty()) throw InputError("train: --out is required");
    const PipelineConfig cfg = effective_config(opt);
    const std::uint64_t hash = config_hash(cfg);

    const FeatureCache cache = read_feature_cache(opt.inputs[0]);
    require_hash(cache.config_hash, hash, "feature cache " + opt.inputs[0]);
    const FeatureMask mask = load_mask_checked(opt.mask_path, hash);

    Dataset data = mask.apply(cache.data);
    if (cfg.smote_enabled) {
        const std::size_t pos = data.count_label(+1);
        const int minority = 2 * pos <= data.n_rows ? +1 : -1;
        const std::size_t before = data.n_rows;
        SmoteConfig smote = cfg.smote();
        smote.seed = mix_seed(cfg.seed, 999);
        data = smote_balance(data, minority, smote);
        if (data.n_rows != before)
            note("smote added " + std::to_string(data.n_rows - before) + " synthetic rows");
    }

    SvmModel model = train_svm(data, cfg.svm());
    model.mask = mask;
    write_model(opt.out, model, hash, cfg.seed, serialize(cfg));
    note("wrote " + opt.out + " (" + std::to_string(model.n_sv) + " support vectors, C=" +
         std::to_string(model.c) + ", gamma=" + std::to_string(model.gamma) + ")");
}

void cmd_evaluate(const Options& opt) {
    if (opt.inputs.size() != 1) throw InputError("evaluate: need exactly one feature cache");
    const PipelineConfig cfg = effective_config(opt);
    const std::uint64_t hash = config_hash(cfg);

    const FeatureCache cache = read_feature_cache(opt.inputs[0]);
    require_hash(cache.config_hash, hash, "feature cache " + opt.inputs[0]);
    const FeatureMask mask = load_mask_checked(opt.mask_path, hash);
    const Dataset data = mask.apply(cache.data);

    CrossValidationConfig cv;
    cv.k = cfg.cv_folds;
    cv.stratified = cfg.cv_stratified;
    cv.seed = cfg.seed;
    cv.jobs = opt.jobs;
    cv.smote_enabled = cfg.smote_enabled;
    cv.smote_within_folds = cfg.smote_within_folds;
    cv.smote = cfg.smote();
    cv.svm = cfg.svm();

    EvalReport report = run_cross_validation(data, cv);
    report.config_snapshot = serialize(cfg);

    const std::string text =
        format_report(report) + "\n" + format_report_key_value(report);
    write_text_output(opt.out, text);
    if (!opt.out.empty()) note("wrote " + opt.out);
}

void cmd_predict(const Options& opt) {
    if (opt.inputs.size() != 1)
        throw InputError("predict: need exactly one episode or feature cache");
    if (opt.model_path.empty()) throw InputError("predict: --model is required");
    const PipelineConfig cfg = effective_config(opt);
    const std::uint64_t hash = config_hash(cfg);

    const ModelFile model_file = read_model(opt.model_path);
    require_hash(model_file.config_hash, hash, "model " + opt.model_path);

    Dataset rows;
    if (is_episode_cache(opt.inputs[0])) {
        const EpisodeCache cache = read_episode_cache(opt.inputs[0]);
        require_hash(cache.config_hash, hash, "episode cache " + opt.inputs[0]);
        FeatureExtractionResult result = build_dataset(cache.episodes, cfg, opt.jobs);
        if (result.skipped)
            note(std::to_string(result.skipped) + " episode(s) skipped (not featurizable)");
        rows = std::move(result.dataset);
    } else if (is_feature_cache(opt.inputs[0])) {
        FeatureCache cache = read_feature_cache(opt.inputs[0]);
        require_hash(cache.config_hash, hash, "feature cache " + opt.inputs[0]);
        rows = std::move(cache.data);
    } else {
        throw InputError("predict: " + opt.inputs[0] + " is neither an episode nor a feature cache");
    }

    std::ostringstream out;
    out << "source,label,decision_value\n";
    out.precision(10);
    for (std::size_t i = 0; i < rows.n_rows; ++i) {
        const SvmPrediction p = predict(model_file.model, rows.row(i));
        out << (i < rows.sources.size() ? rows.sources[i] : std::string{}) << ','
            << (p.label == +1 ? "VF" : "NOT_VF") << ',' << p.decision_value << '\n';
    }
    write_text_output(opt.out, out.str());
    if (!opt.out.empty()) note("wrote " + opt.out);
}

void cmd_synth(const Options& opt) {
    if (opt.out.empty()) throw InputError("synth: --out is required");
    const PipelineConfig cfg = effective_config(opt);

    SynthConfig synth_cfg;
    synth_cfg.sampling_rate_hz = cfg.sampling_rate_hz;
    synth_cfg.episode_length_s = cfg.episode_length_s;
    synth_cfg.noise_sigma = opt.synth_noise;
    const auto episodes = synth_corpus(opt.synth_vf, opt.synth_not_vf, synth_cfg, cfg.seed);
    log_class_counts(episodes);

    const std::uint64_t hash = config_hash(cfg);
    if (opt.format == "csv")
        write_episode_cache_csv(opt.out, episodes, hash);
    else
        write_episode_cache(opt.out, episodes, hash);
    note("wrote " + opt.out);
}

void cmd_grid_search(const Options& opt) {
    if (opt.inputs.size() != 1) throw InputError("grid-search: need exactly one feature cache");
    const PipelineConfig cfg = effective_config(opt);
    const std::uint64_t hash = config_hash(cfg);

    const FeatureCache cache = read_feature_cache(opt.inputs[0]);
    require_hash(cache.config_hash, hash, "feature cache " + opt.inputs[0]);
    const FeatureMask mask = load_mask_checked(opt.mask_path, hash);
    const Dataset data = mask.apply(cache.data);

    const auto split = subsample_split(data.labels, cfg.rank_vf_subsample,
                                       cfg.rank_not_vf_subsample, mix_seed(cfg.seed, 21));
    const Dataset train = data.subset(split.train_indices);
    const Dataset validation = data.subset(split.validation_indices);
    note("grid search trains on " + std::to_string(train.n_rows) + " rows, validates on " +
         std::to_string(validation.n_rows));

    GridSearchSpec spec = cfg.grid();
    spec.jobs = opt.jobs;
    const GridSearchResult result = grid_search(train, validation, spec);

    std::ostringstream out;
    out << "c,gamma,sensitivity,specificity,accuracy,g_mean\n";
    out.precision(10);
    for (const auto& p : result.points)
        out << p.c << ',' << p.gamma << ',' << p.sensitivity << ',' << p.specificity << ','
            << p.accuracy << ',' << p.g_mean << '\n';
    write_text_output(opt.out, out.str());
    note("best c=" + std::to_string(result.best_c) +
         " gamma=" + std::to_string(result.best_gamma));
    if (!opt.out.empty()) note("wrote " + opt.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ventricular fibrillation detection pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config_path, "pipeline config file (key = value lines)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
    double episode_length_value = 0.0;
    auto* len_opt = app.add_option("--episode-length", episode_length_value,
                                   "override episode length in seconds");
    app.add_option("--jobs", opt.jobs, "worker threads (0 = all cores)");

    auto add_common = [&](CLI::App* cmd, bool with_format) {
        cmd->add_option("--out", opt.out, "output path");
        if (with_format)
            cmd->add_option("--format", opt.format, "cache format")
                ->check(CLI::IsMember({"csv", "binary"}));
    };

    auto* ingest = app.add_subcommand("ingest", "slice records into labeled episodes");
    ingest->add_option("inputs", opt.inputs, "record headers (.hea) or episode CSVs");
    add_common(ingest, true);

    auto* features = app.add_subcommand("features", "featurize an episode cache");
    features->add_option("inputs", opt.inputs, "episode cache");
    add_common(features, true);

    auto* rank = app.add_subcommand("rank", "rank features and write a mask");
    rank->add_option("inputs", opt.inputs, "feature cache");
    add_common(rank, false);

    auto* train = app.add_subcommand("train", "train the classifier");
    train->add_option("inputs", opt.inputs, "feature cache");
    train->add_option("--mask", opt.mask_path, "feature mask file");
    add_common(train, false);

    auto* evaluate = app.add_subcommand("evaluate", "k-fold cross validation report");
    evaluate->add_option("inputs", opt.inputs, "feature cache");
    evaluate->add_option("--mask", opt.mask_path, "feature mask file");
    add_common(evaluate, false);

    auto* predict_cmd = app.add_subcommand("predict", "apply a saved model");
    predict_cmd->add_option("inputs", opt.inputs, "episode or feature cache");
    predict_cmd->add_option("--model", opt.model_path, "model file");
    add_common(predict_cmd, false);

    auto* synth = app.add_subcommand("synth", "generate a synthetic episode corpus");
    synth->add_option("--vf", opt.synth_vf, "fibrillation-like episode count");
    synth->add_option("--not-vf", opt.synth_not_vf, "other episode count");
    synth->add_option("--noise", opt.synth_noise, "additive noise sigma (mV)");
    add_common(synth, true);

    auto* grid = app.add_subcommand("grid-search", "exhaustive (C, gamma) search");
    grid->add_option("inputs", opt.inputs, "feature cache");
    grid->add_option("--mask", opt.mask_path, "feature mask file");
    add_common(grid, false);

    try {
        app.parse(argc, argv);
        if (*seed_opt) opt.seed = seed_value;
        if (*len_opt) opt.episode_length = episode_length_value;

        if (*ingest) cmd_ingest(opt);
        if (*features) cmd_features(opt);
        if (*rank) cmd_rank(opt);
        if (*train) cmd_train(opt);
        if (*evaluate) cmd_evaluate(opt);
        if (*predict_cmd) cmd_predict(opt);
        if (*synth) cmd_synth(opt);
        if (*grid) cmd_grid_search(opt);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const vfdet::InputError& e) {
        note(std::string("error: ") + e.what());
        return 2;
    } catch (const std::exception& e) {
        note(std::string("internal error: ") + e.what());
        return 3;
    }
    return 0;
}
