#include "vfdet/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vfdet/errors.hpp"

namespace vfdet {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt(v[i]);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        while (used < value.size() && std::isspace(static_cast<unsigned char>(value[used])))
            ++used;
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "' needs a number, got '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    const auto i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ParseError("key '" + key + "' needs an integer, got '" + value + "'");
    return i;
}

// Seeds use the full 64-bit range, which a double round trip would corrupt.
std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size() || value[0] == '-') throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "' needs an unsigned integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParseError("key '" + key + "' needs true or false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ParseError("key '" + key + "' needs a comma list");
    return out;
}

std::string serialize_impl(const PipelineConfig& c, bool include_seed) {
    std::ostringstream out;
    out << "episode_length_s = " << fmt(c.episode_length_s) << '\n'
        << "hop_s = " << fmt(c.hop_s) << '\n'
        << "channel = " << c.channel << '\n'
        << "vf_overlap_threshold = " << fmt(c.vf_overlap_threshold) << '\n'
        << "sampling_rate_hz = " << fmt(c.sampling_rate_hz) << '\n'
        << "ma_order = " << c.ma_order << '\n'
        << "hp_cutoff_hz = " << fmt(c.hp_cutoff_hz) << '\n'
        << "hp_order = " << c.hp_order << '\n'
        << "lp_cutoff_hz = " << fmt(c.lp_cutoff_hz) << '\n'
        << "lp_order = " << c.lp_order << '\n'
        << "emd_alpha = " << fmt(c.emd_alpha) << '\n'
        << "emd_beta = " << fmt(c.emd_beta) << '\n'
        << "emd_max_imfs = " << c.emd_max_imfs << '\n'
        << "emd_sift_sd_threshold = " << fmt(c.emd_sift_sd_threshold) << '\n'
        << "emd_max_sift_iterations = " << c.emd_max_sift_iterations << '\n'
        << "emd_noise_level_from_abs_max = " << (c.emd_noise_level_from_abs_max ? "true" : "false")
        << '\n'
        << "emd_invert_nlcr_branch = " << (c.emd_invert_nlcr_branch ? "true" : "false") << '\n'
        << "rank_n_trees = " << c.rank_n_trees << '\n'
        << "rank_max_features = " << c.rank_max_features << '\n'
        << "feature_fraction = " << fmt(c.feature_fraction) << '\n'
        << "rank_vf_subsample = " << c.rank_vf_subsample << '\n'
        << "rank_not_vf_subsample = " << c.rank_not_vf_subsample << '\n'
        << "smote_enabled = " << (c.smote_enabled ? "true" : "false") << '\n'
        << "smote_k_neighbors = " << c.smote_k_neighbors << '\n'
        << "smote_target_ratio = " << fmt(c.smote_target_ratio) << '\n'
        << "smote_within_folds = " << (c.smote_within_folds ? "true" : "false") << '\n'
        << "svm_c = " << fmt(c.svm_c) << '\n'
        << "svm_gamma = " << fmt(c.svm_gamma) << '\n'
        << "svm_tolerance = " << fmt(c.svm_tolerance) << '\n'
        << "svm_cache_mb = " << c.svm_cache_mb << '\n'
        << "grid_c_values = " << fmt(c.grid_c_values) << '\n'
        << "grid_gamma_values = " << fmt(c.grid_gamma_values) << '\n'
        << "grid_objective = "
        << (c.grid_objective == GridObjective::GMean ? "g_mean" : "accuracy") << '\n'
        << "cv_folds = " << c.cv_folds << '\n'
        << "cv_stratified = " << (c.cv_stratified ? "true" : "false") << '\n';
    if (include_seed) out << "seed = " << c.seed << '\n';
    return out.str();
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(episode_length_s > 0)) throw InputError("config: episode_length_s must be > 0");
    if (!(hop_s > 0)) throw InputError("config: hop_s must be > 0");
    if (!(sampling_rate_hz > 0)) throw InputError("config: sampling_rate_hz must be > 0");
    if (vf_overlap_threshold < 0 || vf_overlap_threshold >= 1)
        throw InputError("config: vf_overlap_threshold must be in [0, 1)");
    if (ma_order < 1) throw InputError("config: ma_order must be >= 1");
    if (!(hp_cutoff_hz > 0) || !(hp_cutoff_hz < lp_cutoff_hz) ||
        !(lp_cutoff_hz < sampling_rate_hz / 2))
        throw InputError("config: need 0 < hp_cutoff_hz < lp_cutoff_hz < sampling_rate_hz/2");
    if (hp_order < 2 || hp_order % 2) throw InputError("config: hp_order must be even and >= 2");
    if (lp_order < 2 || lp_order % 2) throw InputError("config: lp_order must be even and >= 2");
    if (!(emd_alpha > 0) || !(emd_beta > 0)) throw InputError("config: emd alpha/beta must be > 0");
    if (emd_max_imfs < 1) throw InputError("config: emd_max_imfs must be >= 1");
    if (emd_max_sift_iterations < 1)
        throw InputError("config: emd_max_sift_iterations must be >= 1");
    if (rank_n_trees < 1) throw InputError("config: rank_n_trees must be >= 1");
    if (!(feature_fraction > 0) || feature_fraction > 1)
        throw InputError("config: feature_fraction must be in (0, 1]");
    if (smote_k_neighbors < 1) throw InputError("config: smote_k_neighbors must be >= 1");
    if (!(smote_target_ratio > 0) || smote_target_ratio > 1)
        throw InputError("config: smote_target_ratio must be in (0, 1]");
    if (!(svm_c > 0)) throw InputError("config: svm_c must be > 0");
    if (svm_gamma < 0) throw InputError("config: svm_gamma must be >= 0");
    if (!(svm_tolerance > 0)) throw InputError("config: svm_tolerance must be > 0");
    if (grid_c_values.empty() || grid_gamma_values.empty())
        throw InputError("config: grid value lists must be non-empty");
    for (double v : grid_c_values)
        if (!(v > 0)) throw InputError("config: grid_c_values must be > 0");
    for (double v : grid_gamma_values)
        if (!(v > 0)) throw InputError("config: grid_gamma_values must be > 0");
    if (cv_folds < 2) throw InputError("config: cv_folds must be >= 2");
}

EpisodeWindowing PipelineConfig::windowing() const {
    EpisodeWindowing w;
    w.episode_length_s = episode_length_s;
    w.hop_s = hop_s;
    w.channel = channel;
    w.vf_overlap_threshold = vf_overlap_threshold;
    return w;
}

FilterChainConfig PipelineConfig::filter_chain() const {
    FilterChainConfig f;
    f.ma_order = ma_order;
    f.hp_cutoff_hz = hp_cutoff_hz;
    f.hp_order = hp_order;
    f.lp_cutoff_hz = lp_cutoff_hz;
    f.lp_order = lp_order;
    return f;
}

EmdConfig PipelineConfig::emd() const {
    EmdConfig e;
    e.alpha = emd_alpha;
    e.beta = emd_beta;
    e.max_imfs = emd_max_imfs;
    e.sift_sd_threshold = emd_sift_sd_threshold;
    e.max_sift_iterations = emd_max_sift_iterations;
    e.noise_level_from_abs_max = emd_noise_level_from_abs_max;
    e.invert_nlcr_branch = emd_invert_nlcr_branch;
    return e;
}

SmoteConfig PipelineConfig::smote() const {
    SmoteConfig s;
    s.k_neighbors = smote_k_neighbors;
    s.target_ratio = smote_target_ratio;
    s.seed = seed;
    return s;
}

SvmTrainConfig PipelineConfig::svm() const {
    SvmTrainConfig s;
    s.c = svm_c;
    s.gamma = svm_gamma;
    s.tolerance = svm_tolerance;
    s.cache_mb = svm_cache_mb;
    return s;
}

GridSearchSpec PipelineConfig::grid() const {
    GridSearchSpec g;
    g.c_values = grid_c_values;
    g.gamma_values = grid_gamma_values;
    g.objective = grid_objective;
    g.tolerance = svm_tolerance;
    return g;
}

std::string serialize(const PipelineConfig& cfg) { return serialize_impl(cfg, true); }

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig c;
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
        setters = {
            {"episode_length_s", [&](auto& k, auto& v) { c.episode_length_s = parse_double(k, v); }},
            {"hop_s", [&](auto& k, auto& v) { c.hop_s = parse_double(k, v); }},
            {"channel",
             [&](auto& k, auto& v) { c.channel = static_cast<std::size_t>(parse_int(k, v)); }},
            {"vf_overlap_threshold",
             [&](auto& k, auto& v) { c.vf_overlap_threshold = parse_double(k, v); }},
            {"sampling_rate_hz", [&](auto& k, auto& v) { c.sampling_rate_hz = parse_double(k, v); }},
            {"ma_order", [&](auto& k, auto& v) { c.ma_order = static_cast<int>(parse_int(k, v)); }},
            {"hp_cutoff_hz", [&](auto& k, auto& v) { c.hp_cutoff_hz = parse_double(k, v); }},
            {"hp_order", [&](auto& k, auto& v) { c.hp_order = static_cast<int>(parse_int(k, v)); }},
            {"lp_cutoff_hz", [&](auto& k, auto& v) { c.lp_cutoff_hz = parse_double(k, v); }},
            {"lp_order", [&](auto& k, auto& v) { c.lp_order = static_cast<int>(parse_int(k, v)); }},
            {"emd_alpha", [&](auto& k, auto& v) { c.emd_alpha = parse_double(k, v); }},
            {"emd_beta", [&](auto& k, auto& v) { c.emd_beta = parse_double(k, v); }},
            {"emd_max_imfs",
             [&](auto& k, auto& v) { c.emd_max_imfs = static_cast<int>(parse_int(k, v)); }},
            {"emd_sift_sd_threshold",
             [&](auto& k, auto& v) { c.emd_sift_sd_threshold = parse_double(k, v); }},
            {"emd_max_sift_iterations",
             [&](auto& k, auto& v) { c.emd_max_sift_iterations = static_cast<int>(parse_int(k, v)); }},
            {"emd_noise_level_from_abs_max",
             [&](auto& k, auto& v) { c.emd_noise_level_from_abs_max = parse_bool(k, v); }},
            {"emd_invert_nlcr_branch",
             [&](auto& k, auto& v) { c.emd_invert_nlcr_branch = parse_bool(k, v); }},
            {"rank_n_trees",
             [&](auto& k, auto& v) { c.rank_n_trees = static_cast<std::size_t>(parse_int(k, v)); }},
            {"rank_max_features",
             [&](auto& k, auto& v) {
                 c.rank_max_features = static_cast<std::size_t>(parse_int(k, v));
             }},
            {"feature_fraction", [&](auto& k, auto& v) { c.feature_fraction = parse_double(k, v); }},
            {"rank_vf_subsample",
             [&](auto& k, auto& v) {
                 c.rank_vf_subsample = static_cast<std::size_t>(parse_int(k, v));
             }},
            {"rank_not_vf_subsample",
             [&](auto& k, auto& v) {
                 c.rank_not_vf_subsample = static_cast<std::size_t>(parse_int(k, v));
             }},
            {"smote_enabled", [&](auto& k, auto& v) { c.smote_enabled = parse_bool(k, v); }},
            {"smote_k_neighbors",
             [&](auto& k, auto& v) {
                 c.smote_k_neighbors = static_cast<std::size_t>(parse_int(k, v));
             }},
            {"smote_target_ratio",
             [&](auto& k, auto& v) { c.smote_target_ratio = parse_double(k, v); }},
            {"smote_within_folds",
             [&](auto& k, auto& v) { c.smote_within_folds = parse_bool(k, v); }},
            {"svm_c", [&](auto& k, auto& v) { c.svm_c = parse_double(k, v); }},
            {"svm_gamma", [&](auto& k, auto& v) { c.svm_gamma = parse_double(k, v); }},
            {"svm_tolerance", [&](auto& k, auto& v) { c.svm_tolerance = parse_double(k, v); }},
            {"svm_cache_mb",
             [&](auto& k, auto& v) { c.svm_cache_mb = static_cast<std::size_t>(parse_int(k, v)); }},
            {"grid_c_values", [&](auto& k, auto& v) { c.grid_c_values = parse_list(k, v); }},
            {"grid_gamma_values",
             [&](auto& k, auto& v) { c.grid_gamma_values = parse_list(k, v); }},
            {"grid_objective",
             [&](auto& k, auto& v) {
                 if (v == "g_mean")
                     c.grid_objective = GridObjective::GMean;
                 else if (v == "accuracy")
                     c.grid_objective = GridObjective::Accuracy;
                 else
                     throw ParseError("key '" + k + "' must be g_mean or accuracy");
             }},
            {"cv_folds",
             [&](auto& k, auto& v) { c.cv_folds = static_cast<std::size_t>(parse_int(k, v)); }},
            {"cv_stratified", [&](auto& k, auto& v) { c.cv_stratified = parse_bool(k, v); }},
            {"seed",
             [&](auto& k, auto& v) { c.seed = parse_u64(k, v); }},
        };

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
        try {
            it->second(key, value);
        } catch (const ParseError& e) {
            throw ParseError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::uint64_t fnv1a_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
    return fnv1a_hash(serialize_impl(cfg, false));
}

}  // namespace vfdet
