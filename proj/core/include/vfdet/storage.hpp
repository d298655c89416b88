#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vfdet/dataset.hpp"
#include "vfdet/episode.hpp"
#include "vfdet/forest.hpp"
#include "vfdet/svm.hpp"

namespace vfdet {

// Every artifact starts with a 4-byte magic, a u32 format version and the
// u64 pipeline-config hash; stages refuse to mix artifacts whose hashes
// disagree. All files are written to a temporary name and renamed into
// place. Integers and doubles are little-endian, fixed width.

struct EpisodeCache {
    std::uint64_t config_hash = 0;
    std::vector<EcgEpisode> episodes;
};

struct FeatureCache {
    std::uint64_t config_hash = 0;
    Dataset data;
};

struct ModelFile {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    SvmModel model;
    std::string config_snapshot;
};

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

void write_episode_cache(const std::filesystem::path& path,
                         std::span<const EcgEpisode> episodes, std::uint64_t config_hash);
EpisodeCache read_episode_cache(const std::filesystem::path& path);
void write_episode_cache_csv(const std::filesystem::path& path,
                             std::span<const EcgEpisode> episodes, std::uint64_t config_hash);

void write_feature_cache(const std::filesystem::path& path, const Dataset& data,
                         std::uint64_t config_hash);
FeatureCache read_feature_cache(const std::filesystem::path& path);
void write_feature_cache_csv(const std::filesystem::path& path, const Dataset& data,
                             std::uint64_t config_hash);

void write_model(const std::filesystem::path& path, const SvmModel& model,
                 std::uint64_t config_hash, std::uint64_t seed,
                 const std::string& config_snapshot);
ModelFile read_model(const std::filesystem::path& path);

// Plain-text mask: hash/dimension/fraction header plus one index per line.
void write_mask(const std::filesystem::path& path, const FeatureMask& mask,
                std::uint64_t config_hash);
FeatureMask read_mask(const std::filesystem::path& path, std::uint64_t* config_hash_out);

// True when the file starts with the episode-cache magic (format sniffing).
bool is_episode_cache(const std::filesystem::path& path);
bool is_feature_cache(const std::filesystem::path& path);

}  // namespace vfdet
