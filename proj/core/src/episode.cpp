#include "vfdet/episode.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "vfdet/errors.hpp"

namespace vfdet {

namespace {

// Label regions as [start, next_start) intervals over the record.
struct Region {
    std::size_t begin, end;
    Rhythm label;
};

std::vector<Region> regions_from_annotations(const std::vector<RhythmAnnotation>& anns,
                                             std::size_t n_samples) {
    std::vector<Region> regions;
    std::size_t cursor = 0;
    Rhythm current = Rhythm::NotVf;
    for (const auto& a : anns) {
        const std::size_t at = std::min(a.sample_index, n_samples);
        if (at > cursor) regions.push_back({cursor, at, current});
        cursor = at;
        current = a.label;
    }
    if (cursor < n_samples) regions.push_back({cursor, n_samples, current});
    return regions;
}

}  // namespace

std::vector<EcgEpisode> extract_episodes(const EcgRecord& record, const EpisodeWindowing& w) {
    if (w.channel >= record.channels.size())
        throw InputError("extract_episodes: channel " + std::to_string(w.channel) +
                         " out of range (record has " + std::to_string(record.channels.size()) +
                         " channels)");
    if (!(w.episode_length_s > 0) || !(w.hop_s > 0))
        throw InputError("extract_episodes: episode length and hop must be positive");

    const auto& channel = record.channels[w.channel];
    const double fs = record.header.sampling_rate_hz;
    const std::size_t win = static_cast<std::size_t>(std::llround(w.episode_length_s * fs));
    const std::size_t hop = static_cast<std::size_t>(std::llround(w.hop_s * fs));
    if (win == 0 || hop == 0)
        throw InputError("extract_episodes: window or hop rounds to zero samples");

    const auto regions = regions_from_annotations(record.annotations, channel.size());

    std::vector<EcgEpisode> episodes;
    if (channel.size() < win) return episodes;

    for (std::size_t start = 0; start + win <= channel.size(); start += hop) {
        const std::size_t stop = start + win;
        std::size_t vf_samples = 0;
        bool touches_noise = false;
        for (const Region& r : regions) {
            if (r.end <= start || r.begin >= stop) continue;
            const std::size_t overlap = std::min(r.end, stop) - std::max(r.begin, start);
            if (r.label == Rhythm::Noise) {
                touches_noise = true;
                break;
            }
            if (r.label == Rhythm::Vf) vf_samples += overlap;
        }
        if (touches_noise) continue;

        EcgEpisode ep;
        ep.samples.assign(channel.begin() + static_cast<std::ptrdiff_t>(start),
                          channel.begin() + static_cast<std::ptrdiff_t>(stop));
        ep.sampling_rate_hz = fs;
        ep.episode_length_s = w.episode_length_s;
        ep.label = (static_cast<double>(vf_samples) >
                    w.vf_overlap_threshold * static_cast<double>(win))
                       ? Rhythm::Vf
                       : Rhythm::NotVf;
        ep.source_record = record.header.record_name;
        ep.start_index = start;
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

std::filesystem::path csv_sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta");
    return p;
}

EcgEpisode read_csv_episode(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());

    EcgEpisode ep;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            std::size_t used = 0;
            const double v = std::stod(line, &used);
            ep.samples.push_back(v);
            (void)used;
        } catch (const std::exception&) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) +
                             ": expected one sample per line");
        }
    }
    if (ep.samples.empty()) throw ParseError(path.string() + ": no samples");

    const auto meta_path = csv_sidecar_path(path);
    std::ifstream meta(meta_path);
    if (!meta) throw InputError("cannot open sidecar " + meta_path.string());
    bool have_fs = false, have_len = false, have_label = false;
    while (std::getline(meta, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto eq = line.find('=');
        if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "sampling_rate_hz") {
            ep.sampling_rate_hz = std::stod(value);
            have_fs = true;
        } else if (key == "episode_length_s") {
            ep.episode_length_s = std::stod(value);
            have_len = true;
        } else if (key == "label") {
            if (value == "VF")
                ep.label = Rhythm::Vf;
            else if (value == "NOT_VF")
                ep.label = Rhythm::NotVf;
            else
                throw ParseError(meta_path.string() + ": label must be VF or NOT_VF, got '" +
                                 value + "'");
            have_label = true;
        } else if (key == "source") {
            ep.source_record = value;
        } else if (key == "start_index") {
            ep.start_index = static_cast<std::size_t>(std::stoull(value));
        }
    }
    if (!have_fs || !have_len || !have_label)
        throw ParseError(meta_path.string() +
                         ": sidecar needs sampling_rate_hz, episode_length_s and label");
    if (ep.source_record.empty()) ep.source_record = path.stem().string();

    const auto expected =
        static_cast<std::size_t>(std::llround(ep.episode_length_s * ep.sampling_rate_hz));
    if (ep.samples.size() != expected)
        throw ParseError(path.string() + ": " + std::to_string(ep.samples.size()) +
                         " samples but sidecar implies " + std::to_string(expected));
    return ep;
}

void write_csv_episode(const EcgEpisode& episode, const std::filesystem::path& path) {
    {
        std::ofstream out(path);
        if (!out) throw InputError("cannot write " + path.string());
        out.precision(17);
        for (double v : episode.samples) out << v << '\n';
    }
    std::ofstream meta(csv_sidecar_path(path));
    if (!meta) throw InputError("cannot write " + csv_sidecar_path(path).string());
    meta.precision(17);
    meta << "sampling_rate_hz = " << episode.sampling_rate_hz << '\n'
         << "episode_length_s = " << episode.episode_length_s << '\n'
         << "label = " << to_string(episode.label) << '\n'
         << "source = " << episode.source_record << '\n'
         << "start_index = " << episode.start_index << '\n';
}

}  // namespace vfdet
