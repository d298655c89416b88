#include "vfdet/storage.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vfdet/errors.hpp"

namespace vfdet {

namespace {

constexpr std::uint32_t kEpisodeMagic = 0x50454656;  // "VFEP"
constexpr std::uint32_t kFeatureMagic = 0x45464656;  // "VFFE"
constexpr std::uint32_t kModelMagic = 0x56534656;    // "VFSV"
constexpr std::uint32_t kVersion = 1;

// Readable cap for count fields so a corrupt header cannot demand absurd
// allocations.
constexpr std::uint64_t kMaxCount = 1ull << 33;

struct Writer {
    std::ostream& out;

    void u32(std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void u64(std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void i32(std::int32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void f64(double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void f64s(std::span<const double> v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
};

struct Reader {
    std::istream& in;
    std::string name;
    std::uint64_t offset = 0;

    void raw(void* dst, std::size_t n) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw ParseError(name + ": truncated at byte offset " + std::to_string(offset));
        offset += n;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        raw(&v, sizeof v);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        raw(&v, sizeof v);
        return v;
    }
    std::int32_t i32() {
        std::int32_t v;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }
    void f64s(std::span<double> v) { raw(v.data(), v.size() * sizeof(double)); }
    std::string str() {
        const std::uint32_t n = u32();
        if (n > kMaxCount)
            throw ParseError(name + ": corrupt string length at byte offset " +
                             std::to_string(offset));
        std::string s(n, '\0');
        if (n) raw(s.data(), n);
        return s;
    }
    std::uint64_t count(const char* what) {
        const std::uint64_t v = u64();
        if (v > kMaxCount)
            throw ParseError(name + ": corrupt " + what + " at byte offset " +
                             std::to_string(offset));
        return v;
    }
};

std::uint64_t open_header(Reader& r, std::uint32_t magic, const char* kind) {
    if (r.u32() != magic) throw ParseError(r.name + ": not a " + kind + " file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ParseError(r.name + ": unsupported " + kind + " version " +
                         std::to_string(version));
    return r.u64();  // config hash
}

std::uint32_t peek_magic(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint32_t magic = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof magic);
    return in.gcount() == sizeof magic ? magic : 0;
}

}  // namespace

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        body(out);
        out.flush();
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw InputError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

void write_episode_cache(const std::filesystem::path& path,
                         std::span<const EcgEpisode> episodes, std::uint64_t config_hash) {
    atomic_write(path, [&](std::ostream& out) {
        Writer w{out};
        w.u32(kEpisodeMagic);
        w.u32(kVersion);
        w.u64(config_hash);
        w.u64(episodes.size());
        for (const auto& ep : episodes) {
            w.f64(ep.sampling_rate_hz);
            w.f64(ep.episode_length_s);
            w.i32(ep.label == Rhythm::Vf ? +1 : -1);
            w.u64(ep.start_index);
            w.str(ep.source_record);
            w.u64(ep.samples.size());
            w.f64s(ep.samples);
        }
    });
}

EpisodeCache read_episode_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    Reader r{in, path.string()};
    EpisodeCache cache;
    cache.config_hash = open_header(r, kEpisodeMagic, "episode cache");
    const std::uint64_t n = r.count("episode count");
    cache.episodes.resize(n);
    for (auto& ep : cache.episodes) {
        ep.sampling_rate_hz = r.f64();
        ep.episode_length_s = r.f64();
        ep.label = r.i32() == +1 ? Rhythm::Vf : Rhythm::NotVf;
        ep.start_index = r.u64();
        ep.source_record = r.str();
        ep.samples.resize(r.count("sample count"));
        r.f64s(ep.samples);
    }
    return cache;
}

void write_episode_cache_csv(const std::filesystem::path& path,
                             std::span<const EcgEpisode> episodes, std::uint64_t config_hash) {
    atomic_write(path, [&](std::ostream& out) {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(config_hash));
        out << "# episode cache, config_hash=" << hash << ", count=" << episodes.size() << '\n';
        out << "source,start_index,label,sampling_rate_hz,episode_length_s,samples...\n";
        out.precision(17);
        for (const auto& ep : episodes) {
            out << ep.source_record << ',' << ep.start_index << ',' << to_string(ep.label) << ','
                << ep.sampling_rate_hz << ',' << ep.episode_length_s;
            for (double v : ep.samples) out << ',' << v;
            out << '\n';
        }
    });
}

void write_feature_cache(const std::filesystem::path& path, const Dataset& data,
                         std::uint64_t config_hash) {
    atomic_write(path, [&](std::ostream& out) {
        Writer w{out};
        w.u32(kFeatureMagic);
        w.u32(kVersion);
        w.u64(config_hash);
        w.u64(data.n_rows);
        w.u64(data.n_cols);
        for (std::size_t i = 0; i < data.n_rows; ++i) {
            w.i32(data.labels[i]);
            w.str(i < data.sources.size() ? data.sources[i] : std::string{});
            w.f64s(data.row(i));
        }
    });
}

FeatureCache read_feature_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    Reader r{in, path.string()};
    FeatureCache cache;
    cache.config_hash = open_header(r, kFeatureMagic, "feature cache");
    const std::uint64_t rows = r.count("row count");
    const std::uint64_t dim = r.count("feature dimension");
    cache.data.n_cols = dim;
    cache.data.values.resize(rows * dim);
    cache.data.labels.resize(rows);
    cache.data.sources.resize(rows);
    for (std::uint64_t i = 0; i < rows; ++i) {
        cache.data.labels[i] = r.i32();
        if (cache.data.labels[i] != +1 && cache.data.labels[i] != -1)
            throw ParseError(path.string() + ": bad label at byte offset " +
                             std::to_string(r.offset));
        cache.data.sources[i] = r.str();
        r.f64s({cache.data.values.data() + i * dim, dim});
    }
    cache.data.n_rows = rows;
    return cache;
}

void write_feature_cache_csv(const std::filesystem::path& path, const Dataset& data,
                             std::uint64_t config_hash) {
    atomic_write(path, [&](std::ostream& out) {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(config_hash));
        out << "# feature cache, config_hash=" << hash << ", rows=" << data.n_rows
            << ", dim=" << data.n_cols << '\n';
        out << "label,source,features...\n";
        out.precision(17);
        for (std::size_t i = 0; i < data.n_rows; ++i) {
            out << (data.labels[i] == +1 ? "VF" : "NOT_VF") << ','
                << (i < data.sources.size() ? data.sources[i] : std::string{});
            for (double v : data.row(i)) out << ',' << v;
            out << '\n';
        }
    });
}

void write_model(const std::filesystem::path& path, const SvmModel& model,
                 std::uint64_t config_hash, std::uint64_t seed,
                 const std::string& config_snapshot) {
    atomic_write(path, [&](std::ostream& out) {
        Writer w{out};
        w.u32(kModelMagic);
        w.u32(kVersion);
        w.u64(config_hash);
        w.u64(seed);
        w.f64(model.gamma);
        w.f64(model.c);
        w.f64(model.bias);
        w.u64(model.n_sv);
        w.u64(model.dim);
        w.f64s(model.dual_coefficients);
        w.f64s(model.support_vectors);
        w.u32(model.mask.is_identity() ? 0 : 1);
        if (!model.mask.is_identity()) {
            w.u64(model.mask.full_dim);
            w.f64(model.mask.fraction);
            w.u64(model.mask.selected_indices.size());
            for (std::size_t idx : model.mask.selected_indices) w.u64(idx);
        }
        w.str(config_snapshot);
    });
}

ModelFile read_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    Reader r{in, path.string()};
    ModelFile file;
    file.config_hash = open_header(r, kModelMagic, "model");
    file.seed = r.u64();
    file.model.gamma = r.f64();
    file.model.c = r.f64();
    file.model.bias = r.f64();
    file.model.n_sv = r.count("support vector count");
    file.model.dim = r.count("model dimension");
    file.model.dual_coefficients.resize(file.model.n_sv);
    r.f64s(file.model.dual_coefficients);
    file.model.support_vectors.resize(file.model.n_sv * file.model.dim);
    r.f64s(file.model.support_vectors);
    if (r.u32()) {
        file.model.mask.full_dim = r.count("mask dimension");
        file.model.mask.fraction = r.f64();
        const std::uint64_t k = r.count("mask index count");
        file.model.mask.selected_indices.resize(k);
        for (auto& idx : file.model.mask.selected_indices) idx = r.u64();
    }
    file.config_snapshot = r.str();
    return file;
}

void write_mask(const std::filesystem::path& path, const FeatureMask& mask,
                std::uint64_t config_hash) {
    atomic_write(path, [&](std::ostream& out) {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(config_hash));
        out << "# feature mask: retained feature indices, ascending\n";
        out << "config_hash = " << hash << '\n';
        out << "full_dim = " << mask.full_dim << '\n';
        out.precision(17);
        out << "fraction = " << mask.fraction << '\n';
        out << "count = " << mask.selected_indices.size() << '\n';
        for (std::size_t idx : mask.selected_indices) out << idx << '\n';
    });
}

FeatureMask read_mask(const std::filesystem::path& path, std::uint64_t* config_hash_out) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    FeatureMask mask;
    std::uint64_t hash = 0;
    std::size_t count = 0;
    bool have_hash = false, have_dim = false, have_count = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        try {
            if (eq != std::string::npos) {
                const std::string key = line.substr(0, line.find_first_of(" ="));
                const std::string value = line.substr(line.find_first_not_of(" =", eq));
                if (key == "config_hash") {
                    hash = std::stoull(value, nullptr, 16);
                    have_hash = true;
                } else if (key == "full_dim") {
                    mask.full_dim = std::stoull(value);
                    have_dim = true;
                } else if (key == "fraction") {
                    mask.fraction = std::stod(value);
                } else if (key == "count") {
                    count = std::stoull(value);
                    have_count = true;
                } else {
                    throw std::invalid_argument(key);
                }
            } else {
                mask.selected_indices.push_back(std::stoull(line));
            }
        } catch (const std::exception&) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) +
                             ": malformed mask entry");
        }
    }
    if (!have_hash || !have_dim || !have_count)
        throw ParseError(path.string() + ": mask needs config_hash, full_dim and count");
    if (mask.selected_indices.size() != count)
        throw ParseError(path.string() + ": mask lists " +
                         std::to_string(mask.selected_indices.size()) + " indices, header says " +
                         std::to_string(count));
    for (std::size_t i = 0; i < mask.selected_indices.size(); ++i) {
        if (mask.selected_indices[i] >= mask.full_dim)
            throw ParseError(path.string() + ": mask index out of range");
        if (i && mask.selected_indices[i] <= mask.selected_indices[i - 1])
            throw ParseError(path.string() + ": mask indices must be strictly ascending");
    }
    if (config_hash_out) *config_hash_out = hash;
    return mask;
}

bool is_episode_cache(const std::filesystem::path& path) {
    return peek_magic(path) == kEpisodeMagic;
}

bool is_feature_cache(const std::filesystem::path& path) {
    return peek_magic(path) == kFeatureMagic;
}

}  // namespace vfdet
