#include "vfdet/wfdb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vfdet/errors.hpp"

namespace vfdet {

namespace {

// MIT annotation type codes used for rhythm tracking.
constexpr int kCodeRhythm = 28;
constexpr int kCodeVfOn = 32;
constexpr int kCodeVfOff = 33;
constexpr int kCodeSkip = 59;
constexpr int kCodeNum = 60;
constexpr int kCodeSub = 61;
constexpr int kCodeChn = 62;
constexpr int kCodeAux = 63;

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& msg) {
    throw ParseError("header line " + std::to_string(line_no) + ": " + msg);
}

double parse_number(const std::string& tok, std::size_t line_no, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) fail_line(line_no, std::string("malformed ") + what);
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        fail_line(line_no, std::string("malformed ") + what + " '" + tok + "'");
    }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open " + p.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

std::string to_string(Rhythm r) {
    switch (r) {
        case Rhythm::Vf: return "VF";
        case Rhythm::NotVf: return "NOT_VF";
        case Rhythm::Noise: return "NOISE";
    }
    return "?";
}

RecordHeader parse_header(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    RecordHeader h;
    bool have_record_line = false;
    int signals_seen = 0;

    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        auto toks = tokenize(line);
        if (!have_record_line) {
            // name[/nseg] nsig [fs[/counter[(base)]] [nsamples ...]]
            if (toks.size() < 2) fail_line(line_no, "record line needs a name and signal count");
            if (toks[0].find('/') != std::string::npos)
                fail_line(line_no, "multi-segment records are not supported");
            h.record_name = toks[0];
            const double nsig = parse_number(toks[1], line_no, "signal count");
            if (nsig < 1 || nsig != std::floor(nsig))
                fail_line(line_no, "signal count must be a positive integer");
            h.n_signals = static_cast<int>(nsig);
            if (toks.size() >= 3) {
                std::string fs_tok = toks[2].substr(0, toks[2].find('/'));
                h.sampling_rate_hz = parse_number(fs_tok, line_no, "sampling rate");
                if (!(h.sampling_rate_hz > 0)) fail_line(line_no, "sampling rate must be > 0");
            }
            if (toks.size() >= 4) {
                const double ns = parse_number(toks[3], line_no, "sample count");
                if (ns < 0 || ns != std::floor(ns)) fail_line(line_no, "bad sample count");
                h.n_samples = static_cast<std::size_t>(ns);
            }
            have_record_line = true;
            continue;
        }

        if (signals_seen >= h.n_signals)
            fail_line(line_no, "more signal lines than the declared count of " +
                                   std::to_string(h.n_signals));

        // filename format [gain[(baseline)][/units] [adcres [adczero [... desc]]]]
        if (toks.size() < 2) fail_line(line_no, "signal line needs a file name and format");
        SignalSpec s;
        s.file_name = toks[0];
        if (toks[1] != "212" && toks[1] != "16")
            fail_line(line_no, "unsupported storage format '" + toks[1] +
                                   "' (supported: 212, 16)");
        s.storage_format = toks[1] == "212" ? 212 : 16;

        int adc_zero = 0;
        bool have_baseline = false;
        if (toks.size() >= 3) {
            std::string g = toks[2];
            const auto slash = g.find('/');
            if (slash != std::string::npos) g = g.substr(0, slash);
            const auto paren = g.find('(');
            if (paren != std::string::npos) {
                const auto close = g.find(')', paren);
                if (close == std::string::npos) fail_line(line_no, "unterminated baseline");
                s.baseline = static_cast<int>(
                    parse_number(g.substr(paren + 1, close - paren - 1), line_no, "baseline"));
                have_baseline = true;
                g = g.substr(0, paren);
            }
            const double gain = parse_number(g, line_no, "adc gain");
            s.adc_gain = gain == 0.0 ? 200.0 : gain;
        }
        if (toks.size() >= 5)
            adc_zero = static_cast<int>(parse_number(toks[4], line_no, "adc zero"));
        if (!have_baseline) s.baseline = adc_zero;
        if (toks.size() >= 9) {
            std::string desc;
            for (std::size_t i = 8; i < toks.size(); ++i) {
                if (!desc.empty()) desc += ' ';
                desc += toks[i];
            }
            s.description = desc;
        }
        h.signals.push_back(std::move(s));
        ++signals_seen;
    }

    if (!have_record_line) throw ParseError("header: no record line found");
    if (signals_seen != h.n_signals)
        throw ParseError("header: declared " + std::to_string(h.n_signals) +
                         " signals but found " + std::to_string(signals_seen) +
                         " signal lines");
    return h;
}

std::vector<std::vector<std::int32_t>> decode_adu(std::span<const std::uint8_t> bytes,
                                                  const RecordHeader& header) {
    if (header.signals.empty()) throw InputError("decode_adu: header has no signal specs");
    const int format = header.signals.front().storage_format;
    for (const auto& s : header.signals)
        if (s.storage_format != format)
            throw InputError("decode_adu: mixed storage formats are not supported");

    const std::size_t n_sig = header.signals.size();
    std::vector<std::int32_t> flat;

    if (format == 212) {
        // Two 12-bit samples per 3 bytes: low byte of s0; then a shared byte
        // whose low nibble holds s0's high bits and high nibble s1's; then
        // s1's low byte.
        const std::size_t full_pairs = bytes.size() / 3;
        flat.reserve(full_pairs * 2 + 1);
        for (std::size_t i = 0; i + 2 < bytes.size(); i += 3) {
            std::int32_t s0 = bytes[i] | ((bytes[i + 1] & 0x0F) << 8);
            std::int32_t s1 = bytes[i + 2] | ((bytes[i + 1] & 0xF0) << 4);
            if (s0 & 0x800) s0 -= 0x1000;
            if (s1 & 0x800) s1 -= 0x1000;
            flat.push_back(s0);
            flat.push_back(s1);
        }
        const std::size_t rem = bytes.size() % 3;
        if (rem == 2) {
            // trailing lone sample
            std::int32_t s0 = bytes[bytes.size() - 2] | ((bytes[bytes.size() - 1] & 0x0F) << 8);
            if (s0 & 0x800) s0 -= 0x1000;
            flat.push_back(s0);
        } else if (rem == 1) {
            throw ParseError("decode_adu: truncated format-212 payload at byte offset " +
                             std::to_string(bytes.size() - 1));
        }
    } else {
        if (bytes.size() % 2 != 0)
            throw ParseError("decode_adu: truncated format-16 payload at byte offset " +
                             std::to_string(bytes.size() - 1));
        flat.reserve(bytes.size() / 2);
        for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
            std::int32_t v = bytes[i] | (bytes[i + 1] << 8);
            if (v & 0x8000) v -= 0x10000;
            flat.push_back(v);
        }
    }

    std::size_t n_frames = flat.size() / n_sig;
    if (header.n_samples != 0) {
        if (n_frames < header.n_samples)
            throw ParseError("decode_adu: payload holds " + std::to_string(n_frames) +
                             " frames but the header declares " +
                             std::to_string(header.n_samples) + "; truncated near byte offset " +
                             std::to_string(bytes.size()));
        n_frames = header.n_samples;
    }

    std::vector<std::vector<std::int32_t>> channels(n_sig);
    for (auto& ch : channels) ch.reserve(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f)
        for (std::size_t c = 0; c < n_sig; ++c) channels[c].push_back(flat[f * n_sig + c]);
    return channels;
}

std::vector<std::vector<double>> decode_signal(std::span<const std::uint8_t> bytes,
                                               const RecordHeader& header) {
    const auto adu = decode_adu(bytes, header);
    std::vector<std::vector<double>> channels(adu.size());
    for (std::size_t c = 0; c < adu.size(); ++c) {
        const auto& spec = header.signals[c];
        channels[c].reserve(adu[c].size());
        for (std::int32_t v : adu[c])
            channels[c].push_back((static_cast<double>(v) - spec.baseline) / spec.adc_gain);
    }
    return channels;
}

std::vector<RhythmAnnotation> parse_annotations(std::span<const std::uint8_t> bytes) {
    struct RawAnn {
        std::size_t time;
        int code;
        std::string aux;
    };
    std::vector<RawAnn> raw;

    std::size_t t = 0;
    std::size_t i = 0;
    auto need = [&](std::size_t k) {
        if (i + k > bytes.size())
            throw ParseError("annotations: truncated stream at byte offset " + std::to_string(i));
    };
    while (i < bytes.size()) {
        need(2);
        const unsigned word = bytes[i] | (bytes[i + 1] << 8);
        i += 2;
        const int code = static_cast<int>(word >> 10);
        const unsigned delta = word & 0x3FF;

        if (code == 0 && delta == 0) break;  // end of stream

        switch (code) {
            case kCodeSkip: {
                need(4);
                // long interval, high 16-bit word first
                const std::uint32_t hi = bytes[i] | (bytes[i + 1] << 8);
                const std::uint32_t lo = bytes[i + 2] | (bytes[i + 3] << 8);
                i += 4;
                t += (static_cast<std::uint64_t>(hi) << 16) | lo;
                break;
            }
            case kCodeNum:
            case kCodeSub:
            case kCodeChn:
                break;  // modifiers, ignored
            case kCodeAux: {
                need(delta);
                std::string aux(reinterpret_cast<const char*>(bytes.data() + i), delta);
                i += delta + (delta % 2);  // pad byte keeps the stream even
                while (!aux.empty() && aux.back() == '\0') aux.pop_back();
                if (!raw.empty()) raw.back().aux = aux;
                break;
            }
            default:
                t += delta;
                raw.push_back({t, code, {}});
                break;
        }
    }

    std::vector<RhythmAnnotation> out;
    Rhythm before_noise = Rhythm::NotVf;
    auto push = [&](std::size_t sample, Rhythm label) {
        if (!out.empty() && out.back().label == label) return;
        if (!out.empty() && out.back().sample_index == sample)
            out.back().label = label;
        else
            out.push_back({sample, label});
    };

    for (const RawAnn& a : raw) {
        if (a.code == kCodeVfOn) {
            push(a.time, Rhythm::Vf);
            before_noise = Rhythm::Vf;
        } else if (a.code == kCodeVfOff) {
            push(a.time, Rhythm::NotVf);
            before_noise = Rhythm::NotVf;
        } else if (!a.aux.empty() && a.aux.front() == '(') {
            std::string name = a.aux.substr(0, a.aux.find_first_of(" \t"));
            Rhythm label;
            if (name == "(VF" || name == "(VFIB") {
                label = Rhythm::Vf;
            } else if (name == "(NOISE") {
                label = Rhythm::Noise;
            } else {
                label = Rhythm::NotVf;
            }
            if (label == Rhythm::Noise) {
                if (out.empty() || out.back().label != Rhythm::Noise)
                    before_noise = out.empty() ? Rhythm::NotVf : out.back().label;
            } else {
                before_noise = label;
            }
            push(a.time, label);
        } else if (a.code == kCodeRhythm && a.aux.empty()) {
            // rhythm change without an aux string: revert from noise
            push(a.time, before_noise);
        }
    }
    return out;
}

EcgRecord read_record(const std::filesystem::path& header_path) {
    std::ifstream in(header_path);
    if (!in) throw InputError("cannot open " + header_path.string());
    std::stringstream ss;
    ss << in.rdbuf();

    EcgRecord rec;
    rec.header = parse_header(ss.str());

    const std::string& dat_name = rec.header.signals.front().file_name;
    for (const auto& s : rec.header.signals)
        if (s.file_name != dat_name)
            throw InputError("record " + rec.header.record_name +
                             ": signals split across multiple files are not supported");

    const auto dir = header_path.parent_path();
    rec.channels = decode_signal(read_file_bytes(dir / dat_name), rec.header);
    if (rec.header.n_samples == 0 && !rec.channels.empty())
        rec.header.n_samples = rec.channels.front().size();

    const auto atr = dir / (rec.header.record_name + ".atr");
    if (std::filesystem::exists(atr)) rec.annotations = parse_annotations(read_file_bytes(atr));

    for (const auto& a : rec.annotations)
        if (a.sample_index >= rec.header.n_samples + 1)  // allow a final end marker
            throw ParseError("record " + rec.header.record_name + ": annotation at sample " +
                             std::to_string(a.sample_index) + " beyond record end");
    return rec;
}

}  // namespace vfdet
