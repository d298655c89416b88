#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vfdet {

enum class Rhythm { NotVf, Vf, Noise };

std::string to_string(Rhythm r);

struct SignalSpec {
    std::string file_name;
    int storage_format = 212;  // 212 or 16
    double adc_gain = 200.0;   // adu per millivolt
    int baseline = 0;          // adu at 0 mV
    std::string description;
};

struct RecordHeader {
    std::string record_name;
    int n_signals = 0;
    double sampling_rate_hz = 250.0;  // header default when omitted
    std::size_t n_samples = 0;        // 0 = unknown, inferred from payload
    std::vector<SignalSpec> signals;
};

// A rhythm change: `label` holds from `sample_index` until the next entry.
// Samples before the first entry are NotVf.
struct RhythmAnnotation {
    std::size_t sample_index = 0;
    Rhythm label = Rhythm::NotVf;
};

struct EcgRecord {
    RecordHeader header;
    std::vector<std::vector<double>> channels;  // millivolts
    std::vector<RhythmAnnotation> annotations;
};

// Parses header-file text: a record line followed by one spec line per
// signal. Unsupported storage formats and malformed or missing lines raise
// ParseError naming the line.
RecordHeader parse_header(const std::string& text);

// Raw ADC units, de-interleaved per channel. Storage format 212 packs two
// 12-bit two's-complement samples into three bytes; format 16 is
// little-endian int16. Truncated payloads raise ParseError with the byte
// offset.
std::vector<std::vector<std::int32_t>> decode_adu(std::span<const std::uint8_t> bytes,
                                                  const RecordHeader& header);

// Physical units: (adu - baseline) / adc_gain, in millivolts.
std::vector<std::vector<double>> decode_signal(std::span<const std::uint8_t> bytes,
                                               const RecordHeader& header);

// Parses a MIT-format annotation stream and reduces it to rhythm regions:
// aux strings starting "(" switch the rhythm ("(VF" and "(VFIB" mark
// fibrillation, "(NOISE" marks noise), and the fibrillation on/off bracket
// annotations toggle it directly. Consecutive identical labels are merged.
std::vector<RhythmAnnotation> parse_annotations(std::span<const std::uint8_t> bytes);

// Loads <name>.hea, its signal file, and <name>.atr when present.
EcgRecord read_record(const std::filesystem::path& header_path);

}  // namespace vfdet
