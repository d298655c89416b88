#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vfdet/errors.hpp"
#include "vfdet/rng.hpp"
#include "vfdet/wfdb.hpp"
#include "wfdb_fixture.hpp"

using namespace vfdet;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("vfdet-test-" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("header parsing fills fields and applies defaults") {
    const auto h = parse_header(
        "100 2 250 65000\n"
        "100.dat 212 200(12)/mV 12 12 0 0 0 lead I\n"
        "100.dat 212 100/mV 12 0 0 0 0 lead II\n");
    CHECK(h.record_name == "100");
    CHECK(h.n_signals == 2);
    CHECK(h.sampling_rate_hz == 250.0);
    CHECK(h.n_samples == 65000);
    REQUIRE(h.signals.size() == 2);
    CHECK(h.signals[0].storage_format == 212);
    CHECK(h.signals[0].adc_gain == 200.0);
    CHECK(h.signals[0].baseline == 12);
    CHECK(h.signals[1].adc_gain == 100.0);
    CHECK(h.signals[1].baseline == 0);
    CHECK(h.signals[1].description == "lead II");
}

TEST_CASE("minimal header gets the conventional defaults") {
    const auto h = parse_header("r 1\nr.dat 16\n");
    CHECK(h.sampling_rate_hz == 250.0);
    CHECK(h.signals[0].adc_gain == 200.0);
    CHECK(h.signals[0].baseline == 0);
    CHECK(h.signals[0].storage_format == 16);
}

TEST_CASE("header errors name the offending line") {
    // declared two signals, provided one
    CHECK_THROWS_AS(parse_header("r 2 250\nr.dat 212\n"), ParseError);
    // unsupported storage format
    CHECK_THROWS_WITH_AS(parse_header("r 1 250\nr.dat 61\n"),
                         doctest::Contains("unsupported storage format"), ParseError);
    CHECK_THROWS_AS(parse_header("\n\n"), ParseError);
    CHECK_THROWS_AS(parse_header("r never\n"), ParseError);
    try {
        parse_header("r 1 250\nbad-line\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("format-212 decode agrees with the reference formula") {
    RecordHeader h;
    h.n_signals = 1;
    h.signals.push_back({"x.dat", 212, 200.0, 0, ""});

    // The shared middle byte carries the high bits of BOTH samples: its high
    // nibble belongs to the second sample, so 0x20 contributes 0x200 there.
    const std::vector<std::uint8_t> bytes{0x01, 0x20, 0x02};
    const auto adu = decode_adu(bytes, h);
    REQUIRE(adu.size() == 1);
    REQUIRE(adu[0].size() == 2);
    const auto [r0, r1] = oracle::decode_pair_212(0x01, 0x20, 0x02);
    CHECK(adu[0][0] == r0);
    CHECK(adu[0][1] == r1);
    CHECK(r0 == 1);
    CHECK(r1 == 514);

    // The pair (1, 2) packs with an empty shared byte.
    const auto plain = decode_adu(std::vector<std::uint8_t>{0x01, 0x00, 0x02}, h);
    CHECK(plain[0][0] == 1);
    CHECK(plain[0][1] == 2);
}

TEST_CASE("format-212 encode then decode is the identity") {
    RecordHeader h;
    h.n_signals = 1;
    h.signals.push_back({"x.dat", 212, 200.0, 0, ""});

    Rng rng(1234);
    std::vector<std::uint8_t> bytes;
    std::vector<int> expect;
    for (int p = 0; p < 1000; ++p) {
        const int a = static_cast<int>(rng.below(4096)) - 2048;
        const int b = static_cast<int>(rng.below(4096)) - 2048;
        const auto triplet = oracle::encode_pair_212(a, b);
        bytes.insert(bytes.end(), triplet.begin(), triplet.end());
        expect.push_back(a);
        expect.push_back(b);
    }
    for (int edge : {-2048, -1, 0, 1, 2047}) {
        const auto triplet = oracle::encode_pair_212(edge, -edge - 1);
        bytes.insert(bytes.end(), triplet.begin(), triplet.end());
        expect.push_back(edge);
        expect.push_back(-edge - 1);
    }

    const auto adu = decode_adu(bytes, h);
    REQUIRE(adu[0].size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(adu[0][i] == expect[i]);
}

TEST_CASE("format-16 decode and channel de-interleaving") {
    RecordHeader h;
    h.n_signals = 2;
    h.signals.push_back({"x.dat", 16, 200.0, 0, ""});
    h.signals.push_back({"x.dat", 16, 200.0, 0, ""});

    // frames: (100, -2), (-30000, 7)
    const std::vector<std::uint8_t> bytes{0x64, 0x00, 0xFE, 0xFF, 0xD0, 0x8A, 0x07, 0x00};
    const auto adu = decode_adu(bytes, h);
    REQUIRE(adu.size() == 2);
    CHECK(adu[0] == std::vector<std::int32_t>{100, -30000});
    CHECK(adu[1] == std::vector<std::int32_t>{-2, 7});
}

TEST_CASE("physical conversion applies gain and baseline") {
    RecordHeader h;
    h.n_signals = 1;
    h.signals.push_back({"x.dat", 16, 100.0, 50, ""});
    const std::vector<std::uint8_t> zeros{0x00, 0x00, 0x32, 0x00};  // adu 0, 50
    const auto mv = decode_signal(zeros, h);
    CHECK(mv[0][0] == doctest::Approx(-0.5));  // (0 - 50) / 100
    CHECK(mv[0][1] == doctest::Approx(0.0));
}

TEST_CASE("truncated payloads raise errors naming the byte offset") {
    RecordHeader h;
    h.n_signals = 1;
    h.signals.push_back({"x.dat", 212, 200.0, 0, ""});
    CHECK_THROWS_WITH_AS(decode_adu(std::vector<std::uint8_t>{0x01}, h),
                         doctest::Contains("byte offset"), ParseError);

    h.signals[0].storage_format = 16;
    CHECK_THROWS_AS(decode_adu(std::vector<std::uint8_t>{0x01, 0x02, 0x03}, h), ParseError);

    h.signals[0].storage_format = 212;
    h.n_samples = 10;  // header promises more frames than the payload holds
    CHECK_THROWS_AS(decode_adu(std::vector<std::uint8_t>{0x01, 0x00, 0x02}, h), ParseError);
}

TEST_CASE("annotation stream reduces to rhythm regions") {
    // (N at 0, (VF at 700, noise at 1500, silent rhythm change back at 1600,
    // (VFIB far away at 300000 (exercises the SKIP word).
    const auto bytes = fixture::pack_annotations({{0, "(N"},
                                                  {700, "(VF"},
                                                  {1500, "(NOISE"},
                                                  {1600, "(VF"},
                                                  {300000, "(VFIB"}});
    const auto anns = parse_annotations(bytes);
    REQUIRE(anns.size() == 4);
    CHECK(anns[0].sample_index == 0);
    CHECK(anns[0].label == Rhythm::NotVf);
    CHECK(anns[1].sample_index == 700);
    CHECK(anns[1].label == Rhythm::Vf);
    CHECK(anns[2].sample_index == 1500);
    CHECK(anns[2].label == Rhythm::Noise);
    CHECK(anns[3].sample_index == 1600);
    CHECK(anns[3].label == Rhythm::Vf);
    // consecutive identical labels merge: the distant (VFIB adds nothing
    CHECK(anns.back().sample_index == 1600);
}

TEST_CASE("unknown rhythm strings mean not-fibrillation") {
    const auto anns = parse_annotations(fixture::pack_annotations({{0, "(AFIB"}, {50, "(VT"}}));
    REQUIRE(anns.size() == 1);  // both NotVf, merged
    CHECK(anns[0].label == Rhythm::NotVf);
}

TEST_CASE("truncated annotation stream raises with offset") {
    auto bytes = fixture::pack_annotations({{10, "(VF"}});
    bytes.resize(3);  // cut inside a word
    CHECK_THROWS_WITH_AS(parse_annotations(bytes), doctest::Contains("byte offset"), ParseError);
}

TEST_CASE("read_record stitches header, samples, and annotations") {
    const auto dir = temp_dir("record");
    fixture::WfdbRecord rec;
    rec.name = "r1";
    rec.fs = 250.0;
    rec.channels = {std::vector<double>(2000, 0.0), std::vector<double>(2000, 0.0)};
    for (std::size_t i = 0; i < 2000; ++i) {
        rec.channels[0][i] = 0.8 * std::sin(0.05 * static_cast<double>(i));
        rec.channels[1][i] = 0.4 * std::cos(0.05 * static_cast<double>(i));
    }
    rec.rhythms = {{0, "(N"}, {1000, "(VF"}};
    const auto hea = fixture::write_record(dir, rec);

    const auto loaded = read_record(hea);
    CHECK(loaded.header.record_name == "r1");
    CHECK(loaded.header.n_samples == 2000);
    REQUIRE(loaded.channels.size() == 2);
    REQUIRE(loaded.channels[0].size() == 2000);
    // 12-bit quantization at gain 200: worst case half an adu step (0.0025)
    for (std::size_t i = 0; i < 2000; ++i) {
        CHECK(std::abs(loaded.channels[0][i] - rec.channels[0][i]) <= 0.0026);
    }
    REQUIRE(loaded.annotations.size() == 2);
    CHECK(loaded.annotations[1].sample_index == 1000);
    CHECK(loaded.annotations[1].label == Rhythm::Vf);

    std::filesystem::remove_all(dir);
}

TEST_CASE("read_record rejects annotations beyond the record end") {
    const auto dir = temp_dir("ann-range");
    fixture::WfdbRecord rec;
    rec.name = "r2";
    rec.channels = {std::vector<double>(100, 0.1)};
    rec.rhythms = {{500, "(VF"}};
    const auto hea = fixture::write_record(dir, rec);
    CHECK_THROWS_AS(read_record(hea), ParseError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("read_record reports a missing signal file as input error") {
    const auto dir = temp_dir("missing-dat");
    std::ofstream(dir / "r3.hea") << "r3 1 250 100\nr3.dat 212 200 12 0 0 0 0\n";
    CHECK_THROWS_AS(read_record(dir / "r3.hea"), InputError);
    std::filesystem::remove_all(dir);
}
