// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "support/fixtures.hpp"

#include <jpeglib.h>
#include <png.h>

#include <cstdio>
#include <cstring>
#include <atomic>
#include <unistd.h>

#include "sitecheck/errors.hpp"
#include "sitecheck/io.hpp"

namespace sitecheck::testing {

namespace fs = std::filesystem;

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> make_png(
    std::uint32_t width, std::uint32_t height, const std::vector<std::uint8_t>& rgb,
    const std::vector<std::pair<std::string, std::string>>& text_chunks) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw std::invalid_argument("rgb buffer size mismatch");
    }
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png encode failed");
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);

    std::vector<png_text> texts(text_chunks.size());
    for (std::size_t i = 0; i < text_chunks.size(); ++i) {
        texts[i] = png_text{};
        texts[i].compression = PNG_TEXT_COMPRESSION_NONE;
        texts[i].key = const_cast<char*>(text_chunks[i].first.c_str());
        texts[i].text = const_cast<char*>(text_chunks[i].second.c_str());
        texts[i].text_length = text_chunks[i].second.size();
    }
    if (!texts.empty()) png_set_text(png, info, texts.data(), static_cast<int>(texts.size()));

    png_write_info(png, info);
    for (std::uint32_t y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
    }
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

std::vector<std::uint8_t> seeded_rgb(std::uint32_t width, std::uint32_t height,
                                     std::uint64_t seed) {
    SplitMix64 gen(seed);
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
    for (auto& b : rgb) b = static_cast<std::uint8_t>(gen.next() & 0xFF);
    return rgb;
}

std::vector<std::uint8_t> make_annotated_png(std::uint32_t width, std::uint32_t height,
                                             std::uint64_t pixel_seed,
                                             const std::string& caption_text) {
    return make_png(width, height, seeded_rgb(width, height, pixel_seed),
                    {{"caption", caption_text}});
}

std::vector<std::uint8_t> make_jpeg(std::uint32_t width, std::uint32_t height,
                                    std::uint64_t pixel_seed) {
    std::vector<std::uint8_t> rgb = seeded_rgb(width, height, pixel_seed);

    jpeg_compress_struct cinfo;
    jpeg_error_mgr err;
    cinfo.err = jpeg_std_error(&err);
    jpeg_create_compress(&cinfo);

    unsigned char* buffer = nullptr;
    unsigned long buffer_size = 0;
    jpeg_mem_dest(&cinfo, &buffer, &buffer_size);

    cinfo.image_width = width;
    cinfo.image_height = height;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, 90, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.next_scanline) * width * 3;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    std::vector<std::uint8_t> out(buffer, buffer + buffer_size);
    jpeg_destroy_compress(&cinfo);
    free(buffer);
    return out;
}

namespace {

void append_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

void append_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

std::vector<std::uint8_t> make_wav(const std::string& transcript, double seconds,
                                   std::uint32_t sample_rate) {
    const auto samples = static_cast<std::uint32_t>(seconds * sample_rate);
    const std::uint32_t data_size = samples * 2;  // PCM16 mono

    std::string comment = transcript;
    if (comment.size() % 2 == 1) comment.push_back('\0');  // word alignment
    const std::uint32_t icmt_size = static_cast<std::uint32_t>(comment.size());
    const std::uint32_t list_size = 4 + 8 + icmt_size;  // "INFO" + ICMT header + payload

    std::vector<std::uint8_t> out;
    append_tag(out, "RIFF");
    append_u32le(out, 4 + (8 + 16) + (8 + list_size) + (8 + data_size));
    append_tag(out, "WAVE");

    append_tag(out, "fmt ");
    append_u32le(out, 16);
    append_u16le(out, 1);  // PCM
    append_u16le(out, 1);  // mono
    append_u32le(out, sample_rate);
    append_u32le(out, sample_rate * 2);
    append_u16le(out, 2);
    append_u16le(out, 16);

    append_tag(out, "LIST");
    append_u32le(out, list_size);
    append_tag(out, "INFO");
    append_tag(out, "ICMT");
    append_u32le(out, icmt_size);
    out.insert(out.end(), comment.begin(), comment.end());

    append_tag(out, "data");
    append_u32le(out, data_size);
    // Low-amplitude deterministic ramp.
    for (std::uint32_t i = 0; i < samples; ++i) {
        const auto v = static_cast<std::int16_t>((i % 64) - 32);
        append_u16le(out, static_cast<std::uint16_t>(v));
    }
    return out;
}

Embedding random_unit_vec(SplitMix64& gen, std::size_t dim) {
    Embedding e;
    e.values.resize(dim);
    for (double& v : e.values) v = gen.next_signed_unit();
    return normalize_l2(e);
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("sitecheck-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

namespace {

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

// "02/02/2025 8:00 AM" style clock text for a minute-of-day.
std::string clock_text(int minute_of_day) {
    const int h24 = minute_of_day / 60;
    const int mm = minute_of_day % 60;
    const bool pm = h24 >= 12;
    int h12 = h24 % 12;
    if (h12 == 0) h12 = 12;
    return "02/02/2025 " + std::to_string(h12) + ":" + two_digits(mm) + (pm ? " PM" : " AM");
}

}  // namespace

PlantedFixture make_planted_fixture() {
    // Street pool with enough shared Sydney tokens to look realistic but
    // distinct numbers/streets so cross-pair similarity stays low.
    static const char* kStreets[] = {
        "York St",     "George St",   "Pitt St",      "Kent St",     "Clarence St",
        "Sussex St",   "Market St",   "King St",      "Castlereagh St", "Elizabeth St",
        "Bathurst St", "Liverpool St", "Goulburn St", "Campbell St", "Foveaux St",
        "Albion St",   "Crown St",    "Bourke St",    "Riley St",    "Oxford St",
        "Stanley St",  "William St",  "Palmer St",    "Cathedral St", "Forbes St"};
    static const char* kScenes[] = {
        "Two workers on a scaffold platform fixing rails.",
        "An excavator operating beside an open trench.",
        "A worker on a ladder near overhead power lines.",
        "Bricks stacked close to the platform edge.",
        "A concrete pour with three workers at ground level."};
    static const char* kHazards[] = {
        "Neither worker wore a high-visibility vest and one had no harness.",
        "The trench edge is unshored and spoil sits within a metre of it.",
        "The ladder is unsecured and within reach of live conductors.",
        "Material stacks are unrestrained close to an unmeshed guardrail.",
        "No exclusion zone is marked around the pour area."};

    PlantedFixture fx;
    const int base = 8 * 60;  // 08:00
    for (int i = 0; i < 25; ++i) {
        const int image_minute = base + i * 30;
        // First 15 audio notes share the exact timestamp; the rest are offset
        // 5 or 10 minutes, still inside the default 15-minute window.
        const int audio_minute = i < 15 ? image_minute : image_minute + (i % 2 == 0 ? 5 : 10);

        const std::string street = kStreets[i];
        const std::string number = std::to_string(7 + i * 3);
        const std::string image_loc = number + " " + street + ", Sydney, NSW 2000";
        // Every third pair spells the location slightly differently.
        std::string audio_loc = image_loc;
        if (i % 3 == 2) {
            audio_loc = number + " " + street + " Sydney NSW 2000";
            const auto st = audio_loc.find(" St ");
            if (st != std::string::npos) audio_loc.replace(st, 4, " Street ");
        }

        char image_id[16], audio_id[16];
        std::snprintf(image_id, sizeof(image_id), "img_%02d", i + 1);
        std::snprintf(audio_id, sizeof(audio_id), "aud_%02d", i + 1);

        fx.images.push_back(PlantedFixture::Item{
            image_id, "Time: " + clock_text(image_minute) + "\nLocation: " + image_loc + "\n" +
                          kScenes[i % 5]});
        fx.audio.push_back(PlantedFixture::Item{
            audio_id, "Time: " + clock_text(audio_minute) + "\nLocation: " + audio_loc + "\n" +
                          kHazards[i % 5]});
        fx.truth.emplace_back(image_id, audio_id);
    }

    // Decoys: wrong city at an exact in-window time, wrong city inside the
    // window, and one far outside every window.
    fx.audio.push_back(PlantedFixture::Item{
        "decoy_a", "Time: " + clock_text(base + 2 * 30) +
                       "\nLocation: 88 Flinders Lane, Melbourne, VIC 3000\n"
                       "Loose cabling across a walkway."});
    fx.decoy_reasons["decoy_a"] = "below-location-threshold";
    fx.audio.push_back(PlantedFixture::Item{
        "decoy_b", "Time: " + clock_text(base + 6 * 30 + 5) +
                       "\nLocation: 200 Adelaide Terrace, Perth, WA 6000\n"
                       "Unfenced void near the lift shaft."});
    fx.decoy_reasons["decoy_b"] = "below-location-threshold";
    fx.audio.push_back(PlantedFixture::Item{
        "decoy_c", "Time: 02/02/2025 5:00 AM\nLocation: 45 Hunter St, Newcastle, NSW 2300\n"
                   "Damaged formwork stored on the ramp."});
    fx.decoy_reasons["decoy_c"] = "time-window-exceeded";
    return fx;
}

void write_planted_batch(const fs::path& root, const PlantedFixture& fixture) {
    fs::create_directories(root / "images");
    fs::create_directories(root / "audio");
    for (std::size_t i = 0; i < fixture.images.size(); ++i) {
        const auto& item = fixture.images[i];
        write_file_atomic(root / "images" / (item.id + ".png"),
                          make_annotated_png(48, 32, 1000 + i, item.annotation));
    }
    for (std::size_t i = 0; i < fixture.audio.size(); ++i) {
        const auto& item = fixture.audio[i];
        write_file_atomic(root / "audio" / (item.id + ".wav"), make_wav(item.annotation));
    }
}

void write_corpus_pages(const fs::path& dir, const std::vector<std::string>& page_ids,
                        std::uint32_t width, std::uint32_t height) {
    fs::create_directories(dir);
    for (const std::string& id : page_ids) {
        write_file_atomic(dir / (id + ".png"),
                          make_png(width, height, seeded_rgb(width, height, fnv1a64(id))));
    }
}

}  // namespace sitecheck::testing
