// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/matcher.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <regex>

#include "sitecheck/index.hpp"

namespace sitecheck {

namespace {

// Days since 1970-01-01 for a civil date (Gregorian, proleptic).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097LL + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yy + (m <= 2));
}

unsigned last_day_of_month(int y, unsigned m) {
    static constexpr unsigned days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m != 2) return days[m - 1];
    const bool leap = y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
    return leap ? 29u : 28u;
}

std::optional<std::int64_t> make_minutes(int y, unsigned mo, unsigned d, unsigned h, unsigned mi) {
    if (mo < 1 || mo > 12 || d < 1 || d > last_day_of_month(y, mo) || h > 23 || mi > 59) {
        return std::nullopt;
    }
    return days_from_civil(y, mo, d) * 1440 + static_cast<std::int64_t>(h) * 60 + mi;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Both header fields plus bookkeeping about what was actually seen, so the
// strict parser can name the offending field.
struct HeaderScan {
    std::optional<std::int64_t> timestamp_min;
    bool time_line_seen = false;
    std::optional<std::string> location_text;
    std::string body;
};

HeaderScan scan_header(const std::string& text) {
    HeaderScan scan;
    std::size_t pos = 0;
    std::size_t body_start = 0;
    bool saw_any = false;

    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::size_t line_end = eol == std::string::npos ? text.size() : eol;
        const std::string_view line = trim(std::string_view(text).substr(pos, line_end - pos));

        const std::size_t colon = line.find(':');
        bool consumed = false;
        if (colon != std::string_view::npos) {
            const std::string label = lower(trim(line.substr(0, colon)));
            const std::string_view value = trim(line.substr(colon + 1));
            if (label == "time") {
                scan.time_line_seen = true;
                if (!scan.timestamp_min) scan.timestamp_min = parse_timestamp_minutes(value);
                consumed = true;
            } else if (label == "location") {
                if (!scan.location_text && !value.empty()) {
                    scan.location_text = std::string(value);
                }
                consumed = true;
            }
        }
        if (!consumed && !line.empty()) break;       // first body line
        if (!consumed && line.empty() && !saw_any) break;  // leading blank: all body
        saw_any = saw_any || consumed;

        pos = line_end == text.size() ? text.size() : line_end + 1;
        body_start = pos;
        if (!consumed) break;  // blank separator line after the header
    }

    std::string_view body = std::string_view(text).substr(body_start);
    while (!body.empty() && (body.front() == '\n' || body.front() == '\r')) body.remove_prefix(1);
    scan.body = std::string(body);
    return scan;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp_minutes(std::string_view text) {
    static const std::regex day_first(
        R"(^\s*(\d{1,2})/(\d{1,2})/(\d{4}),?\s+(\d{1,2}):(\d{2})\s*([AaPp])\.?\s*[Mm]\.?\s*$)");
    static const std::regex iso(
        R"(^\s*(\d{4})-(\d{2})-(\d{2})[T ](\d{1,2}):(\d{2})(?::\d{2})?\s*$)");

    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_match(text.begin(), text.end(), m, day_first)) {
        const int day = std::stoi(m[1]);
        const int month = std::stoi(m[2]);
        const int year = std::stoi(m[3]);
        int hour = std::stoi(m[4]);
        const int minute = std::stoi(m[5]);
        const bool pm = m[6].str()[0] == 'p' || m[6].str()[0] == 'P';
        if (hour < 1 || hour > 12) return std::nullopt;
        if (pm && hour != 12) hour += 12;
        if (!pm && hour == 12) hour = 0;
        return make_minutes(year, static_cast<unsigned>(month), static_cast<unsigned>(day),
                            static_cast<unsigned>(hour), static_cast<unsigned>(minute));
    }
    if (std::regex_match(text.begin(), text.end(), m, iso)) {
        return make_minutes(std::stoi(m[1]), static_cast<unsigned>(std::stoi(m[2])),
                            static_cast<unsigned>(std::stoi(m[3])),
                            static_cast<unsigned>(std::stoi(m[4])),
                            static_cast<unsigned>(std::stoi(m[5])));
    }
    return std::nullopt;
}

std::string format_timestamp_iso(std::int64_t minutes) {
    std::int64_t day = minutes / 1440;
    std::int64_t rem = minutes % 1440;
    if (rem < 0) {
        rem += 1440;
        day -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(day, y, mo, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld", y, mo, d,
                  static_cast<long long>(rem / 60), static_cast<long long>(rem % 60));
    return buf;
}

AnnotationHeader parse_annotation(const std::string& text) {
    if (trim(text).empty()) throw EmptyInputError("empty annotation text");
    const HeaderScan scan = scan_header(text);
    if (!scan.timestamp_min) {
        throw HeaderParseError(scan.time_line_seen ? "unparsable Time value in annotation header"
                                                   : "missing Time line in annotation header",
                               "time");
    }
    if (!scan.location_text) {
        throw HeaderParseError("missing Location line in annotation header", "location");
    }
    return AnnotationHeader{*scan.timestamp_min, *scan.location_text, scan.body};
}

LenientHeader parse_annotation_lenient(const std::string& text) {
    const HeaderScan scan = scan_header(text);
    return LenientHeader{scan.timestamp_min, scan.location_text, scan.body};
}

double location_similarity(const std::string& a, const std::string& b, TextEmbedder& embedder) {
    if (trim(a).empty() || trim(b).empty()) {
        throw EmptyInputError("empty location string");
    }
    const Embedding ea = embedder.embed_text(a);
    const Embedding eb = embedder.embed_text(b);
    return cosine(ea, eb);
}

namespace {

struct Edge {
    double sim;
    std::size_t img;
    std::size_t aud;
    bool exact_time;
    double delta_min;
};

}  // namespace

MatchResult match_pairs(const std::vector<MatchInput>& images,
                        const std::vector<MatchInput>& audio, const MatchConfig& cfg,
                        TextEmbedder& embedder) {
    MatchResult result;
    result.config = cfg;

    // One embedding per distinct location string; unusable strings map to
    // nullopt and exclude the item from similarity scoring.
    std::map<std::string, std::optional<Embedding>> cache;
    const auto embed_loc = [&](const std::string& s) -> const std::optional<Embedding>& {
        auto it = cache.find(s);
        if (it == cache.end()) {
            std::optional<Embedding> e;
            if (!trim(s).empty()) {
                try {
                    e = embedder.embed_text(s);
                } catch (const Error&) {
                    e = std::nullopt;
                }
            }
            it = cache.emplace(s, std::move(e)).first;
        }
        return it->second;
    };

    // Time screen: both timestamps within the window, or either side missing
    // a timestamp (location-only consideration).
    const auto time_screen = [&](const MatchInput& img, const MatchInput& aud,
                                 double& delta_out) -> bool {
        if (img.timestamp_min && aud.timestamp_min) {
            delta_out = std::abs(static_cast<double>(*img.timestamp_min - *aud.timestamp_min));
            return delta_out <= cfg.time_window_min;
        }
        delta_out = 0.0;
        return true;
    };

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& ie = embed_loc(images[i].location_text);
        if (!ie) continue;
        for (std::size_t a = 0; a < audio.size(); ++a) {
            const auto& ae = embed_loc(audio[a].location_text);
            if (!ae) continue;
            double delta = 0.0;
            if (!time_screen(images[i], audio[a], delta)) continue;
            const double sim = cosine(*ie, *ae);
            if (sim < cfg.location_threshold) continue;
            const bool exact = images[i].timestamp_min && audio[a].timestamp_min && delta == 0.0;
            edges.push_back(Edge{sim, i, a, exact, delta});
        }
    }

    // Greedy order depends only on values and ids, never on input order.
    std::sort(edges.begin(), edges.end(), [&](const Edge& x, const Edge& y) {
        if (x.sim != y.sim) return x.sim > y.sim;
        if (audio[x.aud].id != audio[y.aud].id) return audio[x.aud].id < audio[y.aud].id;
        return images[x.img].id < images[y.img].id;
    });

    std::vector<bool> img_taken(images.size(), false);
    std::vector<bool> aud_taken(audio.size(), false);
    const auto commit = [&](const Edge& e) {
        img_taken[e.img] = true;
        aud_taken[e.aud] = true;
        result.pairs.push_back(
            MatchPair{images[e.img].id, audio[e.aud].id, e.sim, e.exact_time ? 0.0 : e.delta_min});
    };

    for (const Edge& e : edges) {  // phase 1: exact timestamps
        if (e.exact_time && !img_taken[e.img] && !aud_taken[e.aud]) commit(e);
    }
    for (const Edge& e : edges) {  // phase 2: within the window
        if (!img_taken[e.img] && !aud_taken[e.aud]) commit(e);
    }

    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchPair& a, const MatchPair& b) { return a.image_id < b.image_id; });

    // Reasons are evaluated against the full opposite side so they do not
    // depend on commit order.
    const auto reason_for = [&](const MatchInput& self, const std::vector<MatchInput>& others) {
        if (others.empty()) return std::string("no-candidate");
        if (!embed_loc(self.location_text)) return std::string("header-missing");
        const auto& se = *embed_loc(self.location_text);
        bool any_usable = false;
        bool any_in_window = false;
        double best = -2.0;
        for (const MatchInput& other : others) {
            const auto& oe = embed_loc(other.location_text);
            if (!oe) continue;
            any_usable = true;
            double delta = 0.0;
            const bool ok = self.timestamp_min ? time_screen(self, other, delta)
                                               : time_screen(other, self, delta);
            if (!ok) continue;
            any_in_window = true;
            best = std::max(best, cosine(se, *oe));
        }
        if (!any_usable) return std::string("no-candidate");
        if (!any_in_window) return std::string("time-window-exceeded");
        if (best < cfg.location_threshold) return std::string("below-location-threshold");
        return std::string("outscored");
    };

    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!img_taken[i]) {
            result.unmatched_images.push_back(UnmatchedItem{images[i].id, reason_for(images[i], audio)});
        }
    }
    for (std::size_t a = 0; a < audio.size(); ++a) {
        if (!aud_taken[a]) {
            result.unmatched_audio.push_back(UnmatchedItem{audio[a].id, reason_for(audio[a], images)});
        }
    }
    const auto by_id = [](const UnmatchedItem& x, const UnmatchedItem& y) { return x.id < y.id; };
    std::sort(result.unmatched_images.begin(), result.unmatched_images.end(), by_id);
    std::sort(result.unmatched_audio.begin(), result.unmatched_audio.end(), by_id);
    return result;
}

std::string match_result_to_json(const MatchResult& result) {
    using ordered_json = nlohmann::ordered_json;
    const auto round6 = [](double v) { return std::round(v * 1e6) / 1e6; };

    ordered_json pairs = ordered_json::array();
    for (const MatchPair& p : result.pairs) {
        pairs.push_back({{"image", p.image_id},
                         {"audio", p.audio_id},
                         {"similarity", round6(p.similarity)},
                         {"time_delta_min", p.time_delta_min}});
    }
    const auto unmatched = [](const std::vector<UnmatchedItem>& items) {
        ordered_json arr = ordered_json::array();
        for (const UnmatchedItem& u : items) arr.push_back({{"id", u.id}, {"reason", u.reason}});
        return arr;
    };
    ordered_json doc = {{"pairs", pairs},
                        {"unmatched_images", unmatched(result.unmatched_images)},
                        {"unmatched_audio", unmatched(result.unmatched_audio)},
                        {"config",
                         {{"time_window_min", result.config.time_window_min},
                          {"location_threshold", result.config.location_threshold}}}};
    return doc.dump(2) + "\n";
}

}  // namespace sitecheck
