// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/evalsuite.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "sitecheck/errors.hpp"
#include "sitecheck/io.hpp"

namespace sitecheck {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(Averaging averaging) {
    return averaging == Averaging::kSample ? "sample" : "micro";
}

Averaging averaging_from_string(const std::string& name) {
    if (name == "sample") return Averaging::kSample;
    if (name == "micro") return Averaging::kMicro;
    throw ConfigError("unknown averaging mode: " + name + " (expected sample or micro)");
}

void GroundTruth::validate() const {
    if (label_universe.empty()) throw ConfigError("ground truth universe is empty");
    std::set<std::string> seen;
    for (const std::string& ref : label_universe) {
        if (!seen.insert(ref).second) {
            throw ConfigError("duplicate ref in universe: " + ref);
        }
    }
    for (const auto& [report_id, refs] : per_report) {
        for (const std::string& ref : refs) {
            if (!seen.contains(ref)) {
                throw ConfigError("report '" + report_id + "' references '" + ref +
                                  "' outside the universe");
            }
        }
    }
}

namespace {

std::string ref_from_json(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ConfigError("ground truth refs must be strings or integers");
}

}  // namespace

GroundTruth ground_truth_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unparsable ground truth JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("universe") || !doc.contains("reports")) {
        throw ConfigError("ground truth JSON must contain 'universe' and 'reports'");
    }
    GroundTruth gt;
    for (const auto& v : doc["universe"]) gt.label_universe.push_back(ref_from_json(v));
    for (const auto& [report_id, refs] : doc["reports"].items()) {
        std::set<std::string> set;
        for (const auto& v : refs) set.insert(ref_from_json(v));
        gt.per_report.emplace(report_id, std::move(set));
    }
    gt.validate();
    return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    return ground_truth_from_json(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Citation extraction
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum Kind { kWord, kNumber, kComma, kAmp, kDash, kOther } kind;
    std::string text;  // lowercased for words
    long value = 0;    // for numbers
};

std::vector<Token> lex_citations(const std::string& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isdigit(c)) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            long value = 0;
            bool overflow = j - i > 9;
            if (!overflow) value = std::stol(text.substr(i, j - i));
            tokens.push_back(Token{Token::kNumber, text.substr(i, j - i), overflow ? -1 : value});
            i = j;
        } else if (std::isalpha(c)) {
            std::size_t j = i;
            while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
            std::string word = text.substr(i, j - i);
            std::transform(word.begin(), word.end(), word.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            tokens.push_back(Token{Token::kWord, std::move(word), 0});
            i = j;
        } else if (c == ',') {
            tokens.push_back(Token{Token::kComma, ",", 0});
            ++i;
        } else if (c == '&') {
            tokens.push_back(Token{Token::kAmp, "&", 0});
            ++i;
        } else if (c == '-') {
            tokens.push_back(Token{Token::kDash, "-", 0});
            ++i;
        } else if (text.compare(i, 3, "\xE2\x80\x93") == 0 ||  // en dash
                   text.compare(i, 3, "\xE2\x80\x94") == 0) {  // em dash
            tokens.push_back(Token{Token::kDash, "-", 0});
            i += 3;
        } else if (std::isspace(c)) {
            ++i;
        } else {
            tokens.push_back(Token{Token::kOther, std::string(1, text[i]), 0});
            ++i;
        }
    }
    return tokens;
}

bool is_page_keyword(const Token& t) {
    return t.kind == Token::kWord && (t.text == "page" || t.text == "pages");
}

bool is_reg_keyword(const Token& t) {
    return t.kind == Token::kWord &&
           (t.text == "reg" || t.text == "regs" || t.text == "regulation" ||
            t.text == "regulations");
}

bool is_clause_word(const Token& t) {
    return t.kind == Token::kWord && (t.text == "clause" || t.text == "clauses");
}

bool is_and_word(const Token& t) {
    return t.kind == Token::kWord && t.text == "and";
}

// Street numbers, years and clause decimals are not citations.
bool citation_number(long v) {
    return v >= 1 && v <= 999;
}

// Consumes "N", "N-M", "N, M", "N and M", "N & M" combinations starting at
// tokens[i]; returns the position after the list.
std::size_t consume_number_list(const std::vector<Token>& tokens, std::size_t i,
                                std::set<int>& out) {
    while (i < tokens.size() && tokens[i].kind == Token::kNumber) {
        const long first = tokens[i].value;
        ++i;
        // Range: N-M expands inclusively.
        if (i + 1 < tokens.size() && tokens[i].kind == Token::kDash &&
            tokens[i + 1].kind == Token::kNumber) {
            const long last = tokens[i + 1].value;
            if (citation_number(first) && citation_number(last) && first <= last) {
                for (long v = first; v <= last; ++v) out.insert(static_cast<int>(v));
            }
            i += 2;
        } else if (citation_number(first)) {
            out.insert(static_cast<int>(first));
        }

        // Separators between list entries.
        if (i < tokens.size() && tokens[i].kind == Token::kComma) {
            ++i;
            if (i < tokens.size() && is_and_word(tokens[i])) ++i;
        } else if (i < tokens.size() && (is_and_word(tokens[i]) || tokens[i].kind == Token::kAmp)) {
            ++i;
        } else {
            break;
        }
    }
    return i;
}

}  // namespace

std::set<int> extract_citations(const std::string& report_text) {
    const std::vector<Token> tokens = lex_citations(report_text);
    std::set<int> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_page_keyword(tokens[i])) {
            consume_number_list(tokens, i + 1, out);
        } else if (is_reg_keyword(tokens[i])) {
            std::size_t j = i + 1;
            if (j < tokens.size() && is_clause_word(tokens[j])) ++j;
            consume_number_list(tokens, j, out);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

Confusion confusion(const std::set<std::string>& gt, const std::set<std::string>& pred,
                    const std::vector<std::string>& universe) {
    const std::set<std::string> universe_set(universe.begin(), universe.end());
    Confusion c;
    for (const std::string& label : universe_set) {
        const bool in_gt = gt.contains(label);
        const bool in_pred = pred.contains(label);
        if (in_gt && in_pred) {
            ++c.tp;
        } else if (!in_gt && in_pred) {
            ++c.fp;
        } else if (in_gt && !in_pred) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    for (const std::string& p : pred) {
        if (!universe_set.contains(p)) ++c.fp;  // hallucinated ref: overflow FP
    }
    return c;
}

namespace {

struct Prf {
    double precision;
    double recall;
    double f1;
};

Prf prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    const std::size_t pred_size = tp + fp;
    const std::size_t gt_size = tp + fn;
    Prf r{};
    if (pred_size == 0 && gt_size == 0) {
        r.precision = r.recall = r.f1 = 1.0;  // both empty: vacuously perfect
        return r;
    }
    r.precision = pred_size == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_size);
    r.recall = gt_size == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gt_size);
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

}  // namespace

ComplianceMetrics compute_metrics(const GroundTruth& gt,
                                  const std::map<std::string, std::set<std::string>>& preds,
                                  Averaging averaging) {
    gt.validate();

    std::vector<std::string> missing;
    std::vector<std::string> extra;
    for (const auto& [id, refs] : gt.per_report) {
        if (!preds.contains(id)) missing.push_back(id);
    }
    for (const auto& [id, refs] : preds) {
        if (!gt.per_report.contains(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "report ids mismatch;";
        if (!missing.empty()) {
            msg += " missing predictions for:";
            for (const auto& id : missing) msg += " " + id;
            msg += ";";
        }
        if (!extra.empty()) {
            msg += " predictions without ground truth:";
            for (const auto& id : extra) msg += " " + id;
        }
        throw KeyMismatchError(msg, std::move(missing), std::move(extra));
    }

    const std::size_t n = gt.per_report.size();
    const std::size_t universe_size = gt.label_universe.size();

    std::size_t total_fp_fn = 0;
    std::size_t pooled_tp = 0, pooled_fp = 0, pooled_fn = 0;
    double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0;

    for (const auto& [id, truth] : gt.per_report) {
        const Confusion c = confusion(truth, preds.at(id), gt.label_universe);
        total_fp_fn += c.fp + c.fn;
        pooled_tp += c.tp;
        pooled_fp += c.fp;
        pooled_fn += c.fn;
        const Prf prf = prf_from_counts(c.tp, c.fp, c.fn);
        sum_p += prf.precision;
        sum_r += prf.recall;
        sum_f1 += prf.f1;
    }

    ComplianceMetrics metrics;
    metrics.averaging = averaging;
    metrics.n_reports = n;
    metrics.universe_size = universe_size;
    metrics.hamming_loss =
        n == 0 ? 0.0
               : static_cast<double>(total_fp_fn) / (static_cast<double>(n) * universe_size);

    if (averaging == Averaging::kSample) {
        metrics.precision = n == 0 ? 0.0 : sum_p / static_cast<double>(n);
        metrics.recall = n == 0 ? 0.0 : sum_r / static_cast<double>(n);
        metrics.f1 = n == 0 ? 0.0 : sum_f1 / static_cast<double>(n);
    } else {
        const Prf prf = prf_from_counts(pooled_tp, pooled_fp, pooled_fn);
        metrics.precision = prf.precision;
        metrics.recall = prf.recall;
        metrics.f1 = prf.f1;
    }
    return metrics;
}

// ---------------------------------------------------------------------------
// Rubric aggregation
// ---------------------------------------------------------------------------

RubricAggregate aggregate_rubric(const std::vector<RubricScore>& scores) {
    if (scores.empty()) throw EmptyInputError("no rubric scores to aggregate");

    const auto check = [](int v) {
        if (v < 1 || v > 10) {
            throw ConfigError("rubric score out of range 1..10: " + std::to_string(v));
        }
    };
    for (const RubricScore& s : scores) {
        check(s.completeness);
        check(s.relevance);
        check(s.accuracy);
        check(s.clarity_readability);
    }

    const auto stats = [&](auto field) {
        double sum = 0.0;
        for (const RubricScore& s : scores) sum += static_cast<double>(s.*field);
        const double mean = sum / static_cast<double>(scores.size());
        double sq = 0.0;
        for (const RubricScore& s : scores) {
            const double d = static_cast<double>(s.*field) - mean;
            sq += d * d;
        }
        return CriterionStats{mean, std::sqrt(sq / static_cast<double>(scores.size()))};
    };

    RubricAggregate agg;
    agg.completeness = stats(&RubricScore::completeness);
    agg.relevance = stats(&RubricScore::relevance);
    agg.accuracy = stats(&RubricScore::accuracy);
    agg.clarity_readability = stats(&RubricScore::clarity_readability);
    return agg;
}

// ---------------------------------------------------------------------------
// Run comparison & serialization
// ---------------------------------------------------------------------------

DeltaTable compare_runs(const ComplianceMetrics& a, const ComplianceMetrics& b) {
    if (a.averaging != b.averaging) {
        throw ModeMismatchError("averaging modes differ: " + to_string(a.averaging) + " vs " +
                                to_string(b.averaging));
    }
    if (a.universe_size != b.universe_size) {
        throw ModeMismatchError("universe sizes differ: " + std::to_string(a.universe_size) +
                                " vs " + std::to_string(b.universe_size));
    }
    DeltaTable table;
    table.averaging = a.averaging;
    const auto row = [](const char* name, double va, double vb) {
        MetricDelta d;
        d.name = name;
        d.run_a = va;
        d.run_b = vb;
        d.delta = vb - va;
        if (va != 0.0) d.relative_pct = (vb - va) / va * 100.0;
        return d;
    };
    table.rows.push_back(row("hamming_loss", a.hamming_loss, b.hamming_loss));
    table.rows.push_back(row("precision", a.precision, b.precision));
    table.rows.push_back(row("recall", a.recall, b.recall));
    table.rows.push_back(row("f1", a.f1, b.f1));
    return table;
}

std::string render_delta_table(const DeltaTable& table) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %10s %10s %10s %10s\n", "metric", "run_a", "run_b",
                  "delta", "rel_%");
    out += line;
    for (const MetricDelta& d : table.rows) {
        if (d.relative_pct) {
            std::snprintf(line, sizeof(line), "%-14s %10.4f %10.4f %+10.4f %+10.2f\n",
                          d.name.c_str(), d.run_a, d.run_b, d.delta, *d.relative_pct);
        } else {
            std::snprintf(line, sizeof(line), "%-14s %10.4f %10.4f %+10.4f %10s\n", d.name.c_str(),
                          d.run_a, d.run_b, d.delta, "n/a");
        }
        out += line;
    }
    return out;
}

std::string delta_table_to_json(const DeltaTable& table) {
    ordered_json rows = ordered_json::array();
    for (const MetricDelta& d : table.rows) {
        ordered_json row = {{"metric", d.name},
                            {"run_a", d.run_a},
                            {"run_b", d.run_b},
                            {"delta", d.delta}};
        if (d.relative_pct) {
            row["relative_pct"] = *d.relative_pct;
        } else {
            row["relative_pct"] = nullptr;
        }
        rows.push_back(std::move(row));
    }
    ordered_json doc = {{"averaging", to_string(table.averaging)}, {"metrics", rows}};
    return doc.dump(2) + "\n";
}

std::string metrics_to_json(const ComplianceMetrics& m) {
    ordered_json doc = {{"averaging", to_string(m.averaging)},
                        {"hamming_loss", m.hamming_loss},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1},
                        {"n_reports", m.n_reports},
                        {"universe_size", m.universe_size}};
    return doc.dump(2) + "\n";
}

ComplianceMetrics metrics_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unparsable metrics JSON: ") + e.what());
    }
    ComplianceMetrics m;
    try {
        m.averaging = averaging_from_string(doc.at("averaging").get<std::string>());
        m.hamming_loss = doc.at("hamming_loss").get<double>();
        m.precision = doc.at("precision").get<double>();
        m.recall = doc.at("recall").get<double>();
        m.f1 = doc.at("f1").get<double>();
        m.n_reports = doc.at("n_reports").get<std::size_t>();
        m.universe_size = doc.at("universe_size").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("metrics JSON missing fields: ") + e.what());
    }
    return m;
}

ComplianceMetrics load_metrics(const std::filesystem::path& path) {
    return metrics_from_json(read_text_file(path));
}

std::string rubric_aggregate_to_json(const RubricAggregate& aggregate) {
    const auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    const auto criterion = [&](const CriterionStats& s) {
        return ordered_json{{"mean", round2(s.mean)}, {"stddev", round2(s.stddev)}};
    };
    ordered_json doc = {{"completeness", criterion(aggregate.completeness)},
                        {"relevance", criterion(aggregate.relevance)},
                        {"accuracy", criterion(aggregate.accuracy)},
                        {"clarity_readability", criterion(aggregate.clarity_readability)}};
    return doc.dump(2) + "\n";
}

}  // namespace sitecheck
