#include "refine/harness.hpp"

#include <fstream>

#include "json.hpp"

namespace refine {

namespace {

using nlohmann::json;

json usage_to_json(const TokenUsage& usage) {
    auto field = [](const std::optional<std::int64_t>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return json{{"prompt", field(usage.prompt_tokens)},
                {"completion", field(usage.completion_tokens)},
                {"total", field(usage.total_tokens)}};
}

const json& require(const json& obj, const char* key, const char* where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw SchemaError(std::string(where) + " is missing \"" + key + "\"");
    }
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const char* where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) {
        throw SchemaError(std::string(where) + " field \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

int require_int(const json& obj, const char* key, const char* where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) {
        throw SchemaError(std::string(where) + " field \"" + key + "\" must be an integer");
    }
    return v.get<int>();
}

std::optional<std::int64_t> opt_count(const json& obj, const char* key, const char* where) {
    const json& v = require(obj, key, where);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_integer()) {
        throw SchemaError(std::string(where) + " field \"" + key +
                          "\" must be an integer or null");
    }
    return v.get<std::int64_t>();
}

TokenUsage usage_from_json(const json& obj, const char* where) {
    TokenUsage usage;
    usage.prompt_tokens = opt_count(obj, "prompt", where);
    usage.completion_tokens = opt_count(obj, "completion", where);
    usage.total_tokens = opt_count(obj, "total", where);
    return usage;
}

json answer_to_json(const Answer& answer) {
    return json{{"text", answer.text}, {"round", answer.round}};
}

Answer answer_from_json(const json& obj, const char* where) {
    return Answer{require_string(obj, "text", where), require_int(obj, "round", where)};
}

std::string_view verdict_name(Verdict verdict) {
    switch (verdict) {
    case Verdict::Previous: return "previous";
    case Verdict::Candidate: return "candidate";
    case Verdict::Tie: return "tie";
    }
    return "tie";
}

Verdict verdict_from_name(const std::string& name, const char* where) {
    if (name == "previous") return Verdict::Previous;
    if (name == "candidate") return Verdict::Candidate;
    if (name == "tie") return Verdict::Tie;
    throw SchemaError(std::string(where) + " has unknown vote \"" + name + "\"");
}

} // namespace

std::string transcript_to_json_line(const Transcript& transcript) {
    json records = json::array();
    for (const auto& record : transcript.records) {
        json r{{"round", record.round},
               {"candidate", answer_to_json(record.candidate)},
               {"accepted", record.accepted},
               {"tokens", usage_to_json(record.tokens)}};
        if (record.defect) r["defect"] = record.defect->text;
        if (record.vote) r["vote"] = verdict_name(record.vote->verdict);
        records.push_back(std::move(r));
    }

    json entries = json::array();
    for (const auto& entry : transcript.ledger.entries) {
        json e = usage_to_json(entry.usage);
        e["kind"] = std::string(to_string(entry.kind));
        e["round"] = entry.round;
        entries.push_back(std::move(e));
    }

    const json doc{
        {"query",
         {{"id", transcript.query.id},
          {"text", transcript.query.text},
          {"max_iterations", transcript.query.max_iterations}}},
        {"mode", std::string(to_string(transcript.mode))},
        {"initial", answer_to_json(transcript.initial)},
        {"records", std::move(records)},
        {"final", answer_to_json(transcript.final_answer)},
        {"stop_reason", std::string(to_string(transcript.stop_reason))},
        {"ledger", {{"entries", std::move(entries)}}},
    };
    return doc.dump();
}

Transcript transcript_from_json_line(const std::string& line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("transcript must be a JSON object");

    const json& query_obj = require(doc, "query", "transcript");
    Query query(require_string(query_obj, "id", "query"),
                require_string(query_obj, "text", "query"),
                require_int(query_obj, "max_iterations", "query"));

    const auto mode = mode_from_string(require_string(doc, "mode", "transcript"));
    if (!mode) throw SchemaError("transcript has unknown mode");

    const Answer initial = answer_from_json(require(doc, "initial", "transcript"), "initial");

    std::vector<IterationRecord> records;
    const json& records_json = require(doc, "records", "transcript");
    if (!records_json.is_array()) throw SchemaError("records must be an array");
    for (const auto& r : records_json) {
        IterationRecord record;
        record.round = require_int(r, "round", "record");
        record.candidate = answer_from_json(require(r, "candidate", "record"), "candidate");
        record.accepted = require(r, "accepted", "record").get<bool>();
        record.tokens = usage_from_json(require(r, "tokens", "record"), "record tokens");
        if (r.contains("defect")) {
            record.defect = DefectReport{r.at("defect").get<std::string>(), record.round};
        }
        if (r.contains("vote")) {
            record.vote =
                Vote{verdict_from_name(r.at("vote").get<std::string>(), "record")};
        }
        records.push_back(std::move(record));
    }

    const Answer final_answer =
        answer_from_json(require(doc, "final", "transcript"), "final");

    const auto stop =
        stop_reason_from_string(require_string(doc, "stop_reason", "transcript"));
    if (!stop) throw SchemaError("transcript has unknown stop_reason");

    CostLedger ledger;
    const json& ledger_obj = require(doc, "ledger", "transcript");
    const json& entries = require(ledger_obj, "entries", "ledger");
    if (!entries.is_array()) throw SchemaError("ledger entries must be an array");
    for (const auto& e : entries) {
        const auto kind = prompt_kind_from_string(require_string(e, "kind", "ledger entry"));
        if (!kind) throw SchemaError("ledger entry has unknown kind");
        ledger.add(*kind, require_int(e, "round", "ledger entry"),
                   usage_from_json(e, "ledger entry"));
    }

    return Transcript{std::move(query), *mode,      initial, std::move(records),
                      final_answer,     *stop, std::move(ledger)};
}

void write_transcripts(const std::vector<Transcript>& transcripts,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    for (const auto& t : transcripts) {
        out << transcript_to_json_line(t) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<Transcript> read_transcripts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::vector<Transcript> transcripts;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trimmed(line).empty()) continue;
        try {
            transcripts.push_back(transcript_from_json_line(line));
        } catch (const SchemaError& e) {
            throw SchemaError(path.string() + " line " + std::to_string(line_number) +
                              ": " + e.what());
        } catch (const std::exception& e) {
            throw SchemaError(path.string() + " line " + std::to_string(line_number) +
                              ": " + e.what());
        }
    }
    return transcripts;
}

} // namespace refine
