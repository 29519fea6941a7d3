#pragma once

#include "refine/backend.hpp"
#include "refine/domain.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace refine {

/// Line-oriented file problem; what() names the offending line.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCorpus : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- transcript persistence (one JSON object per line) ----

std::string transcript_to_json_line(const Transcript& transcript);
Transcript transcript_from_json_line(const std::string& line);

void write_transcripts(const std::vector<Transcript>& transcripts,
                       const std::filesystem::path& path);
/// Blank lines are skipped; any malformed line raises SchemaError with its
/// line number.
std::vector<Transcript> read_transcripts(const std::filesystem::path& path);

// ---- corpus ----

struct CorpusItem {
    std::string id;
    std::string question;
    std::optional<std::string> reference_answer; // annotation only, never sent

    friend bool operator==(const CorpusItem&, const CorpusItem&) = default;
};

/// JSONL of {id, question, reference_answer?}; ids must be unique.
std::vector<CorpusItem> read_corpus(const std::filesystem::path& path);

// ---- batch runner ----

struct RunConfig {
    std::vector<RefinementMode> modes{RefinementMode::Full};
    int max_iterations = 3;
    std::string model = "gpt-3.5-turbo";
    double generation_temperature = 0.7;
    double judging_temperature = 0.0;
    int concurrency = 1;
};

/// One transcript per (item x mode), in corpus-major order regardless of
/// completion order. Sessions run concurrently up to config.concurrency.
/// Backend failures land in the affected transcript, never abort the batch.
std::vector<Transcript> run_corpus(const std::vector<CorpusItem>& corpus,
                                   const RunConfig& config, Backend& backend);

// ---- cost reporting ----

struct ModelPrice {
    double prompt_per_1k = 0.0;
    double completion_per_1k = 0.0;
};

struct PriceSheet {
    std::map<std::string, ModelPrice> models;

    static PriceSheet from_file(const std::filesystem::path& path);
};

struct KindStat {
    std::size_t calls = 0;
    TokenUsage tokens;
};

struct ModeCost {
    std::optional<double> full_loop;   // whole ledger at this model's prices
    std::optional<double> single_call; // initial-answer entries only
};

struct ModeReport {
    RefinementMode mode = RefinementMode::Full;
    std::size_t sessions = 0;
    std::map<PromptKind, KindStat> by_kind;
    TokenUsage total;
    TokenUsage initial_only;
    std::size_t entries_with_unknown_usage = 0;
    std::map<int, TokenUsage> per_round_tokens; // round index -> summed round usage
};

struct CostReport {
    std::vector<ModeReport> modes;
    // model name -> per-mode costs; covers every model in the price sheet.
    std::map<std::string, std::map<RefinementMode, ModeCost>> priced;
    std::optional<std::string> batch_model;
    bool batch_model_priced = false;
};

/// Aggregates ledgers by mode and prices them under every model in the
/// sheet. A batch model absent from the sheet leaves its monetary view
/// unavailable; token columns are always emitted.
CostReport cost_report(const std::vector<Transcript>& transcripts,
                       const PriceSheet& prices,
                       const std::optional<std::string>& batch_model = std::nullopt);

std::string format_report(const CostReport& report);

} // namespace refine
