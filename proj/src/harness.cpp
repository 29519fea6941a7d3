#include "refine/harness.hpp"

#include "refine/engine.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace refine {

namespace {

using nlohmann::json;

constexpr PromptKind kAllKinds[] = {
    PromptKind::InitialAnswer, PromptKind::DefectAnalysis,
    PromptKind::GuidedOptimization, PromptKind::BlindOptimization, PromptKind::Vote,
};

std::optional<double> priced_amount(const TokenUsage& tokens, const ModelPrice& price) {
    if (!tokens.prompt_tokens || !tokens.completion_tokens) return std::nullopt;
    return static_cast<double>(*tokens.prompt_tokens) / 1000.0 * price.prompt_per_1k +
           static_cast<double>(*tokens.completion_tokens) / 1000.0 *
               price.completion_per_1k;
}

std::string count_or_dash(const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("?");
}

std::string money_or_unavailable(const std::optional<double>& v) {
    if (!v) return "unavailable";
    std::ostringstream out;
    out << std::fixed << std::setprecision(6) << *v;
    return out.str();
}

} // namespace

std::vector<CorpusItem> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open corpus file: " + path.string());
    }
    std::vector<CorpusItem> items;
    std::set<std::string> seen;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trimmed(line).empty()) continue;
        const std::string where = path.string() + " line " + std::to_string(line_number);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(where + ": not valid JSON: " + e.what());
        }
        if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() ||
            !doc.contains("question") || !doc["question"].is_string()) {
            throw SchemaError(where + ": corpus item needs string id and question");
        }
        CorpusItem item;
        item.id = doc["id"].get<std::string>();
        item.question = trimmed(doc["question"].get<std::string>());
        if (item.question.empty()) {
            throw SchemaError(where + ": question is empty");
        }
        if (doc.contains("reference_answer") && !doc["reference_answer"].is_null()) {
            if (!doc["reference_answer"].is_string()) {
                throw SchemaError(where + ": reference_answer must be a string");
            }
            item.reference_answer = doc["reference_answer"].get<std::string>();
        }
        if (!seen.insert(item.id).second) {
            throw SchemaError(where + ": duplicate corpus id \"" + item.id + "\"");
        }
        items.push_back(std::move(item));
    }
    if (items.empty()) {
        throw EmptyCorpus("corpus file has no items: " + path.string());
    }
    return items;
}

std::vector<Transcript> run_corpus(const std::vector<CorpusItem>& corpus,
                                   const RunConfig& config, Backend& backend) {
    if (corpus.empty()) {
        throw EmptyCorpus("run_corpus called with an empty corpus");
    }
    if (config.modes.empty()) {
        throw std::invalid_argument("run_corpus needs at least one mode");
    }
    if (config.concurrency < 1) {
        throw std::invalid_argument("concurrency limit must be >= 1");
    }
    if (config.max_iterations < 0) {
        throw std::invalid_argument("max_iterations must be >= 0");
    }

    struct Task {
        const CorpusItem* item;
        RefinementMode mode;
    };
    std::vector<Task> tasks;
    tasks.reserve(corpus.size() * config.modes.size());
    for (const auto& item : corpus) {
        for (const auto mode : config.modes) {
            tasks.push_back(Task{&item, mode});
        }
    }

    EngineOptions options;
    options.model = config.model;
    options.generation_temperature = config.generation_temperature;
    options.judging_temperature = config.judging_temperature;

    auto run_one = [&](const Task& task) {
        const Query query(task.item->id, task.item->question, config.max_iterations);
        return run_session(query, task.mode, backend, options);
    };

    std::vector<std::optional<Transcript>> results(tasks.size());
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), tasks.size());

    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            results[i] = run_one(tasks[i]);
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = cursor.fetch_add(1);
                    if (i >= tasks.size()) return;
                    try {
                        results[i] = run_one(tasks[i]);
                    } catch (...) {
                        std::scoped_lock lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<Transcript> transcripts;
    transcripts.reserve(tasks.size());
    for (auto& r : results) {
        transcripts.push_back(std::move(*r));
    }
    return transcripts;
}

PriceSheet PriceSheet::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open price sheet: " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("price sheet is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) {
        throw SchemaError("price sheet must be an object of model -> prices");
    }
    PriceSheet sheet;
    for (const auto& [model, value] : doc.items()) {
        if (!value.is_object() || !value.contains("prompt_per_1k") ||
            !value.contains("completion_per_1k") ||
            !value["prompt_per_1k"].is_number() ||
            !value["completion_per_1k"].is_number()) {
            throw SchemaError("price sheet entry \"" + model +
                              "\" needs numeric prompt_per_1k and completion_per_1k");
        }
        ModelPrice price{value["prompt_per_1k"].get<double>(),
                         value["completion_per_1k"].get<double>()};
        if (price.prompt_per_1k < 0 || price.completion_per_1k < 0) {
            throw SchemaError("price sheet entry \"" + model + "\" has a negative price");
        }
        sheet.models.emplace(model, price);
    }
    return sheet;
}

CostReport cost_report(const std::vector<Transcript>& transcripts,
                       const PriceSheet& prices,
                       const std::optional<std::string>& batch_model) {
    CostReport report;
    report.batch_model = batch_model;
    report.batch_model_priced =
        batch_model.has_value() && prices.models.count(*batch_model) > 0;

    std::map<RefinementMode, ModeReport> by_mode;
    for (const auto& transcript : transcripts) {
        auto [it, inserted] = by_mode.try_emplace(transcript.mode);
        ModeReport& mode_report = it->second;
        if (inserted) {
            mode_report.mode = transcript.mode;
            mode_report.total = TokenUsage::of(0, 0);
            mode_report.initial_only = TokenUsage::of(0, 0);
        }
        ++mode_report.sessions;
        for (const auto& entry : transcript.ledger.entries) {
            auto [kind_it, kind_new] = mode_report.by_kind.try_emplace(entry.kind);
            if (kind_new) kind_it->second.tokens = TokenUsage::of(0, 0);
            ++kind_it->second.calls;
            kind_it->second.tokens += entry.usage;
            mode_report.total += entry.usage;
            if (entry.kind == PromptKind::InitialAnswer) {
                mode_report.initial_only += entry.usage;
            }
            if (entry.round >= 1) {
                auto [round_it, round_new] =
                    mode_report.per_round_tokens.try_emplace(entry.round);
                if (round_new) round_it->second = TokenUsage::of(0, 0);
                round_it->second += entry.usage;
            }
        }
        mode_report.entries_with_unknown_usage +=
            transcript.ledger.entries_with_unknown_usage();
    }

    for (auto& [mode, mode_report] : by_mode) {
        report.modes.push_back(std::move(mode_report));
    }

    for (const auto& [model, price] : prices.models) {
        auto& per_mode = report.priced[model];
        for (const auto& mode_report : report.modes) {
            per_mode[mode_report.mode] =
                ModeCost{priced_amount(mode_report.total, price),
                         priced_amount(mode_report.initial_only, price)};
        }
    }
    return report;
}

std::string format_report(const CostReport& report) {
    std::ostringstream out;
    if (report.modes.empty()) {
        out << "no transcripts\n";
        return out.str();
    }

    for (const auto& mode_report : report.modes) {
        out << "mode " << to_string(mode_report.mode) << ": "
            << mode_report.sessions << " session(s)\n";
        out << "  calls:";
        for (const auto kind : kAllKinds) {
            const auto it = mode_report.by_kind.find(kind);
            const std::size_t calls = it == mode_report.by_kind.end() ? 0 : it->second.calls;
            out << ' ' << to_string(kind) << '=' << calls;
        }
        out << '\n';
        out << "  tokens: prompt=" << count_or_dash(mode_report.total.prompt_tokens)
            << " completion=" << count_or_dash(mode_report.total.completion_tokens)
            << " total=" << count_or_dash(mode_report.total.total_tokens);
        if (mode_report.entries_with_unknown_usage > 0) {
            out << " (" << mode_report.entries_with_unknown_usage
                << " call(s) with unreported usage)";
        }
        out << '\n';
        if (!mode_report.per_round_tokens.empty()) {
            out << "  per-iteration tokens:";
            for (const auto& [round, usage] : mode_report.per_round_tokens) {
                out << " r" << round << '=' << count_or_dash(usage.total_tokens);
            }
            out << '\n';
        }
    }

    if (!report.priced.empty()) {
        out << "pricing (full loop vs a single initial call):\n";
        for (const auto& [model, per_mode] : report.priced) {
            for (const auto& [mode, cost] : per_mode) {
                out << "  " << model << " / " << to_string(mode)
                    << ": full=" << money_or_unavailable(cost.full_loop)
                    << " single_call=" << money_or_unavailable(cost.single_call) << '\n';
            }
        }
    }
    if (report.batch_model) {
        out << "batch model " << *report.batch_model << ": "
            << (report.batch_model_priced ? "priced above"
                                          : "not in price sheet; monetary view unavailable")
            << '\n';
    }
    return out.str();
}

} // namespace refine
