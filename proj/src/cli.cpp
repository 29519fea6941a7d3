#include "refine/cli.hpp"

#include "refine/engine.hpp"
#include "refine/harness.hpp"
#include "refine/http_backend.hpp"
#include "refine/prompts.hpp"
#include "refine/scripted_backend.hpp"

#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

namespace refine {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct BackendFlags {
    std::string backend = "http";
    std::string script_path;
    std::string model = "gpt-3.5-turbo";
    std::string base_url;
    double temperature = 0.7;
    double judge_temperature = 0.0;
};

void add_backend_flags(CLI::App& cmd, BackendFlags& flags) {
    cmd.add_option("--backend", flags.backend, "Backend: http or scripted")
        ->check(CLI::IsMember({"http", "scripted"}));
    cmd.add_option("--script", flags.script_path,
                   "Reply script file (required with --backend scripted)");
    cmd.add_option("--model", flags.model, "Model name sent on the wire");
    cmd.add_option("--base-url", flags.base_url,
                   "Server base URL (default from REFINE_BASE_URL)");
    cmd.add_option("--temperature", flags.temperature,
                   "Sampling temperature for answer generation")
        ->check(CLI::Range(0.0, 2.0));
    cmd.add_option("--judge-temperature", flags.judge_temperature,
                   "Sampling temperature for defect analysis and voting")
        ->check(CLI::Range(0.0, 2.0));
}

std::unique_ptr<Backend> make_backend(const BackendFlags& flags) {
    if (flags.backend == "scripted") {
        if (flags.script_path.empty()) {
            throw CLI::ValidationError("--script is required with --backend scripted");
        }
        return std::make_unique<ScriptedBackend>(BackendScript::from_file(flags.script_path));
    }
    HttpConfig config = HttpConfig::from_env();
    if (!flags.base_url.empty()) config.base_url = flags.base_url;
    return std::make_unique<HttpBackend>(std::move(config));
}

EngineOptions engine_options(const BackendFlags& flags, bool verbose, std::ostream& err) {
    EngineOptions options;
    options.model = flags.model;
    options.generation_temperature = flags.temperature;
    options.judging_temperature = flags.judge_temperature;
    if (verbose) {
        options.observer = [&err](const SessionEvent& event) {
            err << "[round " << event.round << "] " << to_string(event.kind) << " -> "
                << event.response << '\n';
        };
    }
    return options;
}

std::vector<RefinementMode> parse_modes(const std::string& spec) {
    std::vector<RefinementMode> modes;
    std::stringstream stream(spec);
    std::string token;
    while (std::getline(stream, token, ',')) {
        const auto mode = mode_from_string(trimmed(token));
        if (!mode) {
            throw CLI::ValidationError("unknown mode \"" + token +
                                       "\" (expected full, blind or reckless)");
        }
        modes.push_back(*mode);
    }
    if (modes.empty()) {
        throw CLI::ValidationError("--modes must name at least one mode");
    }
    return modes;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-refining chat completions: ask once, let the model "
                 "critique, revise and judge its own answer.",
                 "refine"};
    app.require_subcommand(1);

    // ask
    auto* ask = app.add_subcommand("ask", "Run one question through the refinement loop");
    std::string question;
    int max_iters = 3;
    std::string mode_name = "full";
    bool verbose = false;
    std::string transcript_out;
    BackendFlags ask_flags;
    ask->add_option("--question", question, "The question to ask")->required();
    ask->add_option("--max-iters", max_iters, "Optimization round budget")
        ->check(CLI::NonNegativeNumber);
    ask->add_option("--mode", mode_name, "full, blind or reckless")
        ->check(CLI::IsMember({"full", "blind", "reckless"}));
    ask->add_flag("--verbose", verbose, "Show the hidden optimization loop on stderr");
    ask->add_option("--out", transcript_out, "Write the session transcript to this JSONL path");
    add_backend_flags(*ask, ask_flags);

    // corpus
    auto* corpus_cmd = app.add_subcommand("corpus", "Batch-run a corpus of questions");
    std::string corpus_file;
    std::string modes_spec = "full";
    std::string corpus_out;
    int concurrency = 1;
    int corpus_max_iters = 3;
    BackendFlags corpus_flags;
    corpus_cmd->add_option("--file", corpus_file, "Corpus JSONL file")->required();
    corpus_cmd->add_option("--modes", modes_spec, "Comma-separated refinement modes");
    corpus_cmd->add_option("--out", corpus_out, "Transcript JSONL output path")->required();
    corpus_cmd->add_option("--max-iters", corpus_max_iters, "Optimization round budget")
        ->check(CLI::NonNegativeNumber);
    corpus_cmd->add_option("--concurrency", concurrency, "Concurrent session limit")
        ->check(CLI::PositiveNumber);
    add_backend_flags(*corpus_cmd, corpus_flags);

    // report
    auto* report_cmd = app.add_subcommand("report", "Summarize cost from transcripts");
    std::string report_in;
    std::string prices_file;
    std::string report_model;
    report_cmd->add_option("--in", report_in, "Transcript JSONL file")->required();
    report_cmd->add_option("--prices", prices_file, "Price sheet JSON file");
    report_cmd->add_option("--model", report_model,
                           "Model the transcripts were produced with");

    // templates
    auto* templates_cmd =
        app.add_subcommand("templates", "Print the built-in prompt templates");

    try {
        std::vector<const char*> argv;
        argv.push_back("refine");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*templates_cmd) {
            for (const auto kind :
                 {PromptKind::InitialAnswer, PromptKind::DefectAnalysis,
                  PromptKind::GuidedOptimization, PromptKind::BlindOptimization,
                  PromptKind::Vote}) {
                out << to_string(kind) << ":\n" << templates::display(kind) << "\n\n";
            }
            return kExitOk;
        }

        if (*ask) {
            if (trimmed(question).empty()) {
                throw CLI::ValidationError("--question must not be empty");
            }
            const auto backend = make_backend(ask_flags);
            const Query query("cli", trimmed(question), max_iters);
            const auto mode = *mode_from_string(mode_name);
            const Transcript transcript =
                run_session(query, mode, *backend, engine_options(ask_flags, verbose, err));
            if (!transcript_out.empty()) {
                write_transcripts({transcript}, transcript_out);
            }
            out << transcript.final_answer.text << '\n';
            if (transcript.stop_reason == StopReason::BackendError) {
                err << "session aborted by a backend error; best known answer shown\n";
                return kExitRuntime;
            }
            if (verbose) {
                err << "stop: " << to_string(transcript.stop_reason) << " after "
                    << transcript.records.size() << " round(s), "
                    << transcript.ledger.total_calls() << " call(s)\n";
            }
            return kExitOk;
        }

        if (*corpus_cmd) {
            const auto backend = make_backend(corpus_flags);
            const auto items = read_corpus(corpus_file);
            RunConfig config;
            config.modes = parse_modes(modes_spec);
            config.max_iterations = corpus_max_iters;
            config.model = corpus_flags.model;
            config.generation_temperature = corpus_flags.temperature;
            config.judging_temperature = corpus_flags.judge_temperature;
            config.concurrency = concurrency;
            const auto transcripts = run_corpus(items, config, *backend);
            write_transcripts(transcripts, corpus_out);
            err << "wrote " << transcripts.size() << " transcript(s) to " << corpus_out
                << '\n';
            return kExitOk;
        }

        if (*report_cmd) {
            const auto transcripts = read_transcripts(report_in);
            PriceSheet prices;
            if (!prices_file.empty()) {
                prices = PriceSheet::from_file(prices_file);
            }
            const std::optional<std::string> batch_model =
                report_model.empty() ? std::nullopt
                                     : std::optional<std::string>(report_model);
            out << format_report(cost_report(transcripts, prices, batch_model));
            return kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        err << "refine: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "refine: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace refine
