#include "zyn/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "zyn/io.hpp"
#include "zyn/json_io.hpp"
#include "zyn/metrics.hpp"
#include "zyn/mock_server.hpp"
#include "zyn/qd.hpp"
#include "zyn/selector.hpp"
#include "zyn/service.hpp"

namespace zyn::cli {

using json = nlohmann::json;

namespace {

struct BackendFlags {
    std::string url;
    bool mock = false;
    std::string model;
    int max_in_flight = 0;
    bool logprobs = false;
};

struct RewardFlags {
    std::string variant = "bt";
    double k_s = 10.0;
    double k_c = 0.5;
    bool normalize = false;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
    cmd->add_option("--backend-url", f.url, "Completions server base URL (overrides ZYN_BACKEND_URL)");
    cmd->add_flag("--mock", f.mock, "Use the deterministic in-process mock critic");
    cmd->add_option("--model", f.model, "Model id sent to the backend (overrides ZYN_MODEL_ID)");
    cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent backend requests")->check(CLI::PositiveNumber);
    cmd->add_flag("--logprobs", f.logprobs, "Backend reports log-probabilities rather than raw logits");
}

void add_reward_flags(CLI::App* cmd, RewardFlags& f) {
    cmd->add_option("--variant", f.variant, "Reward formula")
        ->check(CLI::IsMember({"raw", "bt", "log_odds", "scaled"}));
    cmd->add_option("--ks", f.k_s, "Scale for --variant scaled");
    cmd->add_option("--kc", f.k_c, "Center for --variant scaled");
    cmd->add_flag("--normalize-weights", f.normalize, "Normalize question weights to sum to 1");
}

BackendConfig resolve_backend(const BackendFlags& f) {
    BackendConfig cfg;
    apply_env_overrides(cfg);
    if (!f.url.empty()) {
        cfg.base_url = f.url;
        cfg.mock = false;
    }
    if (f.mock) cfg.mock = true;
    if (!f.model.empty()) cfg.model_id = f.model;
    if (f.max_in_flight > 0) cfg.max_in_flight = f.max_in_flight;
    cfg.scores_are_logprobs = f.logprobs;
    if (!cfg.mock && cfg.base_url.empty())
        throw Error(ErrorCode::InvalidConfig, "no backend: pass --backend-url, --mock or set ZYN_BACKEND_URL");
    validate(cfg);
    return cfg;
}

RewardSpec resolve_spec(const RewardFlags& f) {
    RewardSpec spec{parse_variant(f.variant), f.k_s, f.k_c};
    validate(spec);
    return spec;
}

std::string id_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::vector<Question> load_questions(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, path + ": " + e.what());
    }
    try {
        return parse_questions(j);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, path + ": " + e.what());
    }
}

void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
    if (out_path.empty()) out << content;
    else io::write_file_atomic(out_path, content);
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
    std::string input, questions, out;
    BackendFlags backend;
    RewardFlags reward;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
    const auto lines = io::read_jsonl(a.input);
    std::vector<std::string> ids, texts;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        if (!l.is_object() || !l.contains("id") || !l.contains("text") || !l.at("text").is_string())
            throw Error(ErrorCode::InvalidArgument, a.input + ": record " + std::to_string(i + 1) +
                                                        " needs 'id' and string 'text'");
        std::string id = id_string(l.at("id"));
        if (!seen.insert(id).second) throw Error(ErrorCode::InvalidArgument, "duplicate id '" + id + "'");
        ids.push_back(std::move(id));
        texts.push_back(l.at("text").get<std::string>());
    }

    BoNConfig bon;
    bon.ensemble = {load_questions(a.questions), a.reward.normalize};
    bon.spec = resolve_spec(a.reward);
    bon.n = std::max<std::size_t>(texts.size(), 1);
    const auto client = LogitClient::from_config(resolve_backend(a.backend));
    const auto cands = score_candidates(texts, bon, client);

    std::string body;
    std::size_t failed = 0;
    for (const auto& c : cands) {
        if (c.failed()) {
            ++failed;
            err << "failed: id=" << ids[c.index] << ": " << *c.failure << "\n";
            continue;
        }
        json rec{{"id", ids[c.index]},
                 {"text", c.text},
                 {"reward", c.aggregate},
                 {"per_question", c.per_question},
                 {"variant", variant_name(bon.spec.variant)}};
        body += rec.dump() + "\n";
    }
    emit(a.out, body, out);
    err << "scored " << cands.size() - failed << "/" << cands.size() << ", failed " << failed << "\n";
    return failed > 0 ? kExitPartial : kExitOk;
}

// ---- bon -------------------------------------------------------------------

struct BonArgs {
    std::string input, questions, out;
    BackendFlags backend;
    RewardFlags reward;
};

int cmd_bon(const BonArgs& a, std::ostream& out, std::ostream& err) {
    const auto lines = io::read_jsonl(a.input);
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> groups;  // group -> (id, text)
    std::set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        if (!l.is_object() || !l.contains("id") || !l.contains("group") || !l.contains("text") ||
            !l.at("text").is_string())
            throw Error(ErrorCode::InvalidArgument, a.input + ": record " + std::to_string(i + 1) +
                                                        " needs 'id', 'group' and string 'text'");
        std::string id = id_string(l.at("id"));
        if (!seen.insert(id).second) throw Error(ErrorCode::InvalidArgument, "duplicate id '" + id + "'");
        const std::string g = id_string(l.at("group"));
        if (!groups.contains(g)) group_order.push_back(g);
        groups[g].emplace_back(std::move(id), l.at("text").get<std::string>());
    }
    if (group_order.empty()) throw Error(ErrorCode::EmptyInput, a.input + " has no records");

    BoNConfig bon;
    bon.ensemble.normalize_weights = a.reward.normalize;
    bon.ensemble.questions = a.questions.empty() ? std::vector<Question>{{"Is this movie review positive?"}}
                                                 : load_questions(a.questions);
    bon.spec = resolve_spec(a.reward);
    const auto client = LogitClient::from_config(resolve_backend(a.backend));

    std::string body;
    bool empty_group = false;
    bool partial = false;
    for (const auto& g : group_order) {
        const auto& members = groups.at(g);
        std::vector<std::string> texts;
        for (const auto& [id, text] : members) texts.push_back(text);
        bon.n = texts.size();
        const auto cands = score_candidates(texts, bon, client);
        for (const auto& c : cands) {
            if (c.failed()) {
                partial = true;
                err << "failed: group=" << g << " id=" << members[c.index].first << ": " << *c.failure << "\n";
            }
        }
        try {
            const auto& best = select_best(cands);
            body += json{{"group", g}, {"best_id", members[best.index].first}, {"reward", best.aggregate}}.dump() +
                    "\n";
        } catch (const Error& e) {
            empty_group = true;
            err << "group " << g << ": " << e.what() << "\n";
        }
    }
    emit(a.out, body, out);
    if (empty_group) return kExitError;
    return partial ? kExitPartial : kExitOk;
}

// ---- qd --------------------------------------------------------------------

struct QdArgs {
    std::string config, out = "qd_out", gen_url;
    BackendFlags backend;
    std::uint64_t seed = 0;
    int generations = 0;
};

int cmd_qd(const QdArgs& a, std::ostream& out, std::ostream& err) {
    qd::QdConfig cfg;
    GenerationBackendConfig gen;
    std::uint64_t seed = a.seed;
    try {
        const json j = json::parse(io::read_file(a.config));
        cfg = j.get<qd::QdConfig>();
        if (j.contains("generation")) gen = j.at("generation").get<GenerationBackendConfig>();
        if (j.contains("seed") && a.seed == 0) seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, a.config + ": " + e.what());
    }
    if (a.generations > 0) cfg.total_generations = a.generations;
    qd::validate(cfg);

    const BackendConfig scoring = resolve_backend(a.backend);
    if (a.backend.mock) gen.mock = true;
    if (!a.gen_url.empty()) {
        gen.base_url = a.gen_url;
        gen.mock = false;
    } else if (!gen.mock && gen.base_url.empty()) {
        gen.base_url = scoring.base_url;
    }
    const auto generator = make_generator(gen);
    const auto client = LogitClient::from_config(scoring);

    const auto result = qd::run_search(cfg, *generator, client, seed);
    const std::filesystem::path dir = a.out;
    std::string log;
    for (const auto& rec : result.log) {
        log += qd::iteration_to_jsonl(rec) + "\n";
        if (rec.error) err << "iteration " << rec.iter << " failed: " << *rec.error << "\n";
    }
    io::write_file_atomic(dir / "run_log.jsonl", log);
    io::write_file_atomic(dir / "archive.json", qd::archive_to_json(result.archive, cfg));
    io::write_file_atomic(dir / "metrics.json", qd::metrics_to_json(result.metrics));
    out << qd::format_metrics_table(result.metrics);
    return result.failed_iterations > 0 ? kExitPartial : kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string scores, ratings;
    bool pooled = false;
    bool per_task = false;
};

struct Joined {
    std::string task;
    double reward = 0.0;
    double rating = 0.0;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    auto index = [](const std::string& path, const char* field) {
        std::map<std::string, std::pair<double, std::string>> by_id;
        for (const auto& l : io::read_jsonl(path)) {
            if (!l.is_object() || !l.contains("id") || !l.contains(field) || !l.at(field).is_number())
                throw Error(ErrorCode::InvalidArgument, path + ": records need 'id' and numeric '" + field + "'");
            const std::string id = id_string(l.at("id"));
            std::string task = l.contains("task") ? id_string(l.at("task")) : "";
            if (!by_id.emplace(id, std::make_pair(l.at(field).get<double>(), std::move(task))).second)
                throw Error(ErrorCode::InvalidArgument, path + ": duplicate id '" + id + "'");
        }
        return by_id;
    };
    const auto scores = index(a.scores, "reward");
    const auto ratings = index(a.ratings, "rating");

    std::vector<Joined> rows;
    for (const auto& [id, s] : scores) {
        const auto it = ratings.find(id);
        if (it == ratings.end()) throw Error(ErrorCode::InvalidArgument, "id '" + id + "' has no rating");
        rows.push_back({s.second.empty() ? it->second.second : s.second, s.first, it->second.first});
    }
    if (ratings.size() != scores.size()) {
        for (const auto& [id, r] : ratings) {
            if (!scores.contains(id)) throw Error(ErrorCode::InvalidArgument, "id '" + id + "' has no score");
        }
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no joined records");

    std::vector<double> rewards;
    for (const auto& r : rows) rewards.push_back(r.reward);
    const auto sum = metrics::summarize(rewards);
    char line[256];
    std::snprintf(line, sizeof line, "n = %zu\nreward: %.4f ± %.4f (min %.4f, max %.4f)\n", sum.count, sum.mean,
                  sum.std, sum.min, sum.max);
    out << line;

    try {
        if (a.per_task) {
            std::map<std::string, metrics::PairedScores> tasks;
            for (const auto& r : rows) {
                auto& p = tasks[r.task.empty() ? "default" : r.task];
                p.rewards.push_back(r.reward);
                p.ratings.push_back(r.rating);
            }
            double total = 0.0;
            for (const auto& [task, p] : tasks) {
                const double rho = metrics::spearman_rho(p);
                total += rho;
                std::snprintf(line, sizeof line, "spearman_rho[%s] = %.4f (n = %zu)\n", task.c_str(), rho,
                              p.rewards.size());
                out << line;
            }
            std::snprintf(line, sizeof line, "spearman_rho (mean over %zu tasks) = %.4f\n", tasks.size(),
                          total / static_cast<double>(tasks.size()));
            out << line;
        } else {
            metrics::PairedScores p;
            for (const auto& r : rows) {
                p.rewards.push_back(r.reward);
                p.ratings.push_back(r.rating);
            }
            std::snprintf(line, sizeof line, "spearman_rho (pooled) = %.4f\n", metrics::spearman_rho(p));
            out << line;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateInput && e.code() != ErrorCode::EmptyInput) throw;
        err << e.what() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}

// ---- serve / mock-server ---------------------------------------------------

struct ServeArgs {
    std::string config, listen;
    BackendFlags backend;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
    service::ServiceConfig cfg =
        a.config.empty() ? service::service_config_from_json("{}") : service::load_service_config(a.config);
    if (!a.listen.empty()) cfg.listen_addr = a.listen;
    if (!a.backend.url.empty()) {
        cfg.backend.base_url = a.backend.url;
        cfg.backend.mock = false;
    }
    if (a.backend.mock) cfg.backend.mock = true;
    if (!a.backend.model.empty()) cfg.backend.model_id = a.backend.model;
    if (a.backend.max_in_flight > 0) cfg.backend.max_in_flight = a.backend.max_in_flight;
    if (a.backend.logprobs) cfg.backend.scores_are_logprobs = true;
    service::RewardService svc(cfg);
    out << "listening on " << cfg.listen_addr << std::endl;
    svc.listen_blocking();
    return kExitOk;
}

int cmd_mock_server(const std::string& listen, std::ostream& out) {
    const auto [host, port] = service::parse_listen_addr(listen);
    MockCompletionServer server;
    out << "mock completions server on " << listen << std::endl;
    server.listen_blocking(host, port);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zero-shot yes/no reward scoring"};
    app.name("zyn");
    app.require_subcommand(1);

    ScoreArgs score;
    auto* c_score = app.add_subcommand("score", "Score {id, text} JSONL records");
    c_score->add_option("input", score.input, "Input JSONL")->required();
    c_score->add_option("questions", score.questions, "Questions JSON array of {text, polarity, weight}")->required();
    c_score->add_option("--out", score.out, "Output JSONL (stdout when omitted)");
    add_backend_flags(c_score, score.backend);
    add_reward_flags(c_score, score.reward);

    BonArgs bon;
    auto* c_bon = app.add_subcommand("bon", "Best-of-N selection within each 'group'");
    c_bon->add_option("input", bon.input, "Input JSONL of {id, group, text}")->required();
    c_bon->add_option("--questions", bon.questions, "Questions JSON (default: movie-review positivity)");
    c_bon->add_option("--out", bon.out, "Output JSONL (stdout when omitted)");
    add_backend_flags(c_bon, bon.backend);
    add_reward_flags(c_bon, bon.reward);

    QdArgs qd_args;
    auto* c_qd = app.add_subcommand("qd", "Quality-diversity search");
    c_qd->add_option("config", qd_args.config, "QD config JSON")->required();
    c_qd->add_option("--out", qd_args.out, "Output directory");
    c_qd->add_option("--seed", qd_args.seed, "Schedule and generation seed");
    c_qd->add_option("--gen-url", qd_args.gen_url, "Generation server base URL (default: --backend-url)");
    c_qd->add_option("--generations", qd_args.generations, "Override total_generations")
        ->check(CLI::PositiveNumber);
    add_backend_flags(c_qd, qd_args.backend);

    AnalyzeArgs an;
    auto* c_an = app.add_subcommand("analyze", "Reward summary and Spearman correlation with ratings");
    c_an->add_option("scores", an.scores, "Scores JSONL of {id, reward, task?}")->required();
    c_an->add_option("ratings", an.ratings, "Ratings JSONL of {id, rating, task?}")->required();
    auto* pooled = c_an->add_flag("--pooled", an.pooled, "One correlation over all records (default)");
    c_an->add_flag("--per-task", an.per_task, "Correlation per task, then their mean")->excludes(pooled);

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP reward service");
    c_serve->add_option("--config", serve.config, "Service config JSON");
    c_serve->add_option("--listen", serve.listen, "host:port");
    add_backend_flags(c_serve, serve.backend);

    std::string mock_listen = "127.0.0.1:8099";
    auto* c_mock = app.add_subcommand("mock-server", "Run the mock completions backend over HTTP");
    c_mock->add_option("--listen", mock_listen, "host:port");

    std::vector<std::string> argv_store{"zyn"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (c_score->parsed()) return cmd_score(score, out, err);
        if (c_bon->parsed()) return cmd_bon(bon, out, err);
        if (c_qd->parsed()) return cmd_qd(qd_args, out, err);
        if (c_an->parsed()) return cmd_analyze(an, out, err);
        if (c_serve->parsed()) return cmd_serve(serve, out);
        if (c_mock->parsed()) return cmd_mock_server(mock_listen, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace zyn::cli
