// enroute -- entropy-gated model routing: cost projection, trace replay,
// live routing, and leaderboard analytics.
//
// Session exit codes: 0 clean finish, 10 resumable halt, 20 corrupt state
// (config drift or unusable checkpoint).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enroute/analytics.hpp"
#include "enroute/backend.hpp"
#include "enroute/cost.hpp"
#include "enroute/entropy.hpp"
#include "enroute/format.hpp"
#include "enroute/http_backend.hpp"
#include "enroute/leaderboard.hpp"
#include "enroute/routing.hpp"
#include "enroute/session.hpp"
#include "enroute/trace.hpp"

namespace fs = std::filesystem;
using namespace enroute;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitResumableHalt = 10;
constexpr int kExitCorruptState = 20;

constexpr double kProfileInputTokens = 13953.0;
constexpr double kProfileOutputTokens = 125.0;
constexpr double kDefaultSupportInputPrice = 5.0;
constexpr double kDefaultSupportOutputPrice = 25.0;
constexpr std::int64_t kTableRateMicro = 5'940'000;   // $5.94 per million

void render_table(std::ostream& out, const std::vector<std::vector<std::string>>& grid) {
    if (grid.empty()) return;
    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    }
}

// --- cost -------------------------------------------------------------

struct CostArgs {
    std::string rate = "table";
    std::int64_t tokens = 0;
    int k = 0;
    std::vector<double> prices{kDefaultSupportInputPrice, kDefaultSupportOutputPrice};
    std::vector<double> profile{kProfileInputTokens, kProfileOutputTokens};
    std::string format = "table";
};

Rational resolve_rate(const CostArgs& args, std::string& note) {
    if (args.rate == "table") return Rational(kTableRateMicro);
    auto pricing = PricingModel::from_dollars(args.prices[0], args.prices[1]);
    TokenProfile profile{args.profile[0], args.profile[1]};
    Rational computed = blended_rate(pricing, profile);
    if (args.rate == "profile") {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "note: profile-blended rate $%.4f/M differs from the table preset $%.2f/M",
                      computed.to_double() / 1e6, kTableRateMicro / 1e6);
        note = buf;
        return computed;
    }
    // explicit dollars per million
    try {
        return Rational(round_half_up(std::stod(args.rate) * 1e6));
    } catch (const std::exception&) {
        raise(ErrorKind::domain_error, "unknown rate '" + args.rate + "'");
    }
}

int run_cost(const CostArgs& args) {
    std::string note;
    Rational rate = resolve_rate(args, note);

    if (args.tokens > 0) {
        std::optional<int> k;
        if (args.k > 0) k = args.k;
        auto report = project_cost(args.tokens, k, rate);
        if (args.format == "csv") {
            std::cout << "tokens,k,rate_per_million,cost_micro,cost,reduction\n";
            std::cout << args.tokens << "," << (k ? std::to_string(*k) : "") << ","
                      << fixed_str(rate.to_double() / 1e6, 4) << ","
                      << report.cost_micro_rounded() << "," << money_cents(report.total_cost_micro)
                      << "," << fixed_str(report.reduction.to_double() * 100, 0) << "%\n";
        } else {
            std::vector<std::vector<std::string>> grid;
            grid.push_back({"Tokens", "k", "Rate/M", "Cost", "Reduction"});
            grid.push_back({with_commas(args.tokens), k ? std::to_string(*k) : "-",
                            "$" + fixed_str(rate.to_double() / 1e6, 4),
                            money_cents(report.total_cost_micro),
                            k ? fixed_str(report.reduction.to_double() * 100, 0) + "%" : "-"});
            render_table(std::cout, grid);
        }
    } else {
        auto rows = build_cost_table(rate);
        std::cout << (args.format == "csv" ? render_cost_table_csv(rows)
                                           : render_cost_table(rows));
    }
    if (!note.empty()) std::cout << note << '\n';
    return kExitClean;
}

// --- shared session plumbing ------------------------------------------

struct SessionArgs {
    std::string session_dir;
    double tau = 0.03;
    int k = 2;
    bool trigger_on_low = false;
    double alpha = 0.7;
    double beta = 0.3;
    std::uint64_t vocab_size = 131072;
    std::string base_model = "base";
    std::string support_model = "support";
    std::vector<double> support_prices{kDefaultSupportInputPrice, kDefaultSupportOutputPrice};
    std::vector<double> base_prices{0.0, 0.0};
    std::int64_t checkpoint_every = 25;
    std::int64_t max_steps = 0;
    bool resume = false;
};

RoutingConfig config_from_args(const SessionArgs& args) {
    RoutingConfig cfg;
    cfg.tau = args.tau;
    cfg.k = args.k;
    cfg.trigger_on_high = !args.trigger_on_low;
    cfg.entropy_params = EntropyParams(args.alpha, args.beta, args.vocab_size);
    cfg.base_model_id = args.base_model;
    cfg.support_model_id = args.support_model;
    return cfg;
}

// On resume, the stored snapshot supplies the config; explicit flags that
// drifted from it will fail the checkpoint hash check downstream.
RoutingConfig load_or_build_config(const SessionArgs& args, const CLI::App& cmd) {
    fs::path snapshot = fs::path(args.session_dir) / "config.json";
    if (!args.resume || !fs::exists(snapshot)) return config_from_args(args);
    std::ifstream in(snapshot);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("routing"))
        raise(ErrorKind::corrupt_checkpoint, "unreadable config snapshot " + snapshot.string());
    RoutingConfig cfg = routing_config_from_json(j["routing"]);
    // explicit flags override the snapshot (and must then match the hash)
    if (cmd.count("--tau")) cfg.tau = args.tau;
    if (cmd.count("--k")) cfg.k = args.k;
    if (cmd.count("--vocab-size"))
        cfg.entropy_params =
            EntropyParams(cfg.entropy_params.alpha, cfg.entropy_params.beta, args.vocab_size);
    return cfg;
}

int finish_session(const SessionResult& result, const std::string& dir) {
    std::cout << "session dir:       " << dir << '\n';
    std::cout << "status:            "
              << (result.status == SessionStatus::clean_finish ? "clean finish"
                                                               : "resumable halt")
              << '\n';
    if (!result.error.empty()) std::cout << "halt reason:       " << result.error << '\n';
    std::cout << "steps executed:    " << result.steps_executed << '\n';
    std::cout << "steps total:       " << result.checkpoint.inference_log_offset << '\n';
    std::cout << "switches:          " << result.checkpoint.routing_state.switch_count << '\n';
    std::cout << "support decisions: " << result.checkpoint.support_decisions << '\n';
    std::cout << "total tokens:      " << with_commas(result.checkpoint.total_tokens) << '\n';
    std::cout << "metered cost:      " << money_cents(result.cost.total_cost_micro) << " ("
              << with_commas(result.cost.cost_micro_rounded()) << " micro-dollars)\n";
    return result.status == SessionStatus::clean_finish ? kExitClean : kExitResumableHalt;
}

int run_or_resume(SessionRunner& runner, WorkSource& work, const SessionArgs& args) {
    auto result = args.resume ? runner.resume(work) : runner.run(work);
    return finish_session(result, args.session_dir);
}

// --- replay ------------------------------------------------------------

int run_replay(const SessionArgs& args, const std::string& trace_path, const CLI::App& cmd) {
    RoutingConfig cfg = load_or_build_config(args, cmd);
    auto records = load_trace(trace_path);
    if (records.empty()) {
        std::cout << "trace is empty; nothing to replay\n";
        return kExitClean;
    }

    PricingTable pricing{
        {cfg.base_model_id,
         PricingModel::from_dollars(args.base_prices[0], args.base_prices[1], cfg.base_model_id)},
        {cfg.support_model_id,
         PricingModel::from_dollars(args.support_prices[0], args.support_prices[1],
                                    cfg.support_model_id)}};

    SessionOptions opts;
    opts.session_id = fs::path(args.session_dir).filename().string();
    opts.checkpoint_every = args.checkpoint_every;
    if (args.max_steps > 0) opts.stop_after_steps = args.max_steps;

    SessionRunner runner(cfg, pricing, RetryPolicy{}, args.session_dir, opts);
    runner.add_backend(std::make_shared<ReplayBackend>(cfg.base_model_id, records));
    runner.add_backend(std::make_shared<ReplayBackend>(cfg.support_model_id, records));

    StepCountSource work(static_cast<std::int64_t>(records.size()));
    return run_or_resume(runner, work, args);
}

// --- route -------------------------------------------------------------

class PromptFileSource : public WorkSource {
public:
    explicit PromptFileSource(const std::string& path) {
        std::ifstream in(path);
        if (!in) raise(ErrorKind::io_error, "cannot open prompts file " + path);
        std::string line;
        while (std::getline(in, line)) prompts_.push_back(line);
    }

    std::optional<WorkStep> step(std::int64_t s) override {
        if (s < 1 || static_cast<std::size_t>(s) > prompts_.size()) return std::nullopt;
        // size hint only; providers report authoritative counts
        return WorkStep{prompts_[static_cast<std::size_t>(s) - 1].size() / 4};
    }

    std::size_t size() const { return prompts_.size(); }

private:
    std::vector<std::string> prompts_;
};

std::shared_ptr<Backend> backend_from_json(const nlohmann::json& j) {
    BackendDescriptor desc;
    desc.model_id = j.at("model_id").get<std::string>();
    desc.kind = j.at("kind").get<std::string>() == "live" ? BackendKind::live : BackendKind::replay;
    if (j.contains("endpoint")) desc.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("trace_path")) desc.trace_path = j.at("trace_path").get<std::string>();
    desc.validate();
    if (desc.kind == BackendKind::live) return std::make_shared<HttpBackend>(desc);
    return std::make_shared<ReplayBackend>(desc);
}

int run_route(SessionArgs& args, const std::string& backends_path, const std::string& prompts_path,
              std::int64_t steps, const CLI::App& cmd) {
    std::ifstream in(backends_path);
    if (!in) raise(ErrorKind::io_error, "cannot open backends config " + backends_path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        raise(ErrorKind::domain_error, "backends config is not valid JSON");

    auto base = backend_from_json(j.at("base"));
    auto support = backend_from_json(j.at("support"));
    args.base_model = base->model_id();
    args.support_model = support->model_id();
    RoutingConfig cfg = load_or_build_config(args, cmd);

    PricingTable pricing;
    const nlohmann::json price_entries = j.value("pricing", nlohmann::json::object());
    for (const auto& [model, prices] : price_entries.items()) {
        pricing[model] = PricingModel::from_dollars(prices.value("input_per_million", 0.0),
                                                    prices.value("output_per_million", 0.0), model);
    }
    pricing.try_emplace(cfg.base_model_id, PricingModel::from_dollars(0, 0, cfg.base_model_id));
    pricing.try_emplace(cfg.support_model_id,
                        PricingModel::from_dollars(kDefaultSupportInputPrice,
                                                   kDefaultSupportOutputPrice,
                                                   cfg.support_model_id));

    SessionOptions opts;
    opts.session_id = fs::path(args.session_dir).filename().string();
    opts.checkpoint_every = args.checkpoint_every;
    if (args.max_steps > 0) opts.stop_after_steps = args.max_steps;

    SessionRunner runner(cfg, pricing, RetryPolicy{}, args.session_dir, opts);
    runner.add_backend(base);
    runner.add_backend(support);

    if (!prompts_path.empty()) {
        PromptFileSource work(prompts_path);
        return run_or_resume(runner, work, args);
    }
    StepCountSource work(steps);
    return run_or_resume(runner, work, args);
}

// --- analyze -----------------------------------------------------------

struct AnalyzeArgs {
    std::string input;
    std::string table = "growth";
    double split = 7.0;
    double end = 48.0;
    double threshold = 10000.0;
    double at = -1.0;
    int field_size = 0;
    std::string solves_path;
    std::string emit_plot_data;
    std::string format = "table";
    std::string team;
};

std::map<std::string, double> load_solves(const std::string& path) {
    std::map<std::string, double> solves;
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io_error, "cannot open solves file " + path);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;   // team,solves
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        solves[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return solves;
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

double default_at(const std::vector<LeaderboardSeries>& all, double at) {
    if (at >= 0) return at;
    double last = 0.0;
    for (const auto& s : all) last = std::max(last, s.last_time());
    return last;
}

void emit_plot_data(const std::vector<LeaderboardSeries>& all, const AnalyzeArgs& args) {
    fs::create_directories(args.emit_plot_data);
    for (const auto& s : all) {
        std::ofstream out(fs::path(args.emit_plot_data) / (sanitize_filename(s.team) + ".csv"));
        out << "t_hours,score\n";
        for (const auto& p : s.points) out << fixed_str(p.t_hours, 3) << ',' << p.score << '\n';
    }
    auto ranked = rank_trajectory(all, default_at(all, args.at),
                                  args.field_size > 0 ? std::optional<int>(args.field_size)
                                                      : std::nullopt);
    std::ofstream out(fs::path(args.emit_plot_data) / "percentiles.csv");
    out << "team,score,rank,percentile_outperformed\n";
    for (const auto& r : ranked)
        out << r.team << ',' << r.score << ',' << r.rank << ','
            << fixed_str(r.percentile_outperformed * 100, 1) << '\n';
    std::cout << "plot data written to " << args.emit_plot_data << '\n';
}

int run_analyze(const AnalyzeArgs& args) {
    auto all = load_leaderboard(args.input);
    std::vector<const LeaderboardSeries*> selected;
    for (const auto& s : all)
        if (args.team.empty() || s.team == args.team) selected.push_back(&s);
    if (selected.empty()) raise(ErrorKind::out_of_range, "no matching team in " + args.input);

    std::map<std::string, double> solves;
    if (!args.solves_path.empty()) solves = load_solves(args.solves_path);

    bool csv = args.format == "csv";

    if (args.table == "growth") {
        std::vector<std::vector<std::string>> grid;
        std::string split_h = fixed_str(args.split, 0) + "h";
        std::string end_h = fixed_str(args.end, 0) + "h";
        grid.push_back({"Team", "1h", split_h, "24h", end_h, "Pts/h (0-" + split_h + ")",
                        "Pts/h (" + split_h + "-" + end_h + ")", "Early/Late"});
        if (csv)
            std::cout << "team,score_1h,score_split,score_24h,score_end,early_pts_per_h,"
                         "late_pts_per_h,early_late_ratio\n";
        for (const auto* s : selected) {
            double early = window_velocity(*s, 0.0, args.split);
            double late = window_velocity(*s, args.split, args.end);
            double ratio = early_late_ratio(*s, args.split, args.end);
            if (csv) {
                std::cout << s->team << ',' << s->score_at(1.0) << ',' << s->score_at(args.split)
                          << ',' << s->score_at(24.0) << ',' << s->score_at(args.end) << ','
                          << fixed_str(early, 1) << ',' << fixed_str(late, 1) << ','
                          << fixed_str(ratio, 2) << '\n';
            } else {
                grid.push_back({s->team, with_commas(round_half_up(s->score_at(1.0))),
                                with_commas(round_half_up(s->score_at(args.split))),
                                with_commas(round_half_up(s->score_at(24.0))),
                                with_commas(round_half_up(s->score_at(args.end))),
                                with_commas(round_half_up(early)), with_commas(round_half_up(late)),
                                fixed_str(ratio, 1) + "x"});
            }
        }
        if (!csv) render_table(std::cout, grid);
    } else if (args.table == "velocity") {
        std::vector<std::vector<std::string>> grid;
        std::string thr = with_commas(static_cast<std::int64_t>(args.threshold));
        grid.push_back(
            {"Team", "Velocity (pts/h)", "Time to " + thr, "Points in 1h", "Avg pts/solve"});
        if (csv)
            std::cout << "team,velocity_pts_per_h,time_to_threshold_h,points_1h,"
                         "avg_pts_per_solve\n";
        for (const auto* s : selected) {
            std::optional<double> team_solves;
            if (auto it = solves.find(s->team); it != solves.end()) team_solves = it->second;
            auto report =
                make_velocity_report(*s, args.split, args.end, args.threshold, team_solves);
            std::string vel = "-", ttt = "-";
            if (report.time_to_threshold_hours) {
                double t = *report.time_to_threshold_hours;
                ttt = fixed_str(t, 2) + "h";
                vel = t == 0.0 ? "inf" : with_commas(round_half_up(args.threshold / t));
            }
            std::string aps = "-";
            if (report.avg_points_per_solve)
                aps = with_commas(round_half_up(*report.avg_points_per_solve));
            if (csv) {
                std::cout << s->team << ',' << vel << ',' << ttt << ',' << s->score_at(1.0) << ','
                          << aps << '\n';
            } else {
                grid.push_back(
                    {s->team, vel, ttt, with_commas(round_half_up(s->score_at(1.0))), aps});
            }
        }
        if (!csv) render_table(std::cout, grid);
    } else if (args.table == "rank") {
        auto ranked = rank_trajectory(all, default_at(all, args.at),
                                      args.field_size > 0 ? std::optional<int>(args.field_size)
                                                          : std::nullopt);
        std::vector<std::vector<std::string>> grid;
        grid.push_back({"Rank", "Team", "Score", "Outperformed"});
        if (csv) std::cout << "rank,team,score,percentile_outperformed\n";
        for (const auto& r : ranked) {
            if (csv) {
                std::cout << r.rank << ',' << r.team << ',' << r.score << ','
                          << fixed_str(r.percentile_outperformed * 100, 1) << '\n';
            } else {
                grid.push_back({std::to_string(r.rank), r.team,
                                with_commas(round_half_up(r.score)),
                                fixed_str(r.percentile_outperformed * 100, 1) + "%"});
            }
        }
        if (!csv) render_table(std::cout, grid);
    } else {
        raise(ErrorKind::domain_error, "unknown table '" + args.table + "'");
    }

    if (!args.emit_plot_data.empty()) emit_plot_data(all, args);
    return kExitClean;
}

// --- calibrate ----------------------------------------------------------

int run_calibrate(const std::string& trace_path, double alpha, double beta,
                  std::uint64_t vocab_size) {
    auto records = load_trace(trace_path);
    if (records.empty()) raise(ErrorKind::empty_sequence, "trace is empty");
    EntropyParams params(alpha, beta, vocab_size);

    std::vector<double> es;
    for (const auto& rec : records) es.push_back(make_signal(rec, params).e_combined);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < es.size(); ++i)
        if (es[i] > es[argmax]) argmax = i;
    double max1 = es[argmax];
    double max2 = -1.0;
    for (std::size_t i = 0; i < es.size(); ++i)
        if (i != argmax) max2 = std::max(max2, es[i]);

    std::cout << "signals:          " << es.size() << '\n';
    std::cout << "max e_combined:   " << fixed_str(max1, 6) << " (inference " << argmax + 1
              << ")\n";
    if (max2 < 0) {
        std::cout << "single-signal trace; any tau <= " << fixed_str(max1, 6)
                  << " triggers once\n";
        return kExitClean;
    }
    std::cout << "runner-up:        " << fixed_str(max2, 6) << '\n';
    if (max2 == max1) {
        std::cout << "no unique spike: the top signals tie; no single-trigger tau exists\n";
        return kExitClean;
    }
    double suggested = 0.5 * (max1 + max2);
    int triggers = 0;
    for (double e : es) triggers += e >= suggested;
    std::cout << "suggested tau:    " << fixed_str(suggested, 6)
              << "  (midpoint of the top two; triggers " << triggers << " of " << es.size()
              << ")\n";
    return kExitClean;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy-gated model routing toolkit"};
    app.require_subcommand(1);

    // cost
    CostArgs cost_args;
    auto* cost_cmd = app.add_subcommand("cost", "project token costs under k-hold gating");
    cost_cmd->add_option("--rate", cost_args.rate,
                         "rate preset 'table' ($5.94/M), 'profile' (blended from prices), or "
                         "explicit dollars per million");
    cost_cmd->add_option("--tokens", cost_args.tokens, "project a single token volume");
    cost_cmd->add_option("--k", cost_args.k, "support-hold length (1-100)");
    cost_cmd->add_option("--prices", cost_args.prices, "support prices $in,$out per million")
        ->expected(2)
        ->delimiter(',');
    cost_cmd->add_option("--profile", cost_args.profile, "token profile in,out per inference")
        ->expected(2)
        ->delimiter(',');
    cost_cmd->add_option("--format", cost_args.format, "table or csv")
        ->check(CLI::IsMember({"table", "csv"}));

    // shared session flags
    auto add_session_flags = [](CLI::App* cmd, SessionArgs& args) {
        cmd->add_option("--session-dir", args.session_dir, "session state directory")->required();
        cmd->add_option("--tau", args.tau, "combined-entropy threshold");
        cmd->add_option("--k", args.k, "support-hold length");
        cmd->add_flag("--trigger-on-low", args.trigger_on_low,
                      "activate support when e_combined <= tau instead of >=");
        cmd->add_option("--alpha", args.alpha, "token-entropy weight");
        cmd->add_option("--beta", args.beta, "confidence-entropy weight");
        cmd->add_option("--vocab-size", args.vocab_size, "vocabulary size for entropy scaling");
        cmd->add_option("--checkpoint-every", args.checkpoint_every, "steps between checkpoints");
        cmd->add_option("--max-steps", args.max_steps, "stop after N steps (still resumable)");
        cmd->add_flag("--resume", args.resume, "continue from the newest checkpoint");
    };

    // replay
    SessionArgs replay_args;
    std::string replay_trace;
    auto* replay_cmd = app.add_subcommand("replay", "route a recorded trace through the policy");
    replay_cmd->add_option("--trace", replay_trace, "trace file (jsonl)")->required();
    add_session_flags(replay_cmd, replay_args);
    replay_cmd->add_option("--base-model", replay_args.base_model, "base model id");
    replay_cmd->add_option("--support-model", replay_args.support_model, "support model id");
    replay_cmd->add_option("--support-prices", replay_args.support_prices,
                           "support $in,$out per million")
        ->expected(2)
        ->delimiter(',');
    replay_cmd->add_option("--base-prices", replay_args.base_prices, "base $in,$out per million")
        ->expected(2)
        ->delimiter(',');

    // route
    SessionArgs route_args;
    std::string backends_path, prompts_path;
    std::int64_t route_steps = 0;
    auto* route_cmd = app.add_subcommand("route", "run a live routed session");
    route_cmd->add_option("--backends", backends_path, "backends config (json)")->required();
    route_cmd->add_option("--prompts", prompts_path, "file with one opaque prompt per line");
    route_cmd->add_option("--steps", route_steps, "number of work steps when no prompts file");
    add_session_flags(route_cmd, route_args);

    // analyze
    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "leaderboard velocity analytics");
    analyze_cmd->add_option("--input", analyze_args.input, "leaderboard csv (team,t_hours,score)")
        ->required();
    analyze_cmd->add_option("--table", analyze_args.table, "growth, velocity, or rank")
        ->check(CLI::IsMember({"growth", "velocity", "rank"}));
    analyze_cmd->add_option("--split", analyze_args.split, "early/late split hour");
    analyze_cmd->add_option("--end", analyze_args.end, "window end hour");
    analyze_cmd->add_option("--threshold", analyze_args.threshold, "score threshold");
    analyze_cmd->add_option("--at", analyze_args.at, "ranking time (default: last sample)");
    analyze_cmd->add_option("--field-size", analyze_args.field_size,
                            "declared field size when the csv is a sample");
    analyze_cmd->add_option("--solves", analyze_args.solves_path, "per-team solve counts csv");
    analyze_cmd->add_option("--team", analyze_args.team, "restrict to one team");
    analyze_cmd->add_option("--emit-plot-data", analyze_args.emit_plot_data,
                            "write (t,score) and percentile series to this directory");
    analyze_cmd->add_option("--format", analyze_args.format, "table or csv")
        ->check(CLI::IsMember({"table", "csv"}));

    // calibrate
    std::string calibrate_trace;
    double cal_alpha = 0.7, cal_beta = 0.3;
    std::uint64_t cal_vocab = 131072;
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "suggest a single-trigger tau for a trace");
    calibrate_cmd->add_option("--trace", calibrate_trace, "trace file (jsonl)")->required();
    calibrate_cmd->add_option("--alpha", cal_alpha, "token-entropy weight");
    calibrate_cmd->add_option("--beta", cal_beta, "confidence-entropy weight");
    calibrate_cmd->add_option("--vocab-size", cal_vocab, "vocabulary size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cost_cmd) return run_cost(cost_args);
        if (*replay_cmd) return run_replay(replay_args, replay_trace, *replay_cmd);
        if (*route_cmd)
            return run_route(route_args, backends_path, prompts_path, route_steps, *route_cmd);
        if (*analyze_cmd) return run_analyze(analyze_args);
        if (*calibrate_cmd) return run_calibrate(calibrate_trace, cal_alpha, cal_beta, cal_vocab);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.kind() == ErrorKind::config_mismatch || e.kind() == ErrorKind::corrupt_checkpoint)
            return kExitCorruptState;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitClean;
}
