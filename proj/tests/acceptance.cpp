// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion pins its tolerances in code; golden values come from the
// shipped fixtures.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "enroute/analytics.hpp"
#include "enroute/cost.hpp"
#include "enroute/entropy.hpp"
#include "enroute/leaderboard.hpp"
#include "enroute/routing.hpp"
#include "enroute/session.hpp"
#include "enroute/trace.hpp"

using namespace enroute;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Check {
    std::string name;
    bool passed = true;
    std::string detail;
    double seconds = 0.0;

    void expect(bool ok, const std::string& what) {
        if (!ok && passed) {
            passed = false;
            detail = what;
        }
    }
};

void criterion(const std::string& name, double budget_seconds,
               const std::function<void(Check&)>& body) {
    Check check;
    check.name = name;
    auto started = Clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.expect(false, std::string("exception: ") + e.what());
    }
    check.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    if (budget_seconds > 0 && check.seconds > budget_seconds)
        check.expect(false, "exceeded " + std::to_string(budget_seconds) + "s budget");
    std::printf("[%s] %-28s (%.2fs)%s%s\n", check.passed ? "PASS" : "FAIL", name.c_str(),
                check.seconds, check.detail.empty() ? "" : " -- ", check.detail.c_str());
    if (!check.passed) ++g_failures;
}

std::string fixture(const std::string& rel) {
    return std::string(ENROUTE_FIXTURE_DIR) + "/" + rel;
}

std::string run_cli(const std::string& args, int& exit_code) {
    std::string cmd = std::string(ENROUTE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return {};
    }
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

bool line_has_cells(const std::string& output, const std::vector<std::string>& cells) {
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t pos = 0;
        bool all = true;
        for (const auto& cell : cells) {
            auto found = line.find(cell, pos);
            // cells are whitespace-delimited: demand exact token boundaries
            while (found != std::string::npos) {
                bool left_ok = found == 0 || line[found - 1] == ' ';
                std::size_t end = found + cell.size();
                bool right_ok = end >= line.size() || line[end] == ' ';
                if (left_ok && right_ok) break;
                found = line.find(cell, found + 1);
            }
            if (found == std::string::npos) {
                all = false;
                break;
            }
            pos = found + cell.size();
        }
        if (all) return true;
    }
    return false;
}

bool within_print(double value, double printed, double unit) {
    double rounded = std::floor(value / unit + 0.5) * unit;
    return std::abs(rounded - printed) <= unit + 1e-9;
}

fs::path temp_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() /
               ("enroute_acc_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<InferenceRecord> synthetic_records(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> perp(1.0, 1.7);
    std::uniform_int_distribution<std::uint64_t> toks(500, 2000);
    std::vector<InferenceRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        InferenceRecord rec;
        rec.sequence_id = static_cast<std::int64_t>(i + 1);
        rec.token_logprobs.assign(4, -std::log(perp(rng)));
        rec.output_tokens = 4;
        rec.input_tokens = toks(rng);
        records.push_back(std::move(rec));
    }
    return records;
}

RoutingConfig golden_config() {
    RoutingConfig cfg;   // tau 0.03, k 2, vocab 131072, alpha/beta 0.7/0.3
    cfg.base_model_id = "base-a";
    cfg.support_model_id = "support-b";
    return cfg;
}

PricingTable golden_pricing() {
    return {{"base-a", PricingModel::from_dollars(0, 0, "base-a")},
            {"support-b", PricingModel::from_dollars(5, 25, "support-b")}};
}

// --- criteria ----------------------------------------------------------

void cost_table_reproduction(Check& check) {
    int exit_code = 0;
    std::string out = run_cli("cost --rate table", exit_code);
    check.expect(exit_code == 0, "cost command failed");
    const std::vector<std::vector<std::string>> rows = {
        {"support off", "-", "$5.94", "$59.40", "$594", "$5,940", "-"},
        {"support on", "20", "$1.19", "$11.88", "$119", "$1,188", "80%"},
        {"support on", "10", "$0.59", "$5.94", "$59", "$594", "90%"},
        {"support on", "5", "$0.30", "$2.97", "$30", "$297", "95%"},
        {"support on", "2", "$0.12", "$1.19", "$12", "$119", "98%"},
    };
    for (const auto& row : rows)
        check.expect(line_has_cells(out, row), "missing row with cells starting " + row[2]);
}

void blended_rate_discrepancy(Check& check) {
    auto rate = blended_rate(PricingModel::from_dollars(5, 25), TokenProfile{13953, 125});
    check.expect(std::abs(rate.to_double() / 1e6 - 5.1776) <= 1e-4,
                 "blended rate is " + std::to_string(rate.to_double() / 1e6));
    check.expect(rate != Rational(5'940'000), "profile rate should differ from the table rate");
    int exit_code = 0;
    std::string out = run_cli("cost --rate profile", exit_code);
    check.expect(exit_code == 0, "cost --rate profile failed");
    check.expect(out.find("$5.1776/M") != std::string::npos, "profile rate not printed");
    check.expect(out.find("$5.94/M") != std::string::npos, "table preset not printed");
    check.expect(out.find("differs") != std::string::npos, "discrepancy not flagged");
}

void reference_trace_entropy(Check& check) {
    auto records = load_trace(fixture("traces/reference_session.jsonl"));
    check.expect(records.size() == 10, "expected 10 records");
    const std::array<std::pair<double, double>, 10> plotted = {{{1.14, 0.92},
                                                                {1.12, 0.95},
                                                                {1.11, 0.94},
                                                                {1.12, 0.93},
                                                                {1.11, 0.93},
                                                                {1.09, 0.95},
                                                                {1.21, 0.91},
                                                                {1.52, 0.78},
                                                                {1.40, 0.81},
                                                                {1.29, 0.87}}};
    double sum_p = 0, sum_prob = 0, max_p = 0;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        double p = perplexity(records[i]);
        double prob = avg_token_prob(records[i]);
        check.expect(std::abs(p - plotted[i].first) <= 0.005,
                     "perplexity off at inference " + std::to_string(i + 1));
        check.expect(std::abs(prob - plotted[i].second) <= 0.005,
                     "avg prob off at inference " + std::to_string(i + 1));
        sum_p += p;
        sum_prob += prob;
        if (p > max_p) {
            max_p = p;
            argmax = i + 1;
        }
    }
    check.expect(std::abs(sum_prob / 10 - 0.9017) <= 0.01, "mean avg prob off");
    check.expect(std::abs(sum_p / 10 - 1.21) <= 0.01, "mean perplexity off");
    check.expect(argmax == 8, "uncertainty argmax not at inference 8");
}

void routing_golden_run(Check& check) {
    auto records = load_trace(fixture("traces/reference_session.jsonl"));
    auto dir = temp_dir("golden");
    SessionRunner runner(golden_config(), golden_pricing(), RetryPolicy{}, dir, {});
    runner.add_backend(std::make_shared<ReplayBackend>("base-a", records));
    runner.add_backend(std::make_shared<ReplayBackend>("support-b", records));
    StepCountSource work(10);
    auto result = runner.run(work);

    check.expect(result.status == SessionStatus::clean_finish, "session did not finish");
    check.expect(result.checkpoint.routing_state.switch_count == 1, "expected exactly one switch");

    std::ifstream in(dir / "decisions.jsonl");
    std::string line;
    int step = 0;
    while (std::getline(in, line)) {
        ++step;
        auto j = nlohmann::json::parse(line);
        bool support = j["model"] == "support-b";
        check.expect(support == (step >= 9),
                     "wrong model at step " + std::to_string(step));
    }
    check.expect(step == 10, "expected 10 decisions");

    std::int64_t expected_micro = 0;
    for (std::size_t i = 8; i < 10; ++i)
        expected_micro += static_cast<std::int64_t>(records[i].input_tokens) * 5 +
                          static_cast<std::int64_t>(records[i].output_tokens) * 25;
    check.expect(result.cost.cost_micro_rounded() == expected_micro,
                 "metered cost " + std::to_string(result.cost.cost_micro_rounded()) +
                     " != " + std::to_string(expected_micro));
    fs::remove_all(dir);
}

void leaderboard_goldens(Check& check) {
    auto dragos = load_leaderboard(fixture("leaderboards/dragos_ot_2025.csv"));
    struct GrowthRow {
        const char* team;
        double early, late, ratio;
    };
    for (const GrowthRow& row : std::initializer_list<GrowthRow>{
             {"CAI", 1671, 176, 9.5},
             {"Gr1dGuardi4ns", 1243, 273, 4.6},
             {"hxteam", 1157, 288, 4.0},
             {"OTóż.to", 1243, 273, 4.6},
             {"Adamastor", 1557, 195, 8.0},
             {"TugaPwners", 1557, 195, 8.0}}) {
        const auto& s = find_series(dragos, row.team);
        check.expect(within_print(window_velocity(s, 0, 7), row.early, 1),
                     std::string(row.team) + ": early velocity off");
        check.expect(within_print(window_velocity(s, 7, 48), row.late, 1),
                     std::string(row.team) + ": late velocity off");
        check.expect(within_print(early_late_ratio(s, 7, 48), row.ratio, 0.1),
                     std::string(row.team) + ": early/late ratio off");
    }

    struct VelocityRow {
        const char* team;
        double velocity, time_to_10k;
    };
    for (const VelocityRow& row : std::initializer_list<VelocityRow>{
             {"CAI", 1846, 5.42},
             {"Gr1dGuardi4ns", 1338, 7.47},
             {"Adamastor", 1789, 5.59},
             {"TugaPwners", 1714, 5.84},
             {"OTóż.to", 1402, 7.13},
             {"hxteam", 491, 20.37}}) {
        const auto& s = find_series(dragos, row.team);
        check.expect(within_print(time_to_threshold(s, 10000), row.time_to_10k, 0.01),
                     std::string(row.team) + ": time to 10K off");
        check.expect(within_print(velocity_to_threshold(s, 10000), row.velocity, 1),
                     std::string(row.team) + ": velocity off");
    }

    auto neurogrid = load_leaderboard(fixture("leaderboards/neurogrid_2025.csv"));
    auto ranked = rank_trajectory(neurogrid, 1e9);
    check.expect(ranked.size() == 5, "expected 5 neurogrid teams");
    check.expect(ranked[0].score - ranked[1].score == 1925.0, "final margin is not 1,925");
    check.expect(within_print(solve_rate(44, 8.5), 5.2, 0.1), "solve rate 44/8.5 off");
    const auto& winner = find_series(neurogrid, ranked[0].team);
    check.expect(within_print(solve_rate(winner.final_score(), winner.last_time()), 787, 1),
                 "average velocity off");
}

void property_suites(Check& check) {
    // (a) AM-GM: mean token probability dominates 1/perplexity
    {
        std::mt19937_64 rng(808);
        std::uniform_int_distribution<std::size_t> len(1, 64);
        std::uniform_real_distribution<double> lp(-8.0, 0.0);
        for (int i = 0; i < 1000; ++i) {
            InferenceRecord rec;
            std::size_t n = len(rng);
            for (std::size_t t = 0; t < n; ++t) rec.token_logprobs.push_back(lp(rng));
            rec.output_tokens = n;
            double p = perplexity(rec);
            check.expect(avg_token_prob(rec) >= 1.0 / p - 1e-12,
                         "AM-GM violated on random trace");
            if (!check.passed) return;
        }
    }

    // (b) combined-entropy fixed point and upper bound on a 100x100 grid
    {
        EntropyParams params;
        for (int i = 1; i <= 100; ++i) {
            double h = i / 100.0;
            check.expect(std::abs(combined_entropy(h, h, params) - h) <= 1e-12,
                         "fixed point violated");
            for (int jj = 1; jj <= 100; ++jj) {
                double hp = i / 100.0, hc = jj / 100.0;
                double e = combined_entropy(hp, hc, params);
                check.expect(
                    e <= std::min(hp / params.alpha, hc / params.beta) + 1e-12,
                    "harmonic bound violated");
            }
            if (!check.passed) return;
        }
    }

    // (c) determinism and exact k-length holds over 10,000 random sequences
    {
        std::mt19937_64 rng(1906);
        std::uniform_real_distribution<double> e(0.0, 1.0);
        std::uniform_int_distribution<int> klen(1, 8);
        std::uniform_int_distribution<int> slen(1, 50);
        for (int trial = 0; trial < 10000; ++trial) {
            RoutingConfig cfg = golden_config();
            cfg.tau = 0.5;
            cfg.k = klen(rng);
            std::vector<EntropySignal> sigs(static_cast<std::size_t>(slen(rng)));
            for (auto& s : sigs) s.e_combined = e(rng);
            auto d1 = simulate_policy(sigs, cfg);
            auto d2 = simulate_policy(sigs, cfg);
            for (std::size_t i = 0; i < d1.size(); ++i)
                check.expect(d1[i].model_id == d2[i].model_id, "nondeterministic decision");
            std::size_t i = 0;
            while (i < d1.size()) {
                if (d1[i].model_id != cfg.support_model_id) {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                while (j < d1.size() && d1[j].model_id == cfg.support_model_id) ++j;
                if (j < d1.size())
                    check.expect(j - i == static_cast<std::size_t>(cfg.k),
                                 "interior hold of wrong length");
                else
                    check.expect(j - i <= static_cast<std::size_t>(cfg.k), "over-long hold");
                i = j;
            }
            if (!check.passed) return;
        }
    }

    // (d) switch_count is monotone nonincreasing in tau
    {
        std::mt19937_64 rng(64);
        std::uniform_real_distribution<double> e(0.0, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<EntropySignal> sigs(60);
            for (auto& s : sigs) s.e_combined = e(rng);
            std::int64_t prev = -1;
            for (double tau : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
                RoutingConfig cfg = golden_config();
                cfg.tau = tau;
                cfg.k = 3;
                PolicyDriver driver(cfg);
                for (const auto& s : sigs) driver.observe(s);
                if (prev >= 0)
                    check.expect(driver.state().switch_count <= prev,
                                 "switch count increased with tau");
                prev = driver.state().switch_count;
            }
            if (!check.passed) return;
        }
    }

    // (e) crash-recovery equivalence on a 200-step replay session
    {
        auto records = synthetic_records(200, 20260809);
        SessionOptions opts;
        opts.checkpoint_every = 25;
        auto ref_dir = temp_dir("ref");
        {
            SessionRunner runner(golden_config(), golden_pricing(), RetryPolicy{}, ref_dir, opts);
            runner.add_backend(std::make_shared<ReplayBackend>("base-a", records));
            runner.add_backend(std::make_shared<ReplayBackend>("support-b", records));
            StepCountSource work(200);
            auto r = runner.run(work);
            check.expect(r.status == SessionStatus::clean_finish, "reference run failed");
        }
        auto ref_logs = std::array<std::string, 4>{
            slurp(ref_dir / "trace.jsonl"), slurp(ref_dir / "decisions.jsonl"),
            slurp(ref_dir / "entropy.jsonl"), slurp(ref_dir / "cost.jsonl")};
        for (std::int64_t boundary = 25; boundary <= 175; boundary += 25) {
            auto dir = temp_dir("cut" + std::to_string(boundary));
            SessionOptions cut = opts;
            cut.stop_after_steps = boundary;
            {
                SessionRunner runner(golden_config(), golden_pricing(), RetryPolicy{}, dir, cut);
                runner.add_backend(std::make_shared<ReplayBackend>("base-a", records));
                runner.add_backend(std::make_shared<ReplayBackend>("support-b", records));
                StepCountSource work(200);
                auto r = runner.run(work);
                check.expect(r.status == SessionStatus::resumable_halt, "interrupt did not halt");
            }
            {
                SessionRunner runner(golden_config(), golden_pricing(), RetryPolicy{}, dir, opts);
                runner.add_backend(std::make_shared<ReplayBackend>("base-a", records));
                runner.add_backend(std::make_shared<ReplayBackend>("support-b", records));
                StepCountSource work(200);
                auto r = runner.resume(work);
                check.expect(r.status == SessionStatus::clean_finish, "resume did not finish");
            }
            auto logs = std::array<std::string, 4>{
                slurp(dir / "trace.jsonl"), slurp(dir / "decisions.jsonl"),
                slurp(dir / "entropy.jsonl"), slurp(dir / "cost.jsonl")};
            check.expect(logs == ref_logs,
                         "logs differ after resume at step " + std::to_string(boundary));
            fs::remove_all(dir);
            if (!check.passed) break;
        }
        fs::remove_all(ref_dir);
    }

    // (f) window-velocity additivity and time-to-threshold monotonicity
    {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 500; ++trial) {
            LeaderboardSeries s{"rand", {}};
            double t = 0, score = 0;
            int n = 2 + static_cast<int>(u(rng) * 30);
            for (int i = 0; i < n; ++i) {
                s.points.push_back({t, score});
                t += 0.01 + u(rng);
                score += u(rng) * 500;
            }
            double span = s.last_time();
            double a = u(rng) * 0.3 * span;
            double b = a + (0.01 + u(rng) * 0.3) * span;
            double c = b + (0.01 + u(rng) * 0.3) * span;
            if (b <= span) {
                double vac = window_velocity(s, a, c);
                double weighted = (window_velocity(s, a, b) * (b - a) +
                                   window_velocity(s, b, c) * (c - b)) /
                                  (c - a);
                check.expect(std::abs(vac - weighted) <= 1e-9, "velocity not additive");
            }
            double top = s.final_score();
            if (top > 0) {
                double t1 = u(rng) * top, t2 = u(rng) * top;
                if (t1 > t2) std::swap(t1, t2);
                check.expect(time_to_threshold(s, t1) <= time_to_threshold(s, t2) + 1e-12,
                             "time to threshold not monotone");
            }
            if (!check.passed) return;
        }
    }
}

} // namespace

int main() {
    criterion("cost-table-reproduction", 1.0, cost_table_reproduction);
    criterion("blended-rate-discrepancy", 0.0, blended_rate_discrepancy);
    criterion("reference-trace-entropy", 0.0, reference_trace_entropy);
    criterion("routing-golden-run", 0.0, routing_golden_run);
    criterion("leaderboard-goldens", 1.0, leaderboard_goldens);
    criterion("property-suites", 60.0, property_suites);
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
