#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "enroute/error.hpp"
#include "enroute/format.hpp"
#include "enroute/money.hpp"
#include "enroute/record.hpp"
#include "enroute/routing.hpp"

namespace enroute {

// Prices are integer micro-dollars per million tokens ($5/M == 5'000'000).
struct PricingModel {
    std::int64_t input_price_micro_per_million = 0;
    std::int64_t output_price_micro_per_million = 0;
    std::string model_id;

    static PricingModel from_dollars(double in_per_million, double out_per_million,
                                     std::string model_id = {}) {
        if (in_per_million < 0 || out_per_million < 0)
            raise(ErrorKind::domain_error, "prices must be >= 0");
        PricingModel p;
        p.input_price_micro_per_million = round_half_up(in_per_million * 1e6);
        p.output_price_micro_per_million = round_half_up(out_per_million * 1e6);
        p.model_id = std::move(model_id);
        return p;
    }
};

// Mean per-inference token counts; converts token volumes into input/output
// shares for blended pricing.
struct TokenProfile {
    double mean_input_tokens = 0;
    double mean_output_tokens = 0;

    void validate() const {
        if (!(mean_input_tokens > 0) || !(mean_output_tokens > 0))
            raise(ErrorKind::domain_error, "token profile means must be > 0");
    }
};

struct CostReport {
    std::int64_t total_tokens = 0;
    Rational support_fraction{1};
    Rational blended_rate_micro_per_million{0};
    Rational total_cost_micro{0};
    Rational reduction{0};              // 1 - support_fraction

    std::int64_t cost_micro_rounded() const { return total_cost_micro.round_half_up(); }
};

// Share-weighted price per million tokens: (in*P_in + out*P_out)/(in+out).
// Profile means are taken at micro-token resolution so integral profiles stay
// exact.
inline Rational blended_rate(const PricingModel& pricing, const TokenProfile& profile) {
    profile.validate();
    std::int64_t in_scaled = round_half_up(profile.mean_input_tokens * 1e6);
    std::int64_t out_scaled = round_half_up(profile.mean_output_tokens * 1e6);
    if (in_scaled + out_scaled == 0)
        raise(ErrorKind::domain_error, "token profile has zero total tokens");
    return Rational::from_int128(
        static_cast<Rational::Int>(in_scaled) * pricing.input_price_micro_per_million +
            static_cast<Rational::Int>(out_scaled) * pricing.output_price_micro_per_million,
        static_cast<Rational::Int>(in_scaled) + out_scaled);
}

// The k-hold cost law: a hold of k routes k% of traffic to the support model.
inline Rational support_fraction(int k) {
    if (k < 1 || k > 100)
        raise(ErrorKind::domain_error, "k must lie in [1,100], got " + std::to_string(k));
    return Rational(k, 100);
}

// Closed-form projection. Without k the whole volume is billed at the rate
// (no support-model gating).
inline CostReport project_cost(std::int64_t total_tokens, std::optional<int> k,
                               const Rational& rate_micro_per_million) {
    if (total_tokens < 0)
        raise(ErrorKind::domain_error, "total_tokens must be >= 0");
    CostReport report;
    report.total_tokens = total_tokens;
    report.support_fraction = k ? support_fraction(*k) : Rational(1);
    report.blended_rate_micro_per_million = rate_micro_per_million;
    report.total_cost_micro = Rational(total_tokens, 1'000'000) *
                              report.support_fraction * rate_micro_per_million;
    report.reduction = Rational(1) - report.support_fraction;
    return report;
}

// Metered cost of one completed inference, rounded half up to a micro-dollar.
inline std::int64_t record_cost_micro(const InferenceRecord& rec, const PricingModel& pricing) {
    Rational cost =
        Rational(static_cast<std::int64_t>(rec.input_tokens)) *
            Rational(pricing.input_price_micro_per_million, 1'000'000) +
        Rational(static_cast<std::int64_t>(rec.output_tokens)) *
            Rational(pricing.output_price_micro_per_million, 1'000'000);
    return cost.round_half_up();
}

using PricingTable = std::map<std::string, PricingModel>;

inline const PricingModel& pricing_for(const PricingTable& table, const std::string& model_id) {
    auto it = table.find(model_id);
    if (it == table.end())
        raise(ErrorKind::domain_error, "no pricing entry for model '" + model_id + "'");
    return it->second;
}

// Position-aligned metered accounting: each inference billed at the decided
// model's prices over the record's actual token counts.
inline CostReport session_cost(const std::vector<RouteDecision>& decisions,
                               const std::vector<InferenceRecord>& records,
                               const PricingTable& pricing) {
    if (decisions.size() != records.size())
        raise(ErrorKind::alignment_error,
              std::to_string(decisions.size()) + " decisions vs " +
                  std::to_string(records.size()) + " records");
    std::int64_t total_tokens = 0;
    std::int64_t support_count = 0;
    std::int64_t cost_micro = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& pm = pricing_for(pricing, decisions[i].model_id);
        cost_micro += record_cost_micro(records[i], pm);
        total_tokens += static_cast<std::int64_t>(records[i].input_tokens + records[i].output_tokens);
        if (decisions[i].reason == Reason::triggered || decisions[i].reason == Reason::holding)
            ++support_count;
    }
    CostReport report;
    report.total_tokens = total_tokens;
    report.support_fraction = decisions.empty()
                                  ? Rational(0)
                                  : Rational(support_count, static_cast<std::int64_t>(decisions.size()));
    report.total_cost_micro = Rational(cost_micro);
    report.reduction = Rational(1) - report.support_fraction;
    // Implied rate keeps the report identity total_cost == tokens/1e6 *
    // fraction * rate when the session billed anything.
    if (total_tokens > 0 && !report.support_fraction.is_zero())
        report.blended_rate_micro_per_million =
            report.total_cost_micro /
            (Rational(total_tokens, 1'000'000) * report.support_fraction);
    return report;
}

// --- Cost breakdown table -------------------------------------------------

constexpr std::array<std::int64_t, 4> kTableVolumes{1'000'000, 10'000'000, 100'000'000,
                                                    1'000'000'000};
constexpr std::array<const char*, 4> kTableVolumeLabels{"1M", "10M", "100M", "1B"};
constexpr std::array<int, 4> kTableHoldLengths{20, 10, 5, 2};

struct CostTableRow {
    std::string configuration;
    std::optional<int> k;
    std::array<CostReport, 4> cells;
    std::string reduction;              // "80%" or "-" for the unsupported row
};

// Cells in the 1M/10M columns quote cents; the 100M/1B columns round to
// whole dollars.
inline std::string cost_cell(const CostReport& report) {
    return report.total_tokens < 100'000'000 ? money_cents(report.total_cost_micro)
                                             : money_whole(report.total_cost_micro);
}

inline std::vector<CostTableRow> build_cost_table(const Rational& rate_micro_per_million) {
    std::vector<CostTableRow> rows;
    auto make_row = [&](std::optional<int> k) {
        CostTableRow row;
        row.configuration = k ? "support on" : "support off";
        row.k = k;
        for (std::size_t i = 0; i < kTableVolumes.size(); ++i)
            row.cells[i] = project_cost(kTableVolumes[i], k, rate_micro_per_million);
        row.reduction =
            k ? std::to_string((Rational(100) * row.cells[0].reduction).round_half_up()) + "%"
              : "-";
        return row;
    };
    rows.push_back(make_row(std::nullopt));
    for (int k : kTableHoldLengths) rows.push_back(make_row(k));
    return rows;
}

inline std::string render_cost_table(const std::vector<CostTableRow>& rows) {
    std::vector<std::array<std::string, 7>> grid;
    grid.push_back({"Configuration", "k", kTableVolumeLabels[0], kTableVolumeLabels[1],
                    kTableVolumeLabels[2], kTableVolumeLabels[3], "Reduction"});
    for (const auto& row : rows) {
        std::array<std::string, 7> cells;
        cells[0] = row.configuration;
        cells[1] = row.k ? std::to_string(*row.k) : "-";
        for (std::size_t i = 0; i < 4; ++i) cells[2 + i] = cost_cell(row.cells[i]);
        cells[6] = row.reduction;
        grid.push_back(cells);
    }
    std::array<std::size_t, 7> widths{};
    for (const auto& line : grid)
        for (std::size_t c = 0; c < 7; ++c) widths[c] = std::max(widths[c], line[c].size());
    std::string out;
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < 7; ++c) {
            out += line[c];
            if (c + 1 < 7) out.append(widths[c] - line[c].size() + 2, ' ');
        }
        out += '\n';
    }
    return out;
}

inline std::string render_cost_table_csv(const std::vector<CostTableRow>& rows) {
    std::string out = "configuration,k,tokens,cost_micro,cost,reduction\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < 4; ++i) {
            out += row.configuration + "," + (row.k ? std::to_string(*row.k) : "") + "," +
                   std::to_string(kTableVolumes[i]) + "," +
                   std::to_string(row.cells[i].cost_micro_rounded()) + "," + cost_cell(row.cells[i]) +
                   "," + row.reduction + "\n";
        }
    }
    return out;
}

} // namespace enroute
