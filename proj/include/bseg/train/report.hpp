/* Copyright 2026 The bseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License. */
#ifndef BSEG_TRAIN_REPORT_HPP
#define BSEG_TRAIN_REPORT_HPP

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bseg/data/remap.hpp"
#include "bseg/train/metrics.hpp"

namespace bseg::train {

/// Row order of the published per-class table: parts first, background last.
inline constexpr std::array<std::uint8_t, kNumClasses> kReportOrder = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 0};

inline std::string format_dice(const std::optional<double>& d)
{
    if (!d)
        return "n/a";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", *d);
    return buf;
}

/// Tab-separated `Part Name<TAB>Dice` table with two-decimal scores.
inline std::string render_report_tsv(const EvalReport& report)
{
    std::string out = "Part Name\tDice\n";
    for (std::uint8_t c : kReportOrder)
        out += std::string(data::kClassNames[c]) + "\t" + format_dice(report.dice[c]) + "\n";
    return out;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& report)
{
    nlohmann::ordered_json j;
    j["samples"] = report.samples;
    j["pixels"] = report.counts.pixels;
    const auto mean = report.mean_foreground_dice();
    j["mean_foreground_dice"] = mean ? nlohmann::ordered_json(*mean) : nlohmann::ordered_json(nullptr);
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (std::uint8_t c : kReportOrder) {
        nlohmann::ordered_json row;
        row["label"] = c;
        row["name"] = data::kClassNames[c];
        row["dice"] = report.dice[c] ? nlohmann::ordered_json(*report.dice[c]) : nlohmann::ordered_json(nullptr);
        row["tp"] = report.counts.tp[c];
        row["fp"] = report.counts.fp[c];
        row["fn"] = report.counts.fn[c];
        row["support"] = report.counts.support[c];
        classes.push_back(std::move(row));
    }
    return j;
}

/// Full-precision variant; doubles round-trip exactly through the JSON text.
inline std::string render_report_json(const EvalReport& report)
{
    return report_to_json(report).dump(2) + "\n";
}

struct LossRecord {
    std::size_t step = 0;
    double loss = 0;
    double p_center = 0;
    double p_output = 0;
};

inline std::string render_loss_csv(const std::vector<LossRecord>& curve)
{
    std::string out = "step,loss,p_center,p_output\n";
    char buf[128];
    for (const auto& r : curve) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.step, r.loss, r.p_center, r.p_output);
        out += buf;
    }
    return out;
}

} // namespace bseg::train

#endif
