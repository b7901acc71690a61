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
#ifndef BSEG_DATA_REMAP_HPP
#define BSEG_DATA_REMAP_HPP

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bseg/error.hpp"
#include "bseg/tensor.hpp"

namespace bseg::data {

/// Names of the twelve output classes, indexed by label.
inline constexpr std::array<std::string_view, 12> kClassNames = {
    "Background", "Hair", "Head", "Ear",   "Eye",  "Eyebrow",
    "Leg",        "Arm",  "Mouth", "Neck", "Nose", "Torso",
};

struct PartRow {
    std::string_view source_name; ///< key used in mapping and legend files
    std::string_view display_name;
    std::string_view new_name;
    std::uint8_t label;
};

/**
 * Person-part relabeling: left/right variants collapse onto one class and
 * everything that is not a person part becomes background. "Right Foot"
 * joins Leg like its left counterpart.
 */
inline constexpr std::array<PartRow, 26> kPartRows = {{
    {"hair", "Hair", "Hair", 1},
    {"head", "Head", "Head", 2},
    {"left_ear", "Left Ear", "Ear", 3},
    {"left_eye", "Left Eye", "Eye", 4},
    {"left_eyebrow", "Left Eyebrow", "Eyebrow", 5},
    {"left_foot", "Left Foot", "Leg", 6},
    {"left_hand", "Left Hand", "Arm", 7},
    {"left_lower_arm", "Left Lower Arm", "Arm", 7},
    {"left_lower_leg", "Left Lower Leg", "Leg", 6},
    {"left_upper_arm", "Left Upper Arm", "Arm", 7},
    {"left_upper_leg", "Left Upper Leg", "Leg", 6},
    {"right_ear", "Right Ear", "Ear", 3},
    {"right_eye", "Right Eye", "Eye", 4},
    {"right_eyebrow", "Right Eyebrow", "Eyebrow", 5},
    {"right_foot", "Right Foot", "Leg", 6},
    {"right_hand", "Right Hand", "Arm", 7},
    {"right_lower_arm", "Right Lower Arm", "Arm", 7},
    {"right_lower_leg", "Right Lower Leg", "Leg", 6},
    {"right_upper_arm", "Right Upper Arm", "Arm", 7},
    {"right_upper_leg", "Right Upper Leg", "Leg", 6},
    {"mouth", "Mouth", "Mouth", 8},
    {"neck", "Neck", "Neck", 9},
    {"nose", "Nose", "Nose", 10},
    {"torso", "Torso", "Torso", 11},
    {"non_person", "Non-person objects", "Background", 0},
    {"background", "Background", "Background", 0},
}};

/// One `name<TAB>integer` line of a mapping or legend file.
struct NamedValue {
    std::string name;
    int value;
};

/// Parses UTF-8 text with one `name<TAB>integer` per line; `#` starts a comment.
inline std::vector<NamedValue> parse_named_values(std::string_view text, std::string_view origin = "mapping")
{
    std::vector<NamedValue> out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        const auto tab = line.find('\t');
        const auto where = std::string(origin) + " line " + std::to_string(line_no);
        if (tab == std::string::npos || tab == 0)
            throw Error(where + ": expected name<TAB>integer");
        const std::string name = line.substr(0, tab);
        std::string_view num(line);
        num.remove_prefix(tab + 1);
        int value = 0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
        if (ec != std::errc() || ptr != num.data() + num.size())
            throw Error(where + ": bad integer '" + std::string(num) + "'");
        out.push_back({name, value});
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Source-part name -> code used in exported index masks (0 = background).
class SourceLegend {
public:
    /// Codes follow the row order of kPartRows: hair = 1 ... non_person = 25, background = 0.
    static SourceLegend standard()
    {
        SourceLegend legend;
        for (std::size_t i = 0; i < kPartRows.size(); ++i) {
            const auto& row = kPartRows[i];
            legend.add(std::string(row.source_name),
                       row.source_name == "background" ? 0 : static_cast<int>(i + 1));
        }
        return legend;
    }

    static SourceLegend parse(std::string_view text)
    {
        SourceLegend legend;
        for (const auto& nv : parse_named_values(text, "legend"))
            legend.add(nv.name, nv.value);
        return legend;
    }

    void add(const std::string& name, int code)
    {
        if (code < 0 || code > 254)
            throw Error("legend code for '" + name + "' must be in 0..254");
        if (names_[code] && *names_[code] != name)
            throw Error("legend code " + std::to_string(code) + " assigned twice");
        names_[code] = name;
    }

    std::optional<std::string> name_of(std::uint8_t code) const { return names_[code]; }

    std::optional<std::uint8_t> code_of(std::string_view name) const
    {
        for (std::size_t c = 0; c < names_.size(); ++c)
            if (names_[c] && *names_[c] == name)
                return static_cast<std::uint8_t>(c);
        return std::nullopt;
    }

private:
    std::array<std::optional<std::string>, 256> names_{};
};

/**
 * Lookup from source mask codes to class labels. Built from name -> label
 * rows (resolved through a SourceLegend) and optional direct code rows.
 * Codes without a row fall back to the default label when one is set.
 */
class RemapTable {
public:
    static RemapTable standard(const SourceLegend& legend = SourceLegend::standard())
    {
        RemapTable table;
        for (const auto& row : kPartRows)
            table.set_name(legend, std::string(row.source_name), row.label);
        table.default_label_ = 0;
        return table;
    }

    /// Mapping file rows `source_name<TAB>label`, resolved through `legend`.
    static RemapTable parse(std::string_view text, const SourceLegend& legend = SourceLegend::standard())
    {
        RemapTable table;
        for (const auto& nv : parse_named_values(text, "mapping")) {
            if (nv.value < 0 || nv.value > 11)
                throw Error("mapping label for '" + nv.name + "' must be in 0..11");
            table.set_name(legend, nv.name, static_cast<std::uint8_t>(nv.value));
        }
        table.default_label_ = 0;
        return table;
    }

    void set_name(const SourceLegend& legend, const std::string& name, std::uint8_t label)
    {
        const auto code = legend.code_of(name);
        if (!code)
            throw Error("source part '" + name + "' is not in the legend");
        set_code(*code, label);
        by_name_[name] = label;
    }

    void set_code(std::uint8_t code, std::uint8_t label)
    {
        if (code == kVoidLabel)
            throw Error("code 255 is reserved for void");
        if (label > 11)
            throw Error("class labels are 0..11");
        codes_[code] = label;
    }

    void set_default(std::optional<std::uint8_t> label) { default_label_ = label; }
    std::optional<std::uint8_t> default_label() const { return default_label_; }

    std::optional<std::uint8_t> label_for_name(std::string_view name) const
    {
        const auto it = by_name_.find(std::string(name));
        if (it == by_name_.end())
            return std::nullopt;
        return it->second;
    }

    std::optional<std::uint8_t> label_for_code(std::uint8_t code) const
    {
        if (code == kVoidLabel)
            return kVoidLabel;
        if (codes_[code])
            return codes_[code];
        return default_label_;
    }

    std::size_t named_rows() const { return by_name_.size(); }

private:
    std::array<std::optional<std::uint8_t>, 256> codes_{};
    std::map<std::string, std::uint8_t> by_name_;
    std::optional<std::uint8_t> default_label_;
};

/// Mapping file text equivalent to RemapTable::standard().
inline std::string standard_mapping_text()
{
    std::string out = "# source_name<TAB>label\n";
    for (const auto& row : kPartRows)
        out += std::string(row.source_name) + "\t" + std::to_string(row.label) + "\n";
    return out;
}

inline std::string standard_legend_text()
{
    const auto legend = SourceLegend::standard();
    std::string out = "# source_name<TAB>mask code\n";
    for (const auto& row : kPartRows)
        out += std::string(row.source_name) + "\t" +
               std::to_string(*legend.code_of(row.source_name)) + "\n";
    return out;
}

/// Elementwise relabel; void (255) passes through. Unknown codes are an error
/// unless the table has a default label.
inline Mask remap_mask(const Mask& src, const RemapTable& table)
{
    Mask out(src.shape());
    std::set<int> unknown;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto label = table.label_for_code(src[i]);
        if (!label) {
            unknown.insert(src[i]);
            continue;
        }
        out[i] = *label;
    }
    if (!unknown.empty()) {
        std::string list;
        for (int c : unknown)
            list += (list.empty() ? "" : ", ") + std::to_string(c);
        throw Error("unknown source labels: " + list);
    }
    return out;
}

} // namespace bseg::data

#endif
