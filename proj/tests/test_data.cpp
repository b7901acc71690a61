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
#include <array>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "bseg/data/augment.hpp"
#include "bseg/data/dataset_dir.hpp"
#include "bseg/data/png_io.hpp"
#include "bseg/data/remap.hpp"
#include "bseg/data/resize.hpp"
#include "bseg/data/synthetic.hpp"

namespace bseg {
namespace {

using Record = data::SampleRecord<double>;

std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "bseg_test_data" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::uint8_t code(std::string_view name)
{
    return *data::SourceLegend::standard().code_of(name);
}

std::array<std::size_t, 256> histogram(const Mask& m)
{
    std::array<std::size_t, 256> h{};
    for (auto v : m.data())
        ++h[v];
    return h;
}

Record random_record(std::uint64_t seed, std::size_t h, std::size_t w)
{
    RngStream rng(seed);
    Record r{Tensor<double>({3, h, w}), Mask({h, w}), "r"};
    for (auto& v : r.image.data())
        v = rng.next_double();
    for (auto& v : r.mask.data())
        v = static_cast<std::uint8_t>(rng.below(12));
    return r;
}

// ---- remap --------------------------------------------------------------------

struct ExpectedRow {
    const char* source;
    std::uint8_t label;
};

constexpr ExpectedRow kTableRows[] = {
    {"hair", 1},           {"head", 2},            {"left_ear", 3},         {"left_eye", 4},
    {"left_eyebrow", 5},   {"left_foot", 6},       {"left_hand", 7},        {"left_lower_arm", 7},
    {"left_lower_leg", 6}, {"left_upper_arm", 7},  {"left_upper_leg", 6},   {"right_ear", 3},
    {"right_eye", 4},      {"right_eyebrow", 5},   {"right_foot", 6},       {"right_hand", 7},
    {"right_lower_arm", 7}, {"right_lower_leg", 6}, {"right_upper_arm", 7}, {"right_upper_leg", 6},
    {"mouth", 8},          {"neck", 9},            {"nose", 10},            {"torso", 11},
    {"non_person", 0},     {"background", 0},
};

TEST(Remap, AllTwentySixRows)
{
    const auto table = data::RemapTable::standard();
    EXPECT_EQ(data::kPartRows.size(), 26u);
    EXPECT_EQ(table.named_rows(), 26u);
    for (const auto& row : kTableRows) {
        EXPECT_EQ(table.label_for_name(row.source), row.label) << row.source;
        const Mask src({2, 2}, code(row.source));
        EXPECT_EQ(data::remap_mask(src, table), Mask({2, 2}, row.label)) << row.source;
    }
}

TEST(Remap, SpecificRows)
{
    const auto table = data::RemapTable::standard();
    const Mask src({1, 4}, std::vector<std::uint8_t>{code("left_lower_arm"), code("hair"), code("torso"),
                                                      code("non_person")});
    EXPECT_EQ(data::remap_mask(src, table), Mask({1, 4}, std::vector<std::uint8_t>{7, 1, 11, 0}));
    EXPECT_EQ(data::remap_mask(Mask({3, 3}, code("right_upper_leg")), table), Mask({3, 3}, 6));
}

TEST(Remap, LeftRightCollapse)
{
    const auto table = data::RemapTable::standard();
    for (const char* part : {"ear", "eye", "eyebrow", "foot", "hand", "lower_arm", "upper_arm", "lower_leg",
                             "upper_leg"}) {
        const auto l = table.label_for_name(std::string("left_") + part);
        const auto r = table.label_for_name(std::string("right_") + part);
        ASSERT_TRUE(l && r) << part;
        EXPECT_EQ(*l, *r) << part;
    }
    EXPECT_EQ(table.label_for_name("right_foot"), 6);
}

TEST(Remap, VoidPassesThrough)
{
    const Mask src({1, 2}, std::vector<std::uint8_t>{kVoidLabel, code("neck")});
    EXPECT_EQ(data::remap_mask(src, data::RemapTable::standard()),
              Mask({1, 2}, std::vector<std::uint8_t>{kVoidLabel, 9}));
}

TEST(Remap, UnknownLabelListedWithoutDefault)
{
    auto table = data::RemapTable::standard();
    table.set_default(std::nullopt);
    const Mask src({1, 3}, std::vector<std::uint8_t>{code("hair"), 200, 77});
    try {
        data::remap_mask(src, table);
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "unknown source labels: 77, 200");
    }
    table.set_default(0);
    EXPECT_EQ(data::remap_mask(src, table), Mask({1, 3}, std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(Remap, MappingTextRoundTrip)
{
    const auto parsed = data::RemapTable::parse(data::standard_mapping_text());
    const auto standard = data::RemapTable::standard();
    for (int c = 0; c < 256; ++c)
        EXPECT_EQ(parsed.label_for_code(static_cast<std::uint8_t>(c)),
                  standard.label_for_code(static_cast<std::uint8_t>(c)));
    const auto legend = data::SourceLegend::parse(data::standard_legend_text());
    for (const auto& row : data::kPartRows)
        EXPECT_EQ(legend.code_of(row.source_name), data::SourceLegend::standard().code_of(row.source_name));
}

TEST(Remap, BadMappingRowsRejected)
{
    EXPECT_THROW(data::RemapTable::parse("hair\t12\n"), Error);
    EXPECT_THROW(data::RemapTable::parse("wing\t1\n"), Error);
    EXPECT_THROW(data::RemapTable::parse("hair 1\n"), Error);
}

TEST(Remap, IdempotentOnClassLabels)
{
    // a table that maps every class label to itself leaves remapped masks unchanged
    data::RemapTable identity;
    for (std::uint8_t c = 0; c < 12; ++c)
        identity.set_code(c, c);
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(s);
        Mask src({8, 8});
        for (auto& v : src.data())
            v = static_cast<std::uint8_t>(rng.below(26));
        const Mask once = data::remap_mask(src, data::RemapTable::standard());
        EXPECT_EQ(data::remap_mask(once, identity), once);
    }
}

// ---- augmentation -------------------------------------------------------------

TEST(Augment, IdentityConfig)
{
    const Record r = random_record(1, 8, 6);
    RngStream rng(5);
    const Record out = data::augment(r, data::AugmentConfig::identity(), rng);
    EXPECT_EQ(out.image, r.image);
    EXPECT_EQ(out.mask, r.mask);
}

TEST(Augment, FlipIsAnInvolution)
{
    const Record r = random_record(2, 5, 7);
    const Record once = data::hflip(r);
    EXPECT_FALSE(once.mask == r.mask);
    EXPECT_EQ(once.mask.at(0, 0), r.mask.at(0, 6));
    EXPECT_EQ(once.image.at(1, 2, 0), r.image.at(1, 2, 6));
    const Record twice = data::hflip(once);
    EXPECT_EQ(twice.image, r.image);
    EXPECT_EQ(twice.mask, r.mask);
}

TEST(Augment, PhotometricOpsLeaveMaskAlone)
{
    data::AugmentConfig cfg;
    cfg.flip_prob = 0.0;
    for (std::uint64_t s = 0; s < 30; ++s) {
        const Record r = random_record(100 + s, 10, 10);
        RngStream rng(200 + s);
        const Record out = data::augment(r, cfg, rng);
        EXPECT_EQ(out.mask, r.mask);
        EXPECT_EQ(histogram(out.mask), histogram(r.mask));
        for (double v : out.image.data()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Augment, FlipKeepsLabelHistogram)
{
    const data::AugmentConfig cfg;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Record r = random_record(300 + s, 6, 9);
        RngStream rng(s);
        EXPECT_EQ(histogram(data::augment(r, cfg, rng).mask), histogram(r.mask));
    }
}

TEST(Augment, DrawsRespectHalfRanges)
{
    const data::AugmentConfig cfg;
    RngStream rng(7);
    std::size_t flips = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto d = data::draw_augment(cfg, rng);
        flips += d.flip;
        EXPECT_GE(d.brightness, 0.75);
        EXPECT_LE(d.brightness, 1.25);
        EXPECT_GE(d.contrast, 0.75);
        EXPECT_LE(d.contrast, 1.25);
        EXPECT_GE(d.saturation, 0.75);
        EXPECT_LE(d.saturation, 1.25);
        EXPECT_GE(d.hue, -0.05);
        EXPECT_LE(d.hue, 0.05);
    }
    EXPECT_NEAR(flips / 2000.0, 0.5, 0.05);
}

TEST(Augment, SaturationZeroGivesGray)
{
    const Record r = random_record(4, 3, 3);
    data::AugmentDraw d;
    d.saturation = 0.0;
    const Record out = data::apply_augment(r, d);
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_NEAR(out.image[i], out.image[9 + i], 1e-12);
        EXPECT_NEAR(out.image[i], out.image[18 + i], 1e-12);
    }
}

TEST(Augment, InvalidConfigRejected)
{
    data::AugmentConfig cfg;
    cfg.hue = 0.5;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.flip_prob = 1.5;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.contrast = 1.0;
    EXPECT_THROW(cfg.validate(), Error);
}

// ---- resize -------------------------------------------------------------------

TEST(Resize, SameSizeUnchanged)
{
    const Record r = random_record(5, 64, 32);
    const Record out = data::resize_pair(r, {64, 32});
    EXPECT_EQ(out.image, r.image);
    EXPECT_EQ(out.mask, r.mask);
}

TEST(Resize, ConstantImageStaysConstant)
{
    Record r{Tensor<double>({3, 50, 70}, 0.375), Mask({50, 70}, 4), "c"};
    const Record out = data::resize_pair(r, {64, 96});
    EXPECT_EQ(out.image.shape(), (Shape{3, 64, 96}));
    for (double v : out.image.data())
        EXPECT_NEAR(v, 0.375, 1e-12);
    EXPECT_EQ(out.mask, Mask({64, 96}, 4));
}

TEST(Resize, TwoRegionMaskKeepsValueSet)
{
    Record r{Tensor<double>({3, 128, 128}, 0.0), Mask({128, 128}), "two"};
    for (std::size_t y = 0; y < 128; ++y)
        for (std::size_t x = 0; x < 128; ++x)
            r.mask.at(y, x) = x < 64 ? 1 : 2;
    const Record out = data::resize_pair(r, {64, 64});
    std::set<std::uint8_t> values(out.mask.data().begin(), out.mask.data().end());
    EXPECT_EQ(values, (std::set<std::uint8_t>{1, 2}));
    EXPECT_EQ(out.mask.at(10, 31), 1);
    EXPECT_EQ(out.mask.at(10, 32), 2);
}

TEST(Resize, NearestNeverBlendsLabels)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Record r = random_record(400 + s, 37, 45);
        const Record out = data::resize_pair(r, {64, 64});
        const auto before = histogram(r.mask);
        for (auto v : out.mask.data())
            EXPECT_GT(before[v], 0u);
    }
}

TEST(Resize, NonNetworkTargetRejected)
{
    const Record r = random_record(6, 40, 40);
    EXPECT_THROW(data::resize_pair(r, {40, 64}), Error);
    EXPECT_THROW(data::resize_pair(r, {0, 32}), Error);
    EXPECT_EQ(data::round_to_network(50), 64u);
    EXPECT_EQ(data::round_to_network(47), 32u);
    EXPECT_EQ(data::round_to_network(5), 32u);
}

// ---- synthetic data -------------------------------------------------------------

TEST(Synthetic, Deterministic)
{
    const auto a = data::synthetic_dataset(4, 9, {64, 64});
    const auto b = data::synthetic_dataset(4, 9, {64, 64});
    const auto c = data::synthetic_dataset(4, 10, {64, 64});
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(a[i].image, b[i].image);
        EXPECT_EQ(a[i].mask, b[i].mask);
        EXPECT_EQ(a[i].source_id, b[i].source_id);
        EXPECT_FALSE(a[i].mask == c[i].mask);
    }
}

TEST(Synthetic, LabelsAreFigureParts)
{
    const std::set<std::uint8_t> allowed{0, 2, 6, 7, 11};
    for (const auto& r : data::synthetic_dataset(30, 1, {64, 96})) {
        data::validate_record(r);
        std::set<std::uint8_t> seen(r.mask.data().begin(), r.mask.data().end());
        for (auto v : seen)
            EXPECT_TRUE(allowed.count(v)) << int(v);
        EXPECT_TRUE(seen.count(0));
        EXPECT_TRUE(seen.count(11));
    }
}

TEST(Synthetic, ForegroundCoverage)
{
    double coverage = 0;
    const auto records = data::synthetic_dataset(100, 2, {64, 64});
    for (const auto& r : records) {
        std::size_t fg = 0;
        for (auto v : r.mask.data())
            fg += v != 0;
        coverage += static_cast<double>(fg) / static_cast<double>(r.mask.size());
    }
    coverage /= 100;
    EXPECT_GE(coverage, 0.10);
    EXPECT_LE(coverage, 0.60);
}

TEST(Synthetic, BadArgumentsRejected)
{
    EXPECT_THROW(data::synthetic_dataset(0, 1, {64, 64}), Error);
    EXPECT_THROW(data::synthetic_dataset(1, 1, {60, 64}), Error);
}

// ---- PNG input/output -------------------------------------------------------

TEST(Png, VoidMaskValue)
{
    const auto dir = temp_dir("void");
    data::write_png(dir / "m.png", data::Image8{2, 2, 1, {255, 255, 255, 255}});
    EXPECT_EQ(data::load_mask(dir / "m.png"), Mask({2, 2}, kVoidLabel));
}

TEST(Png, RgbScaling)
{
    const auto dir = temp_dir("rgb");
    data::write_png(dir / "i.png", data::Image8{1, 1, 3, {255, 0, 0}});
    const auto img = data::load_image(dir / "i.png");
    EXPECT_EQ(img.shape(), (Shape{3, 1, 1}));
    EXPECT_DOUBLE_EQ(img[0], 1.0);
    EXPECT_DOUBLE_EQ(img[1], 0.0);
    EXPECT_DOUBLE_EQ(img[2], 0.0);
}

TEST(Png, WrongChannelCountRejected)
{
    const auto dir = temp_dir("channels");
    data::write_png(dir / "rgb.png", data::Image8{2, 2, 3, std::vector<std::uint8_t>(12, 7)});
    data::write_png(dir / "gray.png", data::Image8{2, 2, 1, std::vector<std::uint8_t>(4, 7)});
    try {
        data::load_mask(dir / "rgb.png");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("single-channel"), std::string::npos) << e.what();
    }
    EXPECT_THROW(data::load_image(dir / "gray.png"), Error);
    EXPECT_THROW(data::load_mask(dir / "missing.png"), Error);
}

TEST(Png, ImageRoundTripAtEightBits)
{
    const auto dir = temp_dir("round");
    const Record r = random_record(7, 9, 11);
    data::save_image(dir / "x.png", r.image);
    const auto back = data::load_image(dir / "x.png");
    for (std::size_t i = 0; i < r.image.size(); ++i)
        EXPECT_NEAR(back[i], r.image[i], 0.5 / 255 + 1e-12);
    data::save_mask(dir / "m.png", r.mask);
    EXPECT_EQ(data::load_mask(dir / "m.png"), r.mask);
}

TEST(DatasetDir, SaveAndLoad)
{
    const auto dir = temp_dir("dataset");
    const auto records = data::synthetic_dataset(3, 4, {32, 64});
    data::save_dataset_dir(dir, records);
    const auto loaded = data::load_dataset_dir(dir);
    ASSERT_EQ(loaded.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(loaded[i].source_id, records[i].source_id);
        EXPECT_EQ(loaded[i].mask, records[i].mask);
        EXPECT_EQ(loaded[i].image.shape(), records[i].image.shape());
    }
}

} // namespace
} // namespace bseg
