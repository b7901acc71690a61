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
#ifndef BSEG_DATA_DATASET_DIR_HPP
#define BSEG_DATA_DATASET_DIR_HPP

#include <algorithm>
#include <filesystem>
#include <vector>

#include "bseg/data/png_io.hpp"
#include "bseg/data/sample.hpp"

// A dataset directory holds images/<stem>.png (RGB) and masks/<stem>.png
// (labels 0..11, 255 void) with matching stems.

namespace bseg::data {

inline std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw Error(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

template <typename T = double>
std::vector<SampleRecord<T>> load_dataset_dir(const std::filesystem::path& root)
{
    std::vector<SampleRecord<T>> out;
    for (const auto& image_path : list_pngs(root / "images")) {
        const auto mask_path = root / "masks" / image_path.filename();
        if (!std::filesystem::exists(mask_path))
            throw Error("missing mask for " + image_path.filename().string());
        SampleRecord<T> rec{load_image<T>(image_path), load_mask(mask_path), image_path.stem().string()};
        validate_record(rec);
        out.push_back(std::move(rec));
    }
    if (out.empty())
        throw Error("no images found under " + (root / "images").string());
    return out;
}

/// Masks only, keyed like load_dataset_dir; used when scoring stored predictions.
inline std::vector<Mask> load_mask_dir(const std::filesystem::path& dir, const std::vector<std::string>& stems)
{
    std::vector<Mask> out;
    for (const auto& stem : stems) {
        const auto path = dir / (stem + ".png");
        if (!std::filesystem::exists(path))
            throw Error("missing prediction " + path.string());
        out.push_back(load_mask(path));
    }
    return out;
}

template <typename T>
void save_dataset_dir(const std::filesystem::path& root, const std::vector<SampleRecord<T>>& records)
{
    std::filesystem::create_directories(root / "images");
    std::filesystem::create_directories(root / "masks");
    for (const auto& rec : records) {
        save_image(root / "images" / (rec.source_id + ".png"), rec.image);
        save_mask(root / "masks" / (rec.source_id + ".png"), rec.mask);
    }
}

} // namespace bseg::data

#endif
