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

// Trains a small model on generated figures, then writes a colour rendering,
// an overlay and an MC-dropout uncertainty map for each training image.
//
//   bseg_demo [out_dir] [steps]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "bseg/bseg.hpp"

int main(int argc, char** argv)
{
    namespace fs = std::filesystem;
    const fs::path out = argc > 1 ? argv[1] : "bseg_demo_out";
    const std::size_t steps = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 150;

    try {
        const auto dataset = bseg::data::synthetic_dataset(8, 1, {64, 64});

        bseg::train::TrainConfig cfg;
        cfg.steps = steps;
        cfg.batch_size = 8;
        bseg::train::TrainHooks<double> hooks;
        hooks.on_step = [](const bseg::train::LossRecord& r) {
            if (r.step % 10 == 0)
                std::printf("step %4zu  loss %.4f  p %.3f / %.3f\n", r.step, r.loss, r.p_center, r.p_output);
        };
        const auto result = bseg::train::train(cfg, dataset, hooks);

        fs::create_directories(out);
        bseg::model::save_checkpoint(result.model, out / "model.bseg");
        const bseg::RngStream rng(7);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto& rec = dataset[i];
            const auto seg = bseg::train::segment_image(result.model, rec.image, 10, rng.derive(i));
            const std::string stem = rec.source_id;
            bseg::data::save_image(out / (stem + "_image.png"), rec.image);
            bseg::data::write_png(out / (stem + "_truth.png"), bseg::train::colorize(rec.mask));
            bseg::data::write_png(out / (stem + "_color.png"), bseg::train::colorize(seg.labels));
            bseg::data::write_png(out / (stem + "_overlay.png"), bseg::train::overlay(rec.image, seg.labels));
            bseg::data::write_png(out / (stem + "_uncertainty.png"), bseg::train::uncertainty_map(*seg.variance));
        }

        const auto report = bseg::train::evaluate(result.model, dataset);
        std::cout << bseg::train::render_report_tsv(report);
        std::cout << "images written to " << out.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
