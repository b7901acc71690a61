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
#ifndef BSEG_BSEG_HPP
#define BSEG_BSEG_HPP

#include "bseg/error.hpp"
#include "bseg/gradcheck.hpp"
#include "bseg/rng.hpp"
#include "bseg/tensor.hpp"

#include "bseg/nn/activation.hpp"
#include "bseg/nn/batchnorm.hpp"
#include "bseg/nn/concrete_dropout.hpp"
#include "bseg/nn/conv.hpp"
#include "bseg/nn/loss.hpp"
#include "bseg/nn/pooling.hpp"

#include "bseg/model/checkpoint.hpp"
#include "bseg/model/inference.hpp"
#include "bseg/model/segnet.hpp"

#include "bseg/data/augment.hpp"
#include "bseg/data/dataset_dir.hpp"
#include "bseg/data/png_io.hpp"
#include "bseg/data/remap.hpp"
#include "bseg/data/resize.hpp"
#include "bseg/data/sample.hpp"
#include "bseg/data/synthetic.hpp"

#include "bseg/train/evaluate.hpp"
#include "bseg/train/metrics.hpp"
#include "bseg/train/objective.hpp"
#include "bseg/train/report.hpp"
#include "bseg/train/sgd.hpp"
#include "bseg/train/trainer.hpp"
#include "bseg/train/visualize.hpp"

#include "bseg/diag/gradient_suite.hpp"

#endif
