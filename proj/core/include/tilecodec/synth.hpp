/*
 * Copyright 2026 The tilecodec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>

#include "tilecodec/image_io.hpp"

namespace tilecodec {

/// Deterministic synthetic test image: smooth color gradients, filled and
/// soft-edged shapes, striped texture bands and a noise region. Content is a
/// pure function of (width, height, seed); spatial complexity is deliberately
/// uneven so per-tile difficulty varies across the frame.
RgbImage synth_corpus_image(int width, int height, uint64_t seed);

}  // namespace tilecodec
