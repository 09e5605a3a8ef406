// Copyright 2026 The regmosaic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REGMOSAIC_IMAGE_IO_HPP
#define REGMOSAIC_IMAGE_IO_HPP

#include <filesystem>

#include "regmosaic/imaging.hpp"

namespace regmosaic {

/// Reads PGM (P2/P5), PPM (P3/P6) or PNG. Colour input is reduced with
/// 0.299 R + 0.587 G + 0.114 B. Throws Io / Parse.
GrayImage read_image(const std::filesystem::path& path);

/// Binary P5, intensities rounded to the nearest integer and clamped.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);

/// Picks PNG for a ".png" extension and PGM otherwise.
void write_image(const std::filesystem::path& path, const GrayImage& img);

}  // namespace regmosaic

#endif  // REGMOSAIC_IMAGE_IO_HPP
