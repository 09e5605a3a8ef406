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


#include "regmosaic/image_io.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "regmosaic/error.hpp"
#include "test_util.hpp"

namespace regmosaic {
namespace {

GrayImage integer_image(int w, int h, unsigned seed) {
  GrayImage img(w, h);
  std::mt19937 rng(seed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, static_cast<double>(rng() % 256));
  return img;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

TEST(ImageIo, PgmRoundTripIsExactForIntegers) {
  const auto dir = test::scratch_dir("io");
  const auto img = integer_image(17, 9, 1);
  write_pgm(dir / "a.pgm", img);
  EXPECT_EQ(read_image(dir / "a.pgm"), img);
}

TEST(ImageIo, PngRoundTripIsExactForIntegers) {
  const auto dir = test::scratch_dir("io");
  const auto img = integer_image(13, 21, 2);
  write_png(dir / "a.png", img);
  EXPECT_EQ(read_image(dir / "a.png"), img);
}

TEST(ImageIo, WriteImagePicksFormatFromExtension) {
  const auto dir = test::scratch_dir("io");
  const auto img = integer_image(4, 4, 3);
  write_image(dir / "x.PNG", img);
  write_image(dir / "x.pgm", img);
  std::ifstream png(dir / "x.PNG", std::ios::binary), pgm(dir / "x.pgm", std::ios::binary);
  char a[2], b[2];
  png.read(a, 2);
  pgm.read(b, 2);
  EXPECT_EQ(a[1], 'P');
  EXPECT_EQ(std::string(b, 2), "P5");
}

TEST(ImageIo, WritingRoundsAndClamps) {
  const auto dir = test::scratch_dir("io");
  GrayImage img(3, 1);
  img.set(0, 0, 1.4);
  img.set(1, 0, 1.6);
  img.set(2, 0, 254.7);
  write_pgm(dir / "r.pgm", img);
  const auto back = read_image(dir / "r.pgm");
  EXPECT_EQ(back.at(0, 0), 1.0);
  EXPECT_EQ(back.at(1, 0), 2.0);
  EXPECT_EQ(back.at(2, 0), 255.0);
}

TEST(ImageIo, AsciiPgmWithCommentsAndMaxval) {
  const auto dir = test::scratch_dir("io");
  write_text(dir / "a.pgm", "P2\n# comment\n2 2\n15\n0 15\n5 10\n");
  const auto img = read_image(dir / "a.pgm");
  EXPECT_EQ(img.width(), 2);
  EXPECT_EQ(img.at(1, 0), 255.0);
  EXPECT_EQ(img.at(0, 1), 85.0);
}

TEST(ImageIo, ColourPpmReducedToLuminance) {
  const auto dir = test::scratch_dir("io");
  write_text(dir / "c.ppm", "P3\n2 1\n255\n255 0 0  10 20 30\n");
  const auto img = read_image(dir / "c.ppm");
  EXPECT_NEAR(img.at(0, 0), 0.299 * 255, 1e-12);
  EXPECT_NEAR(img.at(1, 0), 0.299 * 10 + 0.587 * 20 + 0.114 * 30, 1e-12);
}

TEST(ImageIo, SixteenBitBinary) {
  const auto dir = test::scratch_dir("io");
  std::string s = "P5\n2 1\n65535\n";
  s += std::string("\xff\xff\x00\x00", 4);
  write_text(dir / "w.pgm", s);
  const auto img = read_image(dir / "w.pgm");
  EXPECT_EQ(img.at(0, 0), 255.0);
  EXPECT_EQ(img.at(1, 0), 0.0);
}

TEST(ImageIo, Errors) {
  const auto dir = test::scratch_dir("io");
  EXPECT_EQ(code_of([&] { read_image(dir / "missing.pgm"); }), ErrorCode::Io);
  write_text(dir / "bad.pgm", "P7\n1 1\n255\n");
  EXPECT_EQ(code_of([&] { read_image(dir / "bad.pgm"); }), ErrorCode::Parse);
  write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
  EXPECT_EQ(code_of([&] { read_image(dir / "short.pgm"); }), ErrorCode::Parse);
  write_text(dir / "hdr.pgm", "P5\nx 4\n255\n");
  EXPECT_EQ(code_of([&] { read_image(dir / "hdr.pgm"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([&] { write_pgm(dir / "no" / "such" / "dir.pgm", GrayImage(1, 1)); }),
            ErrorCode::Io);
}

}  // namespace
}  // namespace regmosaic
