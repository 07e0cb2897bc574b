// Copyright 2026 The MT-CRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "data/idx.hpp"

#include <fstream>
#include <iterator>

#include "common/error.hpp"

namespace mtcrl {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
               static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

IdxFile read_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw DataError(path.string() + ": truncated IDX header");
  IdxFile file;
  file.magic = read_be32(bytes, 0);
  std::size_t ndims = 0;
  if (file.magic == kIdxImageMagic) {
    ndims = 3;
  } else if (file.magic == kIdxLabelMagic) {
    ndims = 1;
  } else {
    throw DataError(path.string() + ": bad IDX magic");
  }
  std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) throw DataError(path.string() + ": truncated IDX header");
  std::size_t payload = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    file.dims.push_back(read_be32(bytes, 4 + 4 * i));
    payload *= file.dims.back();
  }
  if (bytes.size() < header + payload) throw DataError(path.string() + ": truncated IDX payload");
  if (bytes.size() > header + payload) throw DataError(path.string() + ": trailing IDX bytes");
  file.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return file;
}

void write_idx(const std::filesystem::path& path, const IdxFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_be32(out, file.magic);
  for (std::uint32_t d : file.dims) write_be32(out, d);
  out.write(reinterpret_cast<const char*>(file.data.data()),
            static_cast<std::streamsize>(file.data.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

IdxImages load_idx_images(const std::filesystem::path& path) {
  IdxFile file = read_idx(path);
  if (file.magic != kIdxImageMagic) throw DataError(path.string() + ": not an IDX image file");
  IdxImages images;
  images.count = file.dims[0];
  images.rows = file.dims[1];
  images.cols = file.dims[2];
  if (images.count == 0 || images.rows == 0 || images.cols == 0) {
    throw DataError(path.string() + ": empty IDX image file");
  }
  images.pixels = Array(Shape{images.count, images.rows * images.cols});
  auto px = images.pixels.values();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = file.data[i] / 255.0;
  return images;
}

std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path) {
  IdxFile file = read_idx(path);
  if (file.magic != kIdxLabelMagic) throw DataError(path.string() + ": not an IDX label file");
  return file.data;
}

MnistDigits load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels) {
  MnistDigits digits{load_idx_images(images), load_idx_labels(labels)};
  if (digits.labels.size() != digits.images.count) {
    throw DataError("image file has " + std::to_string(digits.images.count) +
                    " entries but label file has " + std::to_string(digits.labels.size()));
  }
  return digits;
}

}  // namespace mtcrl
