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

#include "data/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "common/error.hpp"

namespace mtcrl {

namespace {

constexpr char kMagic[6] = {'M', 'T', 'C', 'R', 'L', '1'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  void u64(std::uint64_t v) { put(to_little(v)); }
  void f64(double v) { put(to_little(v)); }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("failed writing " + path_.string());
  }

 private:
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  std::uint64_t u64() { return to_little(get<std::uint64_t>()); }
  double f64() { return to_little(get<double>()); }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw DataError(path_.string() + ": truncated container");
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  template <typename T>
  T get() {
    T v;
    bytes(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace

void write_container(const std::filesystem::path& path, const Dataset& data) {
  data.validate();
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u64(data.rows());
  w.u64(data.dim());
  w.u64(data.tasks());
  for (const auto& t : data.targets) {
    w.u64(static_cast<std::uint64_t>(t.loss));
    w.u64(t.classes);
  }
  for (double v : data.x.values()) w.f64(v);
  for (const auto& t : data.targets) {
    for (double v : t.y) w.f64(v);
  }
  for (const auto& m : data.causal_masks) {
    for (bool b : m) w.f64(b ? 1.0 : 0.0);
  }
  w.finish();
}

Dataset read_container(const std::filesystem::path& path) {
  Reader r(path);
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + ": bad container magic");
  }
  std::uint64_t rows = r.u64(), dim = r.u64(), tasks = r.u64();
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
  if (rows == 0 || dim == 0 || rows * dim > kLimit || tasks > 1024) {
    throw DataError(path.string() + ": implausible container dimensions");
  }
  Dataset d;
  d.name = path.stem().string();
  for (std::uint64_t t = 0; t < tasks; ++t) {
    std::uint64_t kind = r.u64();
    if (kind > static_cast<std::uint64_t>(TaskLoss::kSquared)) {
      throw DataError(path.string() + ": unknown task loss kind");
    }
    TaskTargets targets;
    targets.loss = static_cast<TaskLoss>(kind);
    targets.classes = r.u64();
    d.targets.push_back(std::move(targets));
  }
  d.x = Array(Shape{rows, dim});
  for (double& v : d.x.values()) v = r.f64();
  for (auto& t : d.targets) {
    t.y.resize(rows);
    for (double& v : t.y) v = r.f64();
  }
  d.causal_masks.assign(tasks, std::vector<bool>(dim));
  for (auto& m : d.causal_masks) {
    for (std::size_t j = 0; j < dim; ++j) m[j] = r.f64() != 0.0;
  }
  if (!r.at_end()) throw DataError(path.string() + ": trailing container bytes");
  d.validate();
  return d;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.dim(); ++j) out << (j ? "," : "") << 'x' << j;
  for (std::size_t t = 0; t < data.tasks(); ++t) out << ",y" << t;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) out << (j ? "," : "") << data.x.at(i, j);
    for (const auto& t : data.targets) out << ',' << t.y[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_splits(const std::filesystem::path& dir, const SplitData& splits, bool csv) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const Dataset*> parts[] = {
      {"train", &splits.train}, {"valid", &splits.valid}, {"test", &splits.test}};
  for (const auto& [stem, data] : parts) {
    write_container(dir / (std::string(stem) + ".bin"), *data);
    if (csv) write_csv(dir / (std::string(stem) + ".csv"), *data);
  }
}

}  // namespace mtcrl
