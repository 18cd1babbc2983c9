#include "segvote/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "segvote/error.hpp"
#include "segvote/random.hpp"

namespace segvote {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'E', 'G', 'F'};

// Dense remap of raw labels, ascending by raw value.
LabeledDataset assemble(std::size_t dim, std::vector<double> values,
                        const std::vector<std::int64_t>& raw) {
  std::map<std::int64_t, int> dense;
  for (auto r : raw) dense.emplace(r, 0);
  std::vector<std::int64_t> originals;
  originals.reserve(dense.size());
  int next = 0;
  for (auto& [r, idx] : dense) {
    idx = next++;
    originals.push_back(r);
  }
  std::vector<int> labels;
  labels.reserve(raw.size());
  for (auto r : raw) labels.push_back(dense.at(r));
  const int K = std::max(1, next);
  LabeledDataset ds(dim, std::move(values), std::move(labels), K);
  if (!originals.empty()) ds.set_original_labels(std::move(originals));
  return ds;
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw FormatError(std::string("SEGF truncated while reading ") + what);
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

template <typename T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(buf.data(), buf.size());
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line_no) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad number '" + tmp + "'");
  }
  return v;
}

std::int64_t parse_label(std::string_view s, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": bad label '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t raw_label(const LabeledDataset& ds, std::size_t i) {
  return ds.original_labels()[static_cast<std::size_t>(ds.label(i))];
}

}  // namespace

LabeledDataset read_segf(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("missing SEGF magic bytes");
  }
  const auto version = get_le<std::uint16_t>(in, "version");
  if (version != kSegfVersion) {
    throw FormatError("unsupported SEGF version " + std::to_string(version));
  }
  const auto d = get_le<std::uint32_t>(in, "dimension");
  const auto count = get_le<std::uint64_t>(in, "record count");
  if (d == 0) throw DimensionError("SEGF dimension is zero");

  std::vector<double> values;
  std::vector<std::int64_t> raw;
  values.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)) * d);
  raw.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t r = 0; r < count; ++r) {
    raw.push_back(get_le<std::uint32_t>(in, "label"));
    for (std::uint32_t i = 0; i < d; ++i) {
      values.push_back(std::bit_cast<float>(get_le<std::uint32_t>(in, "value")));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after " + std::to_string(count) + " SEGF records");
  }
  return assemble(d, std::move(values), raw);
}

LabeledDataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError("CSV input is empty");
  const std::string header_text = trim_cr(line);
  const auto header = split_commas(header_text);
  if (header.size() < 2 || header[0] != "label") {
    throw FormatError("CSV header must start with 'label' followed by feature columns");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (header[i + 1] != "f" + std::to_string(i)) {
      throw FormatError("CSV header column " + std::to_string(i + 1) + " must be 'f" +
                        std::to_string(i) + "'");
    }
  }

  std::vector<double> values;
  std::vector<std::int64_t> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != d + 1) {
      throw DimensionError("line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size() - 1) + " values, header declares d=" +
                           std::to_string(d));
    }
    raw.push_back(parse_label(fields[0], line_no));
    for (std::size_t i = 1; i <= d; ++i) values.push_back(parse_double(fields[i], line_no));
  }
  return assemble(d, std::move(values), raw);
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const auto got = in.gcount();
  if (got == 0) throw EmptyInputError(path.string() + " is empty");
  in.clear();
  in.seekg(0);
  if (got == 4 && head == kMagic) return read_segf(in);
  return read_csv(in);
}

void write_segf(const LabeledDataset& ds, std::ostream& out) {
  if (ds.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw WriteError("dimension does not fit the SEGF header");
  }
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kSegfVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
  put_le<std::uint64_t>(out, ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const auto lbl = raw_label(ds, r);
    if (lbl < 0 || lbl > std::numeric_limits<std::uint32_t>::max()) {
      throw WriteError("label " + std::to_string(lbl) + " does not fit SEGF's u32 field");
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(lbl));
    for (double v : ds.row(r)) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
}

void write_csv(const LabeledDataset& ds, std::ostream& out) {
  out << "label";
  for (std::size_t i = 0; i < ds.dim(); ++i) out << ",f" << i;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << raw_label(ds, r);
    for (double v : ds.row(r)) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

DatasetFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".csv" ? DatasetFormat::csv : DatasetFormat::segf;
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  save_dataset(ds, path, format_for_path(path));
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                  DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot open " + path.string() + " for writing");
  if (format == DatasetFormat::segf) {
    write_segf(ds, out);
  } else {
    write_csv(ds, out);
  }
  out.flush();
  if (!out) throw WriteError("failed writing " + path.string());
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double test_fraction,
                                                           std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ParamError("test_fraction must lie in [0, 1)");
  }
  std::vector<char> is_test(ds.size(), 0);
  Rng rng(seed);
  for (int k = 0; k < ds.num_classes(); ++k) {
    auto members = ds.class_members(k);
    const auto take =
        static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * test_fraction));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t r = i + uniform_index(rng, members.size() - i);
      std::swap(members[i], members[r]);
      is_test[members[i]] = 1;
    }
  }
  LabeledDataset train(ds.dim(), ds.num_classes());
  LabeledDataset test(ds.dim(), ds.num_classes());
  train.set_original_labels(ds.original_labels());
  test.set_original_labels(ds.original_labels());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (is_test[i] ? test : train).push_back(ds.row(i), ds.label(i));
  }
  return {std::move(train), std::move(test)};
}

}  // namespace segvote
