#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "segvote/dataset_io.hpp"
#include "segvote/error.hpp"

using namespace segvote;

namespace {

std::filesystem::path tmp(const std::string& name) { return oracle::tmp_dir() / ("io_" + name); }

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

template <typename T>
void put(std::string& s, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));  // host is little-endian
  s.append(buf, sizeof(T));
}

// Hand-assembled SEGF bytes, independent of write_segf.
std::string segf_bytes(std::uint32_t d, const std::vector<std::pair<std::uint32_t, std::vector<float>>>& recs) {
  std::string s = "SEGF";
  put<std::uint16_t>(s, 1);
  put<std::uint32_t>(s, d);
  put<std::uint64_t>(s, recs.size());
  for (const auto& [label, values] : recs) {
    put(s, label);
    for (float v : values) put(s, v);
  }
  return s;
}

LabeledDataset sample(std::size_t d, std::size_t rows, int K, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset ds(d, K);
  std::vector<double> row(d);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& x : row) x = static_cast<double>(static_cast<float>(uniform01(rng) * 200.0 - 100.0));
    ds.push_back(row, static_cast<int>(r % static_cast<std::size_t>(K)));
  }
  return ds;
}

bool same_rows(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.label(i) != b.label(i)) return false;
    const auto ra = a.row(i), rb = b.row(i);
    if (!std::equal(ra.begin(), ra.end(), rb.begin())) return false;
  }
  return true;
}

// CSV keeps 9 significant digits, so values agree once narrowed to binary32.
bool same_rows_float(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.label(i) != b.label(i)) return false;
    for (std::size_t j = 0; j < a.dim(); ++j) {
      if (static_cast<float>(a.row(i)[j]) != static_cast<float>(b.row(i)[j])) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("SEGF reader on hand-built bytes") {
  const auto path = tmp("hand.segf");
  write_bytes(path, segf_bytes(2, {{7, {1.5f, -2.0f}}, {3, {0.25f, 8.0f}}, {7, {0.0f, 1.0f}}}));
  const auto ds = load_dataset(path);
  CHECK(ds.dim() == 2);
  CHECK(ds.size() == 3);
  CHECK(ds.num_classes() == 2);
  // raw labels remap in ascending order: 3 -> 0, 7 -> 1
  CHECK(ds.label(0) == 1);
  CHECK(ds.label(1) == 0);
  CHECK(ds.row(0)[0] == 1.5);
  CHECK(ds.row(1)[1] == 8.0);
  CHECK(ds.original_labels() == std::vector<std::int64_t>{3, 7});
}

TEST_CASE("SEGF round trip is bit-exact for binary32 values") {
  const auto ds = sample(5, 40, 4, 1);
  const auto path = tmp("round.segf");
  save_dataset(ds, path);
  CHECK(same_rows(load_dataset(path), ds));

  std::stringstream buf;
  write_segf(ds, buf);
  const std::string bytes = buf.str();
  CHECK(bytes.size() == 4 + 2 + 4 + 8 + 40 * (4 + 5 * 4));
  CHECK(bytes.substr(0, 4) == "SEGF");
}

TEST_CASE("CSV round trip") {
  const auto ds = sample(3, 12, 3, 2);
  const auto path = tmp("round.csv");
  save_dataset(ds, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "label,f0,f1,f2");
  CHECK(same_rows_float(load_dataset(path), ds));
}

TEST_CASE("CSV reader") {
  std::istringstream in("label,f0,f1\n10,1,2\n\n-4,3.5,4\r\n10,0,0\n");
  const auto ds = read_csv(in);
  CHECK(ds.size() == 3);
  CHECK(ds.original_labels() == std::vector<std::int64_t>{-4, 10});
  CHECK(ds.label(0) == 1);
  CHECK(ds.label(1) == 0);
  CHECK(ds.row(1)[0] == 3.5);

  std::istringstream only_header("label,f0,f1\n");
  const auto empty = read_csv(only_header);
  CHECK(empty.empty());
  CHECK(empty.dim() == 2);
}

TEST_CASE("format detection and labels survive a format change") {
  CHECK(format_for_path("x.csv") == DatasetFormat::csv);
  CHECK(format_for_path("x.CSV") == DatasetFormat::csv);
  CHECK(format_for_path("x.segf") == DatasetFormat::segf);
  CHECK(format_for_path("x") == DatasetFormat::segf);

  std::istringstream in("label,f0\n5,1\n9,2\n");
  const auto ds = read_csv(in);
  const auto path = tmp("labels.segf");
  save_dataset(ds, path);
  const auto back = load_dataset(path);
  CHECK(back.original_labels() == std::vector<std::int64_t>{5, 9});
}

TEST_CASE("reader errors") {
  SUBCASE("empty file") {
    const auto path = tmp("empty.bin");
    write_bytes(path, "");
    CHECK_THROWS_AS(load_dataset(path), EmptyInputError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset(tmp("does_not_exist.segf")), IoError);
  }
  SUBCASE("bad version") {
    std::string bytes = segf_bytes(1, {{0, {1.0f}}});
    bytes[4] = 2;
    std::istringstream in(bytes);
    CHECK_THROWS_AS(read_segf(in), FormatError);
  }
  SUBCASE("bad magic") {
    std::istringstream in("SEGX0000000000000000");
    CHECK_THROWS_AS(read_segf(in), FormatError);
  }
  SUBCASE("truncated") {
    const std::string bytes = segf_bytes(2, {{0, {1.0f, 2.0f}}, {1, {3.0f, 4.0f}}});
    std::istringstream in(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_segf(in), FormatError);
  }
  SUBCASE("trailing bytes") {
    std::istringstream in(segf_bytes(1, {{0, {1.0f}}}) + "x");
    CHECK_THROWS_AS(read_segf(in), FormatError);
  }
  SUBCASE("ragged CSV row") {
    std::istringstream in("label,f0,f1\n0,1,2\n1,3\n");
    CHECK_THROWS_AS(read_csv(in), DimensionError);
  }
  SUBCASE("bad CSV header") {
    std::istringstream in("y,f0\n0,1\n");
    CHECK_THROWS_AS(read_csv(in), FormatError);
    std::istringstream skipped("label,f0,f2\n0,1,2\n");
    CHECK_THROWS_AS(read_csv(skipped), FormatError);
  }
  SUBCASE("non-numeric CSV cell") {
    std::istringstream in("label,f0\n0,abc\n");
    CHECK_THROWS_AS(read_csv(in), FormatError);
  }
}

TEST_CASE("write errors") {
  const auto ds = sample(2, 4, 2, 3);
  CHECK_THROWS_AS(save_dataset(ds, oracle::tmp_dir() / "no_such_dir" / "x.segf"), WriteError);
  std::istringstream in("label,f0\n-1,1\n");
  const auto negative = read_csv(in);
  std::stringstream out;
  CHECK_THROWS_AS(write_segf(negative, out), WriteError);
}

TEST_CASE("stratified split") {
  LabeledDataset ds(1, 2);
  for (int i = 0; i < 50; ++i) ds.push_back(std::vector<double>{double(i)}, i < 30 ? 0 : 1);
  const auto [train, test] = train_test_split(ds, 0.2, 4);
  CHECK(test.class_counts() == std::vector<std::size_t>{6, 4});
  CHECK(train.class_counts() == std::vector<std::size_t>{24, 16});
  // disjoint, complete, order-preserving
  std::vector<double> all;
  for (std::size_t i = 0; i < train.size(); ++i) {
    all.push_back(train.row(i)[0]);
    if (i > 0) CHECK(train.row(i)[0] > train.row(i - 1)[0]);
  }
  for (std::size_t i = 0; i < test.size(); ++i) all.push_back(test.row(i)[0]);
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 50; ++i) CHECK(all[static_cast<std::size_t>(i)] == double(i));

  const auto again = train_test_split(ds, 0.2, 4);
  CHECK(same_rows(again.second, test));

  CHECK(train_test_split(ds, 0.0, 1).second.empty());
  CHECK_THROWS_AS(train_test_split(ds, 1.0, 1), ParamError);
  CHECK_THROWS_AS(train_test_split(ds, -0.1, 1), ParamError);
}
