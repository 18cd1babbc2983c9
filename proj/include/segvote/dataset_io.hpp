#pragma once

// Feature corpus files.
//
// SEGF (all integers little-endian):
//   bytes 0..3   magic "SEGF" (0x53 0x45 0x47 0x46)
//   u16          version = 1
//   u32          d
//   u64          record count
//   per record:  u32 raw label, then d IEEE-754 binary32 values
//
// CSV: header `label,f0,...,f{d-1}`, one record per line, integer labels.
// Values are written with 9 significant digits, enough to round-trip
// binary32.
//
// Raw labels are remapped to dense indices in ascending order at load; the
// raw values are kept in LabeledDataset::original_labels() and written back
// on save.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>

#include "segvote/classifier.hpp"

namespace segvote {

enum class DatasetFormat { csv, segf };

inline constexpr std::uint16_t kSegfVersion = 1;

/// SEGF when the first four bytes are the magic, CSV otherwise.
LabeledDataset load_dataset(const std::filesystem::path& path);

LabeledDataset read_segf(std::istream& in);
LabeledDataset read_csv(std::istream& in);
void write_segf(const LabeledDataset& ds, std::ostream& out);
void write_csv(const LabeledDataset& ds, std::ostream& out);

/// `.csv` (any case) selects CSV, everything else SEGF.
DatasetFormat format_for_path(const std::filesystem::path& path);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path,
                  DatasetFormat format);

/// Stratified split: class k contributes floor(M_k * test_fraction) test
/// rows chosen at random. Both parts keep the input's row order and label
/// map.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double test_fraction,
                                                           std::uint64_t seed);

}  // namespace segvote
