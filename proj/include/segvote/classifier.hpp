#pragma once

// Segmented nearest-neighbor voting.
//
// A d-dimensional vector is cut into c contiguous blocks of length d/c.
// Each block is matched against its own dictionary of training segments;
// the classes of the k nearest segments in every block are pooled into
// k*c votes and the majority class wins. c = 1 is plain k-NN, c = d is the
// coordinate-by-coordinate rule.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segvote/random.hpp"

namespace segvote {

struct SegmentationConfig {
  std::size_t d = 1;
  std::size_t c = 1;

  /// Validated constructor: throws ConfigError unless d, c >= 1 and c | d.
  static SegmentationConfig make(std::size_t d, std::size_t c);

  std::size_t segment_length() const noexcept { return d / c; }

  friend bool operator==(const SegmentationConfig&, const SegmentationConfig&) = default;
};

/// Row-major set of equal-length real vectors with dense class labels.
class LabeledDataset {
public:
  LabeledDataset() = default;

  /// Empty dataset of dimension `dim` with `num_classes` classes.
  LabeledDataset(std::size_t dim, int num_classes);

  /// `values.size()` must equal `labels.size() * dim`; labels in [0, num_classes).
  LabeledDataset(std::size_t dim, std::vector<double> values, std::vector<int> labels,
                 int num_classes);

  void push_back(std::span<const double> v, int label);
  void reserve(std::size_t rows);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  int num_classes() const noexcept { return num_classes_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const double> values() const noexcept { return values_; }

  /// M_k for every class k.
  std::vector<std::size_t> class_counts() const;

  /// Row indices of class k, ascending.
  std::vector<std::size_t> class_members(int k) const;

  /// Raw label that dense index k was remapped from at load time.
  /// Identity unless set by a loader.
  const std::vector<std::int64_t>& original_labels() const noexcept { return original_labels_; }
  void set_original_labels(std::vector<std::int64_t> raw);

private:
  std::size_t dim_ = 0;
  int num_classes_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<std::int64_t> original_labels_;
};

/// Coordinate-difference counter used to audit per-query cost.
struct CostCounter {
  std::uint64_t coordinate_ops = 0;
};

/// Read-only view of one subspace dictionary D_j.
struct SubspaceDictionary {
  std::span<const double> segments;      // size() * segment_length values
  std::span<const int> classes;          // class of each entry
  std::span<const std::size_t> sources;  // training row each entry was cut from
  std::size_t segment_length = 0;

  std::size_t size() const noexcept { return classes.size(); }
  std::span<const double> segment(std::size_t i) const {
    return segments.subspan(i * segment_length, segment_length);
  }
};

/// Per-subspace dictionaries, each holding n segments of every class.
/// Immutable after construction; share freely across threads.
class SegmentDictionaries {
public:
  /// Assemble from raw parts. Entries are subspace-major; within a subspace
  /// there must be exactly n entries per class.
  SegmentDictionaries(SegmentationConfig cfg, std::size_t n, int num_classes,
                      std::vector<double> segments, std::vector<int> classes,
                      std::vector<std::size_t> sources);

  const SegmentationConfig& config() const noexcept { return cfg_; }
  std::size_t per_class() const noexcept { return n_; }
  int num_classes() const noexcept { return num_classes_; }
  std::size_t entries_per_subspace() const noexcept {
    return n_ * static_cast<std::size_t>(num_classes_);
  }

  SubspaceDictionary subspace(std::size_t j) const;

private:
  SegmentationConfig cfg_;
  std::size_t n_ = 0;
  int num_classes_ = 0;
  std::vector<double> segments_;
  std::vector<int> classes_;
  std::vector<std::size_t> sources_;
};

struct VoteOutcome {
  std::size_t k = 1;
  std::vector<int> votes;          // c*k entries, subspace-major
  std::vector<std::size_t> tally;  // votes per class
  int decided_class = -1;
  bool tie_broken = false;

  std::size_t subspaces() const noexcept { return k == 0 ? 0 : votes.size() / k; }
  std::span<const int> segment_votes(std::size_t j) const {
    return std::span<const int>(votes).subspan(j * k, k);
  }
};

/// Split v into c contiguous segments of length d/c.
std::vector<std::vector<double>> segment_vector(std::span<const double> v,
                                                const SegmentationConfig& cfg);

/// Sample n distinct words per class for every subspace, independently
/// across subspaces. When n equals a class's size every word is taken in
/// row order and no randomness is consumed for that class.
SegmentDictionaries build_dictionaries(const LabeledDataset& train, const SegmentationConfig& cfg,
                                       std::size_t n, std::uint64_t seed);

double squared_euclidean(std::span<const double> a, std::span<const double> b);

/// Classes of the k entries of `dict` nearest to `segment`, ordered by
/// (distance, entry index). Exact ties at the selection boundary are
/// resolved by a uniform random subset of the tied entries; no randomness
/// is drawn when the selection is unambiguous.
std::vector<int> segment_vote(std::span<const double> segment, const SubspaceDictionary& dict,
                              std::size_t k, Rng& rng, CostCounter* cost = nullptr);

/// Full c-segmentation decision. Randomness is drawn for segment ties in
/// ascending subspace order, then once for a shared maximum tally.
VoteOutcome classify(std::span<const double> z, const SegmentDictionaries& dicts, std::size_t k,
                     Rng& rng, CostCounter* cost = nullptr);

}  // namespace segvote
