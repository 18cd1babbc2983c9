#include "segvote/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "segvote/error.hpp"

namespace segvote {

namespace {

double sq_dist(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// Reused buffers for one classify call.
struct VoteScratch {
  std::vector<double> dist;
  std::vector<std::size_t> strict;
  std::vector<std::size_t> tied;
  std::vector<double> kth;
};

void vote_into(const double* z, const SubspaceDictionary& dict, std::size_t k, Rng& rng,
               CostCounter* cost, VoteScratch& s, int* out) {
  const std::size_t m = dict.size();
  const std::size_t len = dict.segment_length;
  if (m == 0) throw StateError("segment_vote: empty dictionary");
  if (k == 0 || k > m) {
    throw ConfigError("segment_vote: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(m) + "]");
  }

  s.dist.resize(m);
  const double* seg = dict.segments.data();
  for (std::size_t i = 0; i < m; ++i) s.dist[i] = sq_dist(z, seg + i * len, len);
  if (cost) cost->coordinate_ops += static_cast<std::uint64_t>(m) * len;

  double threshold;
  if (k == 1) {
    threshold = *std::min_element(s.dist.begin(), s.dist.end());
  } else {
    s.kth.assign(s.dist.begin(), s.dist.end());
    std::nth_element(s.kth.begin(), s.kth.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     s.kth.end());
    threshold = s.kth[k - 1];
  }

  s.strict.clear();
  s.tied.clear();
  for (std::size_t i = 0; i < m; ++i) {
    if (s.dist[i] < threshold) {
      s.strict.push_back(i);
    } else if (s.dist[i] == threshold) {
      s.tied.push_back(i);
    }
  }

  const std::size_t need = k - s.strict.size();
  if (need < s.tied.size()) {
    // Partial Fisher-Yates: first `need` slots become a uniform subset.
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t r = i + uniform_index(rng, s.tied.size() - i);
      std::swap(s.tied[i], s.tied[r]);
    }
    s.tied.resize(need);
  }
  s.strict.insert(s.strict.end(), s.tied.begin(), s.tied.end());
  std::sort(s.strict.begin(), s.strict.end(), [&](std::size_t a, std::size_t b) {
    return s.dist[a] < s.dist[b] || (s.dist[a] == s.dist[b] && a < b);
  });
  for (std::size_t i = 0; i < k; ++i) out[i] = dict.classes[s.strict[i]];
}

}  // namespace

SegmentationConfig SegmentationConfig::make(std::size_t d, std::size_t c) {
  if (d == 0) throw ConfigError("dimension d must be >= 1");
  if (c == 0) throw ConfigError("segment count c must be >= 1");
  if (d % c != 0) {
    throw ConfigError("segment count c=" + std::to_string(c) + " does not divide d=" +
                      std::to_string(d));
  }
  return SegmentationConfig{d, c};
}

// ---------------------------------------------------------------------------
// LabeledDataset

LabeledDataset::LabeledDataset(std::size_t dim, int num_classes)
    : dim_(dim), num_classes_(num_classes) {
  if (dim == 0) throw InputError("dataset dimension must be >= 1");
  if (num_classes < 1) throw InputError("dataset needs at least one class");
  original_labels_.resize(static_cast<std::size_t>(num_classes));
  std::iota(original_labels_.begin(), original_labels_.end(), std::int64_t{0});
}

LabeledDataset::LabeledDataset(std::size_t dim, std::vector<double> values,
                               std::vector<int> labels, int num_classes)
    : LabeledDataset(dim, num_classes) {
  if (values.size() != labels.size() * dim) {
    throw InputError("dataset values size " + std::to_string(values.size()) +
                     " does not match " + std::to_string(labels.size()) + " rows of dimension " +
                     std::to_string(dim));
  }
  for (int l : labels) {
    if (l < 0 || l >= num_classes) {
      throw InputError("label " + std::to_string(l) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
  values_ = std::move(values);
  labels_ = std::move(labels);
}

void LabeledDataset::push_back(std::span<const double> v, int label) {
  if (v.size() != dim_) {
    throw InputError("vector of length " + std::to_string(v.size()) +
                     " pushed into dataset of dimension " + std::to_string(dim_));
  }
  if (label < 0 || label >= num_classes_) {
    throw InputError("label " + std::to_string(label) + " outside [0, " +
                     std::to_string(num_classes_) + ")");
  }
  values_.insert(values_.end(), v.begin(), v.end());
  labels_.push_back(label);
}

void LabeledDataset::reserve(std::size_t rows) {
  values_.reserve(rows * dim_);
  labels_.reserve(rows);
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

std::vector<std::size_t> LabeledDataset::class_members(int k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == k) out.push_back(i);
  }
  return out;
}

void LabeledDataset::set_original_labels(std::vector<std::int64_t> raw) {
  if (raw.size() != static_cast<std::size_t>(num_classes_)) {
    throw InputError("original label map must have one entry per class");
  }
  original_labels_ = std::move(raw);
}

// ---------------------------------------------------------------------------
// SegmentDictionaries

SegmentDictionaries::SegmentDictionaries(SegmentationConfig cfg, std::size_t n, int num_classes,
                                         std::vector<double> segments, std::vector<int> classes,
                                         std::vector<std::size_t> sources)
    : cfg_(SegmentationConfig::make(cfg.d, cfg.c)),
      n_(n),
      num_classes_(num_classes),
      segments_(std::move(segments)),
      classes_(std::move(classes)),
      sources_(std::move(sources)) {
  if (num_classes < 1) throw ConfigError("dictionaries need at least one class");
  const std::size_t per_sub = entries_per_subspace();
  if (classes_.size() != per_sub * cfg_.c || sources_.size() != classes_.size() ||
      segments_.size() != classes_.size() * cfg_.segment_length()) {
    throw ConfigError("dictionary arrays inconsistent with c, n and K");
  }
  std::vector<std::size_t> seen(static_cast<std::size_t>(num_classes));
  for (std::size_t j = 0; j < cfg_.c; ++j) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t i = 0; i < per_sub; ++i) {
      const int cls = classes_[j * per_sub + i];
      if (cls < 0 || cls >= num_classes) throw ConfigError("dictionary class out of range");
      ++seen[static_cast<std::size_t>(cls)];
    }
    for (std::size_t cnt : seen) {
      if (cnt != n) throw ConfigError("every subspace must hold exactly n entries per class");
    }
  }
}

SubspaceDictionary SegmentDictionaries::subspace(std::size_t j) const {
  const std::size_t per_sub = entries_per_subspace();
  const std::size_t len = cfg_.segment_length();
  return SubspaceDictionary{
      std::span<const double>(segments_).subspan(j * per_sub * len, per_sub * len),
      std::span<const int>(classes_).subspan(j * per_sub, per_sub),
      std::span<const std::size_t>(sources_).subspan(j * per_sub, per_sub),
      len,
  };
}

// ---------------------------------------------------------------------------
// Operations

std::vector<std::vector<double>> segment_vector(std::span<const double> v,
                                                const SegmentationConfig& cfg) {
  if (v.size() != cfg.d) {
    throw InputError("vector of length " + std::to_string(v.size()) + " does not match d=" +
                     std::to_string(cfg.d));
  }
  const std::size_t len = cfg.segment_length();
  std::vector<std::vector<double>> out;
  out.reserve(cfg.c);
  for (std::size_t j = 0; j < cfg.c; ++j) {
    auto first = v.begin() + static_cast<std::ptrdiff_t>(j * len);
    out.emplace_back(first, first + static_cast<std::ptrdiff_t>(len));
  }
  return out;
}

SegmentDictionaries build_dictionaries(const LabeledDataset& train, const SegmentationConfig& cfg,
                                       std::size_t n, std::uint64_t seed) {
  const auto checked = SegmentationConfig::make(cfg.d, cfg.c);
  if (train.dim() != checked.d) {
    throw ConfigError("dataset dimension " + std::to_string(train.dim()) +
                      " does not match d=" + std::to_string(checked.d));
  }
  if (n == 0) throw ConfigError("dictionary size n must be >= 1");
  const int num_classes = train.num_classes();
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    members[static_cast<std::size_t>(k)] = train.class_members(k);
    if (members[static_cast<std::size_t>(k)].size() < n) {
      throw CapacityError("class " + std::to_string(k) + " has " +
                          std::to_string(members[static_cast<std::size_t>(k)].size()) +
                          " words, cannot sample n=" + std::to_string(n) +
                          " without replacement");
    }
  }

  const std::size_t len = checked.segment_length();
  const std::size_t per_sub = n * static_cast<std::size_t>(num_classes);
  std::vector<double> segments;
  std::vector<int> classes;
  std::vector<std::size_t> sources;
  segments.reserve(per_sub * checked.d);
  classes.reserve(per_sub * checked.c);
  sources.reserve(per_sub * checked.c);

  Rng rng(seed);
  std::vector<std::size_t> pool;
  for (std::size_t j = 0; j < checked.c; ++j) {
    for (int k = 0; k < num_classes; ++k) {
      pool = members[static_cast<std::size_t>(k)];
      if (n < pool.size()) {
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t r = i + uniform_index(rng, pool.size() - i);
          std::swap(pool[i], pool[r]);
        }
        pool.resize(n);
      }
      for (std::size_t src : pool) {
        const auto seg = train.row(src).subspan(j * len, len);
        segments.insert(segments.end(), seg.begin(), seg.end());
        classes.push_back(k);
        sources.push_back(src);
      }
    }
  }
  return SegmentDictionaries(checked, n, num_classes, std::move(segments), std::move(classes),
                             std::move(sources));
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("squared_euclidean: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " differ");
  }
  return sq_dist(a.data(), b.data(), a.size());
}

std::vector<int> segment_vote(std::span<const double> segment, const SubspaceDictionary& dict,
                              std::size_t k, Rng& rng, CostCounter* cost) {
  if (dict.size() == 0) throw StateError("segment_vote: empty dictionary");
  if (segment.size() != dict.segment_length) {
    throw InputError("segment of length " + std::to_string(segment.size()) +
                     " does not match dictionary segment length " +
                     std::to_string(dict.segment_length));
  }
  VoteScratch scratch;
  std::vector<int> out(k);
  vote_into(segment.data(), dict, k, rng, cost, scratch, out.data());
  return out;
}

VoteOutcome classify(std::span<const double> z, const SegmentDictionaries& dicts, std::size_t k,
                     Rng& rng, CostCounter* cost) {
  const auto& cfg = dicts.config();
  if (z.size() != cfg.d) {
    throw InputError("query of length " + std::to_string(z.size()) + " does not match d=" +
                     std::to_string(cfg.d));
  }
  const std::size_t len = cfg.segment_length();
  VoteOutcome out;
  out.k = k;
  out.votes.resize(cfg.c * k);
  out.tally.assign(static_cast<std::size_t>(dicts.num_classes()), 0);

  VoteScratch scratch;
  for (std::size_t j = 0; j < cfg.c; ++j) {
    vote_into(z.data() + j * len, dicts.subspace(j), k, rng, cost, scratch,
              out.votes.data() + j * k);
  }
  for (int v : out.votes) ++out.tally[static_cast<std::size_t>(v)];

  const std::size_t best = *std::max_element(out.tally.begin(), out.tally.end());
  std::vector<int> leaders;
  for (std::size_t cls = 0; cls < out.tally.size(); ++cls) {
    if (out.tally[cls] == best) leaders.push_back(static_cast<int>(cls));
  }
  out.tie_broken = leaders.size() > 1;
  out.decided_class =
      out.tie_broken ? leaders[uniform_index(rng, leaders.size())] : leaders.front();
  return out;
}

}  // namespace segvote
