#pragma once

// Synthetic two-class (and multi-class) distribution families.
//
//  A  sign-flip product model: class words are base vectors in {-1,+1}^d
//     with each coordinate flipped independently with probability rho.
//  B  sparse-spike additive model: base vectors with unit spikes every l
//     coordinates plus rare perturbations of amplitude N.
//  C  shared-support multiplicative model: one Bernoulli(p) support vector
//     shared by every word, per-word amplitudes >= a on it, plus the
//     model-B base vectors.
//
// Every generator returns the training words, a fresh query distributed as
// a class-0 word, and the base vectors. Output is a pure function of the
// parameters including the seed.

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "segvote/classifier.hpp"

namespace segvote {

struct ModelAParams {
  std::size_t d = 1000;
  double rho = 0.1;
  std::size_t M = 1;
  std::uint64_t seed = 0;
  /// Draw class 1 from the same base vector as class 0 (indistinguishable
  /// classes; used as a chance-level control).
  bool identical_classes = false;
};

struct ModelBParams {
  std::size_t d = 10000;
  std::size_t l = 10;
  double p = 0.01;
  double amp = 10.0;  // perturbation amplitude N
  int K = 2;
  std::size_t M = 1;
  std::size_t nu = 1;  // dictionary segments per class
  std::uint64_t seed = 0;
};

struct AmplitudeLaw {
  enum class Kind { uniform, constant, shifted_exponential };
  Kind kind = Kind::uniform;
  double upper_ratio = 2.0;  // uniform on [a, upper_ratio * a]
  double excess_mean = 1.0;  // shifted_exponential: a + Exp(mean = excess_mean * a)

  double sample(Rng& rng, double a) const;
};

struct ModelCParams {
  std::size_t d = 10000;
  std::size_t l = 10;
  double p = 0.01;
  double a = 10.0;
  AmplitudeLaw amplitude_law{};
  std::size_t M = 1;
  std::uint64_t seed = 0;
};

using ModelSpec = std::variant<ModelAParams, ModelBParams, ModelCParams>;

struct GeneratedInstance {
  LabeledDataset train;  // class 0 words first, then class 1, ...
  std::vector<double> query;
  int true_class = 0;
  std::vector<std::vector<double>> bases;  // m_1 ... m_K
};

void validate(const ModelAParams& params);
void validate(const ModelBParams& params);
void validate(const ModelCParams& params);

GeneratedInstance model_a_generate(const ModelAParams& params);
GeneratedInstance model_b_generate(const ModelBParams& params);
GeneratedInstance model_c_generate(const ModelCParams& params);

/// m_1 = 0; m_k (k >= 2) has a 1 at offset k-2 of every length-l block.
std::vector<std::vector<double>> spike_base_vectors(std::size_t d, std::size_t l, int K);

// ModelSpec dispatch.
GeneratedInstance generate(const ModelSpec& model);
std::size_t model_dimension(const ModelSpec& model);
int model_classes(const ModelSpec& model);
/// Segments per class placed in every subspace dictionary (1, or nu for B).
std::size_t model_dictionary_size(const ModelSpec& model);
ModelSpec with_seed(ModelSpec model, std::uint64_t seed);
const char* model_name(const ModelSpec& model);

}  // namespace segvote
