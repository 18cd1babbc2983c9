#include "segvote/models.hpp"

#include <cmath>
#include <string>

#include "segvote/error.hpp"

namespace segvote {

namespace {

// Draw order for every model: base vectors, class 0 words, class 1 words,
// ..., query. Fixing it keeps instances bit-identical for a given seed.

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParamError(msg);
}

void check_spacing(std::size_t d, std::size_t l) {
  require(d >= 1, "d must be >= 1");
  require(l >= 1, "spike spacing l must be >= 1");
  require(d % l == 0, "spike spacing l=" + std::to_string(l) + " must divide d=" +
                          std::to_string(d));
}

std::vector<double> random_signs(std::size_t d, Rng& rng) {
  std::vector<double> v(d);
  for (auto& x : v) x = (rng() >> 63) ? 1.0 : -1.0;
  return v;
}

}  // namespace

double AmplitudeLaw::sample(Rng& rng, double a) const {
  switch (kind) {
    case Kind::uniform:
      return a + (upper_ratio - 1.0) * a * uniform01(rng);
    case Kind::constant:
      return a;
    case Kind::shifted_exponential:
      // 1 - U in (0, 1], so the log is finite.
      return a - excess_mean * a * std::log(1.0 - uniform01(rng));
  }
  return a;
}

void validate(const ModelAParams& params) {
  require(params.d >= 1, "d must be >= 1");
  require(params.rho > 0.0 && params.rho < 0.5, "rho must lie in (0, 1/2)");
  require(params.M >= 1, "M must be >= 1");
}

void validate(const ModelBParams& params) {
  check_spacing(params.d, params.l);
  require(params.K >= 2, "K must be >= 2");
  require(static_cast<std::size_t>(params.K) <= params.l + 1,
          "K=" + std::to_string(params.K) + " exceeds l+1=" + std::to_string(params.l + 1));
  require(params.p >= 0.0 && params.p <= 1.0, "p must lie in [0, 1]");
  require(params.amp > 0.0, "amplitude N must be > 0");
  require(params.M >= 1, "M must be >= 1");
  require(params.nu >= 1, "nu must be >= 1");
  require(params.nu <= params.M, "nu must not exceed M");
}

void validate(const ModelCParams& params) {
  check_spacing(params.d, params.l);
  require(params.p >= 0.0 && params.p <= 1.0, "p must lie in [0, 1]");
  require(params.a > 0.0, "amplitude floor a must be > 0");
  require(params.M >= 1, "M must be >= 1");
  const auto& law = params.amplitude_law;
  require(law.kind != AmplitudeLaw::Kind::uniform || law.upper_ratio >= 1.0,
          "uniform amplitude law needs upper_ratio >= 1");
  require(law.kind != AmplitudeLaw::Kind::shifted_exponential || law.excess_mean > 0.0,
          "shifted exponential amplitude law needs excess_mean > 0");
}

std::vector<std::vector<double>> spike_base_vectors(std::size_t d, std::size_t l, int K) {
  check_spacing(d, l);
  require(K >= 1, "K must be >= 1");
  if (static_cast<std::size_t>(K) > l + 1) {
    throw CapacityError("K=" + std::to_string(K) + " classes need distinct spike offsets but l+1=" +
                        std::to_string(l + 1));
  }
  std::vector<std::vector<double>> bases(static_cast<std::size_t>(K), std::vector<double>(d, 0.0));
  for (int k = 1; k < K; ++k) {
    const auto offset = static_cast<std::size_t>(k - 1);
    for (std::size_t i = offset; i < d; i += l) bases[static_cast<std::size_t>(k)][i] = 1.0;
  }
  return bases;
}

GeneratedInstance model_a_generate(const ModelAParams& params) {
  validate(params);
  Rng rng(params.seed);
  GeneratedInstance out;
  out.bases.push_back(random_signs(params.d, rng));
  out.bases.push_back(params.identical_classes ? out.bases[0] : random_signs(params.d, rng));

  out.train = LabeledDataset(params.d, 2);
  out.train.reserve(2 * params.M);
  std::vector<double> word(params.d);
  auto draw = [&](const std::vector<double>& base) {
    for (std::size_t i = 0; i < params.d; ++i) {
      word[i] = bernoulli(rng, params.rho) ? -base[i] : base[i];
    }
  };
  for (int k = 0; k < 2; ++k) {
    for (std::size_t mu = 0; mu < params.M; ++mu) {
      draw(out.bases[static_cast<std::size_t>(k)]);
      out.train.push_back(word, k);
    }
  }
  draw(out.bases[0]);
  out.query = word;
  return out;
}

GeneratedInstance model_b_generate(const ModelBParams& params) {
  validate(params);
  Rng rng(params.seed);
  GeneratedInstance out;
  out.bases = spike_base_vectors(params.d, params.l, params.K);
  out.train = LabeledDataset(params.d, params.K);
  out.train.reserve(static_cast<std::size_t>(params.K) * params.M);

  std::vector<double> word(params.d);
  auto draw = [&](const std::vector<double>& base) {
    for (std::size_t i = 0; i < params.d; ++i) {
      word[i] = base[i] + (bernoulli(rng, params.p) ? params.amp : 0.0);
    }
  };
  for (int k = 0; k < params.K; ++k) {
    for (std::size_t mu = 0; mu < params.M; ++mu) {
      draw(out.bases[static_cast<std::size_t>(k)]);
      out.train.push_back(word, k);
    }
  }
  draw(out.bases[0]);
  out.query = word;
  return out;
}

GeneratedInstance model_c_generate(const ModelCParams& params) {
  validate(params);
  Rng rng(params.seed);
  GeneratedInstance out;
  out.bases = spike_base_vectors(params.d, params.l, 2);

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < params.d; ++i) {
    if (bernoulli(rng, params.p)) support.push_back(i);
  }

  out.train = LabeledDataset(params.d, 2);
  out.train.reserve(2 * params.M);
  std::vector<double> word(params.d);
  // Amplitudes off the support are multiplied by zero, so only the
  // supported coordinates are drawn.
  auto draw = [&](const std::vector<double>& base) {
    word = base;
    for (std::size_t i : support) word[i] += params.amplitude_law.sample(rng, params.a);
  };
  for (int k = 0; k < 2; ++k) {
    for (std::size_t mu = 0; mu < params.M; ++mu) {
      draw(out.bases[static_cast<std::size_t>(k)]);
      out.train.push_back(word, k);
    }
  }
  draw(out.bases[0]);
  out.query = word;
  return out;
}

GeneratedInstance generate(const ModelSpec& model) {
  return std::visit(
      [](const auto& p) -> GeneratedInstance {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ModelAParams>) {
          return model_a_generate(p);
        } else if constexpr (std::is_same_v<T, ModelBParams>) {
          return model_b_generate(p);
        } else {
          return model_c_generate(p);
        }
      },
      model);
}

std::size_t model_dimension(const ModelSpec& model) {
  return std::visit([](const auto& p) { return p.d; }, model);
}

int model_classes(const ModelSpec& model) {
  if (const auto* b = std::get_if<ModelBParams>(&model)) return b->K;
  return 2;
}

std::size_t model_dictionary_size(const ModelSpec& model) {
  if (const auto* b = std::get_if<ModelBParams>(&model)) return b->nu;
  return 1;
}

ModelSpec with_seed(ModelSpec model, std::uint64_t seed) {
  std::visit([seed](auto& p) { p.seed = seed; }, model);
  return model;
}

const char* model_name(const ModelSpec& model) {
  switch (model.index()) {
    case 0:
      return "a";
    case 1:
      return "b";
    default:
      return "c";
  }
}

}  // namespace segvote
