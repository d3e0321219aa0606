#pragma once

#include <cstdint>
#include <vector>

#include "sparseshield/model.hpp"
#include "sparseshield/rng.hpp"

namespace sparseshield {

enum class DictMode { GaussianNormalized, CoherenceReduced };
enum class SignMode { Positive, RandomSign };

struct SynthConfig {
  uint64_t seed = 1;
  int n = 100;  // signal dimension
  int m = 40;   // atoms
  int k = 4;    // nonzeros per code
  double amp_lo = 1.0;
  double amp_hi = 2.0;
  double margin_floor = 1.0;
  int n_signals = 500;
  DictMode dict_mode = DictMode::CoherenceReduced;
  SignMode sign_mode = SignMode::Positive;
  // Gram-clipping target floor for coherence reduction; 0 keeps shrinking
  // by 10% of the current mu every round for the full round budget
  double coherence_floor = 0.0;
  int reduce_rounds = 100;

  void validate() const;
};

struct DictionaryResult {
  Dictionary dict;
  double mu = 0.0;
};

// i.i.d. Gaussian atoms, normalized; in coherence-reduced mode followed by
// iterative Gram shrinkage (clip off-diagonal entries toward
// max(0.9 mu, floor), re-factor at the original rank, renormalize).
DictionaryResult random_dictionary(const SynthConfig& config, Rng& rng);

// Random direction with ||w||_2 = 1 and zero bias.
LinearClassifier random_unit_classifier(int dim, Rng& rng);

struct Sample {
  SparseCode code;
  Vec signal;  // D code
  int label;   // sign(w' code)
};

struct CodeSampleResult {
  std::vector<Sample> samples;
  double acceptance_rate = 0.0;
  double margin_star = 0.0;  // min |w' code| over the accepted set
};

// Rejection-samples codes with k uniform nonzeros (support uniform without
// replacement, magnitudes uniform in [amp_lo, amp_hi]) keeping only
// |w' code| >= margin_floor. Aborts when the acceptance rate over a probe
// batch falls below 1e-4.
CodeSampleResult sample_codes(const SynthConfig& config, const Dictionary& dict,
                              const LinearClassifier& clf, Rng& rng);

struct LabeledDataset {
  Dictionary dict;
  LinearClassifier clf;
  std::vector<Sample> samples;
  double mu = 0.0;
  double margin_star = 0.0;
  double acceptance_rate = 0.0;
  SynthConfig config;
};

// dictionary + classifier + filtered codes in one deterministic shot
LabeledDataset make_dataset(const SynthConfig& config);

struct MlcscSample {
  SparseCode deepest;
  std::vector<SparseCode> codes;  // per layer, deepest last
  Vec signal;
};

struct MlcscSampleResult {
  std::vector<MlcscSample> samples;
  double acceptance_rate = 0.0;
  // rejected count per layer (first violated layer is charged)
  std::vector<int> violation_histogram;
};

// Samples deepest codes, synthesizes upward, keeps only instances whose
// intermediate codes respect every layer's l0,inf budget. Aborts with the
// violation histogram when acceptance drops below `min_acceptance`.
MlcscSampleResult sample_mlcsc(const ModelStack& stack, const SynthConfig& config,
                               Rng& rng, double min_acceptance = 1e-4);

const char* to_string(DictMode mode);
const char* to_string(SignMode mode);

}  // namespace sparseshield
