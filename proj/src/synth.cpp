#include "sparseshield/synth.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

#include "sparseshield/measures.hpp"

namespace sparseshield {

void SynthConfig::validate() const {
  if (n < 1 || m < 2) throw invalid_input("SynthConfig: need n >= 1, m >= 2");
  if (k < 1 || k > m) throw invalid_input("SynthConfig: need 1 <= k <= m");
  if (!(0.0 < amp_lo && amp_lo <= amp_hi))
    throw invalid_input("SynthConfig: need 0 < amp_lo <= amp_hi");
  if (margin_floor <= 0.0) throw invalid_input("SynthConfig: margin_floor must be > 0");
  if (n_signals < 1) throw invalid_input("SynthConfig: n_signals must be >= 1");
  if (coherence_floor < 0.0 || reduce_rounds < 0)
    throw invalid_input("SynthConfig: bad coherence-reduction settings");
}

namespace {

Mat gaussian_matrix(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

void normalize_columns(Mat& m) {
  for (int j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (norm > 0.0) m.col(j) /= norm;
  }
}

double raw_mu(const Mat& d) {
  double mu = 0.0;
  for (int i = 0; i < d.cols(); ++i)
    for (int j = i + 1; j < d.cols(); ++j)
      mu = std::max(mu, std::abs(d.col(i).dot(d.col(j))));
  return mu;
}

// One round of Gram clipping: limit off-diagonal inner products to
// `target`, re-factor the clipped Gram at rank min(n, m), and lift back to
// n rows with the rotation closest to the current frame.
Mat gram_clip_round(const Mat& d, double target) {
  const int n = static_cast<int>(d.rows());
  const int m = static_cast<int>(d.cols());
  Mat gram = d.transpose() * d;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        gram(i, j) = 1.0;
      } else if (gram(i, j) > target) {
        gram(i, j) = target;
      } else if (gram(i, j) < -target) {
        gram(i, j) = -target;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  const int rank = std::min(n, m);
  // eigenvalues ascend; take the top `rank`
  Mat factor(rank, m);
  for (int r = 0; r < rank; ++r) {
    const int src = m - 1 - r;
    const double lam = std::max(0.0, eig.eigenvalues()(src));
    factor.row(r) = std::sqrt(lam) * eig.eigenvectors().col(src).transpose();
  }
  // procrustes lift: the n x rank isometry closest to the current d
  Eigen::JacobiSVD<Mat> svd(d * factor.transpose(),
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
  Mat next = svd.matrixU() * svd.matrixV().transpose() * factor;
  normalize_columns(next);
  return next;
}

}  // namespace

DictionaryResult random_dictionary(const SynthConfig& config, Rng& rng) {
  config.validate();
  Mat d = gaussian_matrix(config.n, config.m, rng);
  normalize_columns(d);
  if (config.dict_mode == DictMode::CoherenceReduced) {
    for (int round = 0; round < config.reduce_rounds; ++round) {
      const double mu = raw_mu(d);
      if (config.coherence_floor > 0.0 && mu <= 1.05 * config.coherence_floor) break;
      const double target = std::max(0.9 * mu, config.coherence_floor);
      d = gram_clip_round(d, target);
    }
  }
  Dictionary dict(d);
  return {dict, mutual_coherence(dict).value};
}

LinearClassifier random_unit_classifier(int dim, Rng& rng) {
  if (dim < 1) throw invalid_input("random_unit_classifier: dim must be >= 1");
  Vec w(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int i = 0; i < dim; ++i) w(i) = rng.normal();
    norm = w.norm();
  }
  return {w / norm, 0.0};
}

CodeSampleResult sample_codes(const SynthConfig& config, const Dictionary& dict,
                              const LinearClassifier& clf, Rng& rng) {
  config.validate();
  if (dict.cols() != config.m)
    throw invalid_input("sample_codes: dictionary does not match config.m");
  if (clf.weights.size() != config.m)
    throw invalid_input("sample_codes: classifier does not match config.m");

  constexpr double kMinAcceptance = 1e-4;
  constexpr long kProbeBatch = 20000;

  CodeSampleResult out;
  out.samples.reserve(static_cast<size_t>(config.n_signals));
  out.margin_star = std::numeric_limits<double>::infinity();
  long attempts = 0;
  while (static_cast<int>(out.samples.size()) < config.n_signals) {
    ++attempts;
    std::vector<int> support = rng.sample_without_replacement(config.m, config.k);
    Vec values(config.k);
    for (int i = 0; i < config.k; ++i) {
      double amp = rng.uniform(config.amp_lo, config.amp_hi);
      if (config.sign_mode == SignMode::RandomSign && rng.uniform() < 0.5) amp = -amp;
      values(i) = amp;
    }
    SparseCode code = SparseCode::from_support(config.m, support, values);
    const double score = clf.score(code);
    if (std::abs(score) < config.margin_floor) {
      if (attempts >= kProbeBatch &&
          static_cast<double>(out.samples.size()) / attempts < kMinAcceptance)
        throw invalid_input(
            "sample_codes: acceptance rate below 1e-4 after " +
            std::to_string(attempts) + " attempts (" +
            std::to_string(out.samples.size()) + " accepted); margin_floor " +
            std::to_string(config.margin_floor) + " looks unreachable");
      continue;
    }
    Sample s;
    s.signal = dict.matrix() * code.dense();
    s.label = score >= 0.0 ? 1 : -1;
    s.code = std::move(code);
    out.margin_star = std::min(out.margin_star, std::abs(score));
    out.samples.push_back(std::move(s));
  }
  out.acceptance_rate = static_cast<double>(out.samples.size()) / attempts;
  return out;
}

LabeledDataset make_dataset(const SynthConfig& config) {
  Rng rng(config.seed);
  Rng dict_rng = rng.child(1);
  Rng clf_rng = rng.child(2);
  Rng code_rng = rng.child(3);
  DictionaryResult d = random_dictionary(config, dict_rng);
  LinearClassifier clf = random_unit_classifier(config.m, clf_rng);
  CodeSampleResult codes = sample_codes(config, d.dict, clf, code_rng);
  LabeledDataset out{std::move(d.dict), std::move(clf), std::move(codes.samples),
                     d.mu, codes.margin_star, codes.acceptance_rate, config};
  return out;
}

MlcscSampleResult sample_mlcsc(const ModelStack& stack, const SynthConfig& config,
                               Rng& rng, double min_acceptance) {
  config.validate();
  if (stack.code_dim() != config.m)
    throw invalid_input("sample_mlcsc: config.m must match the deepest layer");
  if (stack.lambda().empty())
    throw invalid_input("sample_mlcsc: stack carries no sparsity budgets");

  constexpr long kProbeBatch = 20000;
  MlcscSampleResult out;
  out.violation_histogram.assign(static_cast<size_t>(stack.depth()), 0);
  long attempts = 0;
  while (static_cast<int>(out.samples.size()) < config.n_signals) {
    ++attempts;
    std::vector<int> support = rng.sample_without_replacement(config.m, config.k);
    Vec values(config.k);
    for (int i = 0; i < config.k; ++i) {
      double amp = rng.uniform(config.amp_lo, config.amp_hi);
      if (config.sign_mode == SignMode::RandomSign && rng.uniform() < 0.5) amp = -amp;
      values(i) = amp;
    }
    SparseCode deepest = SparseCode::from_support(config.m, support, values);
    SynthesisResult syn = synthesize(stack, deepest);
    if (!syn.all_budgets_ok()) {
      for (int i = 0; i < stack.depth(); ++i) {
        if (!syn.budget_ok[static_cast<size_t>(i)]) {
          ++out.violation_histogram[static_cast<size_t>(i)];
          break;
        }
      }
      if (attempts >= kProbeBatch &&
          static_cast<double>(out.samples.size()) / attempts < min_acceptance) {
        std::string hist;
        for (size_t i = 0; i < out.violation_histogram.size(); ++i)
          hist += " layer" + std::to_string(i) + "=" +
                  std::to_string(out.violation_histogram[i]);
        throw invalid_input("sample_mlcsc: acceptance below threshold after " +
                            std::to_string(attempts) + " attempts; violations:" + hist);
      }
      continue;
    }
    MlcscSample s;
    s.deepest = deepest;
    s.codes = std::move(syn.codes);
    s.signal = std::move(syn.signal);
    out.samples.push_back(std::move(s));
  }
  out.acceptance_rate = static_cast<double>(out.samples.size()) / attempts;
  return out;
}

const char* to_string(DictMode mode) {
  return mode == DictMode::GaussianNormalized ? "gaussian-normalized"
                                              : "coherence-reduced";
}

const char* to_string(SignMode mode) {
  return mode == SignMode::Positive ? "positive" : "random-sign";
}

}  // namespace sparseshield
