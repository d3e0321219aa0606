#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sparseshield {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when inputs violate an operation's stated preconditions
// (dimension mismatches, non-normalized atoms, bad parameters).
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Metadata describing the convolutional structure of a dictionary:
// m filters of length `filter_len` (input locations), shifted with `stride`
// over a cyclic input grid of `n_locations_in` locations x `in_channels`
// channels. Codes are location-major: coefficient (loc, filter) sits at
// loc * num_filters + filter.
struct ConvMeta {
  int num_filters = 0;
  int filter_len = 0;
  int stride = 1;
  int in_channels = 1;
  int n_locations_in = 0;

  int n_locations_out() const { return n_locations_in / stride; }
};

// Matrix dictionary with unit-norm atoms. Atom norms are validated at
// construction (tolerance 1e-12); pass renormalize=true to rescale instead
// of rejecting. Immutable after construction.
class Dictionary {
 public:
  static constexpr double kNormTol = 1e-12;

  explicit Dictionary(Mat atoms, bool renormalize = false);

  // Banded circulant-block expansion of `filters` (one column per filter,
  // filter_len * in_channels rows) over a cyclic grid.
  static Dictionary convolutional(const Mat& filters, int n_locations_in,
                                  int filter_len, int stride = 1,
                                  int in_channels = 1);

  int rows() const { return static_cast<int>(mat_.rows()); }
  int cols() const { return static_cast<int>(mat_.cols()); }
  const Mat& matrix() const { return mat_; }
  Vec atom(int j) const { return mat_.col(j); }

  bool is_convolutional() const { return conv_.has_value(); }
  const ConvMeta& conv_meta() const;

 private:
  Mat mat_;
  std::optional<ConvMeta> conv_;
};

// Sparse representation with explicit support. `values` is zero exactly off
// the (sorted) support; on-support entries are nonzero.
class SparseCode {
 public:
  SparseCode() = default;

  // Collects the exact nonzeros of a dense vector.
  static SparseCode from_dense(const Vec& v);
  // Builds from explicit support and matching nonzero values.
  static SparseCode from_support(int length, const std::vector<int>& support,
                                 const Vec& values_on_support);

  int length() const { return static_cast<int>(dense_.size()); }
  const Vec& dense() const { return dense_; }
  const std::vector<int>& support() const { return support_; }
  int l0() const { return static_cast<int>(support_.size()); }
  bool empty() const { return support_.empty(); }

  // |Gamma_min| and |Gamma_max| over the support; reject on empty codes.
  double min_abs() const;
  double max_abs() const;

 private:
  Vec dense_;
  std::vector<int> support_;
};

struct LinearClassifier {
  Vec weights;
  double bias = 0.0;

  double score(const Vec& code) const { return weights.dot(code) + bias; }
  double score(const SparseCode& code) const { return score(code.dense()); }
};

// L >= 2 one-vs-all linear classifiers; column u of `weights` is w_u.
class MultiClassifier {
 public:
  MultiClassifier(Mat weights, Vec biases);

  int n_classes() const { return static_cast<int>(weights_.cols()); }
  const Mat& weights() const { return weights_; }
  const Vec& biases() const { return biases_; }
  double score(const Vec& code, int u) const {
    return weights_.col(u).dot(code) + biases_(u);
  }

 private:
  Mat weights_;
  Vec biases_;
};

// Ordered dictionaries D_1..D_K with per-layer l0,inf budgets lambda_i.
// Adjacent dimensions must chain: cols(D_i) = rows(D_{i+1}).
class ModelStack {
 public:
  ModelStack(std::vector<Dictionary> layers, std::vector<int> lambda);
  // Budget-free stack (lambda defaults to cols of each layer, i.e. no bound).
  explicit ModelStack(std::vector<Dictionary> layers);

  int depth() const { return static_cast<int>(layers_.size()); }
  const Dictionary& layer(int i) const { return layers_.at(i); }
  const std::vector<int>& lambda() const { return lambda_; }
  int signal_dim() const { return layers_.front().rows(); }
  int code_dim() const { return layers_.back().cols(); }

 private:
  std::vector<Dictionary> layers_;
  std::vector<int> lambda_;
};

// Output of expanding a deepest code through the stack:
// codes[i] is Gamma_{i+1} for layer i (codes.back() == the input), and
// budget_ok[i] records whether stripe_l0inf(Gamma_{i+1}, D_{i+1}) <= lambda.
struct SynthesisResult {
  Vec signal;
  std::vector<SparseCode> codes;
  std::vector<bool> budget_ok;

  bool all_budgets_ok() const {
    for (bool b : budget_ok)
      if (!b) return false;
    return true;
  }
};

// Gamma_{i-1} = D_i Gamma_i, down to the signal X = D_1 ... D_K Gamma_K.
SynthesisResult synthesize(const ModelStack& stack, const SparseCode& deepest);

// Signed margin y * (w' Gamma + bias).
double binary_margin(const SparseCode& code, const LinearClassifier& clf, int label);

// Dataset-level minimum margin O*.
double dataset_margin(const std::vector<SparseCode>& codes,
                      const std::vector<int>& labels,
                      const LinearClassifier& clf);

// O_M = min_{v != u} f_u(Gamma) - f_v(Gamma).
double multiclass_margin(const SparseCode& code, const MultiClassifier& clf, int label);

// phi(W) = max_{u != v} ||w_u - w_v||_2.
double phi(const MultiClassifier& clf);

}  // namespace sparseshield
