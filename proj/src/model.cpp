#include "sparseshield/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sparseshield/measures.hpp"

namespace sparseshield {

Dictionary::Dictionary(Mat atoms, bool renormalize) : mat_(std::move(atoms)) {
  if (mat_.rows() < 1 || mat_.cols() < 1)
    throw invalid_input("Dictionary: matrix must be at least 1x1");
  for (int j = 0; j < mat_.cols(); ++j) {
    const double norm = mat_.col(j).norm();
    if (norm == 0.0)
      throw invalid_input("Dictionary: atom " + std::to_string(j) + " is zero");
    if (std::abs(norm - 1.0) > kNormTol) {
      if (!renormalize)
        throw invalid_input("Dictionary: atom " + std::to_string(j) +
                            " is not unit-norm (pass renormalize to rescale)");
      mat_.col(j) /= norm;
    }
  }
}

Dictionary Dictionary::convolutional(const Mat& filters, int n_locations_in,
                                     int filter_len, int stride, int in_channels) {
  if (filters.cols() < 1) throw invalid_input("convolutional: no filters");
  if (filter_len < 1 || in_channels < 1 || stride < 1)
    throw invalid_input("convolutional: filter_len, stride, in_channels must be positive");
  if (filters.rows() != static_cast<long>(filter_len) * in_channels)
    throw invalid_input("convolutional: filters must have filter_len * in_channels rows");
  if (n_locations_in < filter_len)
    throw invalid_input("convolutional: signal shorter than the filters");
  if (n_locations_in % stride != 0)
    throw invalid_input("convolutional: stride must divide the location count");

  const int m = static_cast<int>(filters.cols());
  const int n_out = n_locations_in / stride;
  const int rows = n_locations_in * in_channels;
  Mat mat = Mat::Zero(rows, static_cast<long>(n_out) * m);
  for (int loc = 0; loc < n_out; ++loc) {
    for (int f = 0; f < m; ++f) {
      const int col = loc * m + f;
      for (int t = 0; t < filter_len; ++t) {
        const int in_loc = (loc * stride + t) % n_locations_in;
        for (int ch = 0; ch < in_channels; ++ch)
          mat(in_loc * in_channels + ch, col) = filters(t * in_channels + ch, f);
      }
    }
  }
  Dictionary d(std::move(mat));
  d.conv_ = ConvMeta{m, filter_len, stride, in_channels, n_locations_in};
  // reconstruction check: every column must be the cyclic placement of its filter
  const ConvMeta& meta = *d.conv_;
  for (int loc = 0; loc < n_out; ++loc) {
    for (int f = 0; f < m; ++f) {
      Vec col = d.mat_.col(loc * m + f);
      for (int t = 0; t < filter_len; ++t) {
        const int in_loc = (loc * meta.stride + t) % n_locations_in;
        for (int ch = 0; ch < in_channels; ++ch) {
          col(in_loc * in_channels + ch) -= filters(t * in_channels + ch, f);
        }
      }
      if (col.cwiseAbs().maxCoeff() > 0.0)
        throw invalid_input("convolutional: expansion failed reconstruction check");
    }
  }
  return d;
}

const ConvMeta& Dictionary::conv_meta() const {
  if (!conv_) throw invalid_input("Dictionary: no convolutional metadata");
  return *conv_;
}

SparseCode SparseCode::from_dense(const Vec& v) {
  SparseCode c;
  c.dense_ = v;
  for (int i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) c.support_.push_back(i);
  return c;
}

SparseCode SparseCode::from_support(int length, const std::vector<int>& support,
                                    const Vec& values_on_support) {
  if (static_cast<long>(support.size()) != values_on_support.size())
    throw invalid_input("SparseCode: support/value size mismatch");
  Vec dense = Vec::Zero(length);
  int prev = -1;
  for (size_t i = 0; i < support.size(); ++i) {
    const int idx = support[i];
    if (idx <= prev || idx >= length)
      throw invalid_input("SparseCode: support must be sorted, unique, in range");
    if (values_on_support(static_cast<long>(i)) == 0.0)
      throw invalid_input("SparseCode: zero value on support");
    dense(idx) = values_on_support(static_cast<long>(i));
    prev = idx;
  }
  SparseCode c;
  c.dense_ = std::move(dense);
  c.support_ = support;
  return c;
}

double SparseCode::min_abs() const {
  if (support_.empty()) throw invalid_input("SparseCode: min_abs of empty code");
  double m = std::numeric_limits<double>::infinity();
  for (int i : support_) m = std::min(m, std::abs(dense_(i)));
  return m;
}

double SparseCode::max_abs() const {
  if (support_.empty()) throw invalid_input("SparseCode: max_abs of empty code");
  double m = 0.0;
  for (int i : support_) m = std::max(m, std::abs(dense_(i)));
  return m;
}

MultiClassifier::MultiClassifier(Mat weights, Vec biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.cols() < 2)
    throw invalid_input("MultiClassifier: need at least two classes");
  if (biases_.size() != weights_.cols())
    throw invalid_input("MultiClassifier: bias count must match class count");
}

ModelStack::ModelStack(std::vector<Dictionary> layers, std::vector<int> lambda)
    : layers_(std::move(layers)), lambda_(std::move(lambda)) {
  if (layers_.empty()) throw invalid_input("ModelStack: empty");
  if (!lambda_.empty() && lambda_.size() != layers_.size())
    throw invalid_input("ModelStack: lambda length must equal depth");
  for (size_t i = 0; i + 1 < layers_.size(); ++i)
    if (layers_[i].cols() != layers_[i + 1].rows())
      throw invalid_input("ModelStack: dimension chain broken at layer " +
                          std::to_string(i));
}

ModelStack::ModelStack(std::vector<Dictionary> layers)
    : ModelStack(std::move(layers), {}) {}

SynthesisResult synthesize(const ModelStack& stack, const SparseCode& deepest) {
  if (deepest.length() != stack.code_dim())
    throw invalid_input("synthesize: code length must match deepest dictionary");
  const int depth = stack.depth();
  SynthesisResult out;
  out.codes.resize(depth);
  out.budget_ok.assign(depth, true);
  out.codes[depth - 1] = deepest;
  Vec current = deepest.dense();
  for (int i = depth - 1; i >= 0; --i) {
    const SparseCode& code = out.codes[i];
    if (!stack.lambda().empty())
      out.budget_ok[i] = stripe_l0inf(code, stack.layer(i)) <= stack.lambda()[i];
    current = stack.layer(i).matrix() * current;
    if (i > 0) out.codes[i - 1] = SparseCode::from_dense(current);
  }
  out.signal = current;
  return out;
}

double binary_margin(const SparseCode& code, const LinearClassifier& clf, int label) {
  if (label != 1 && label != -1)
    throw invalid_input("binary_margin: label must be +1 or -1");
  return static_cast<double>(label) * clf.score(code);
}

double dataset_margin(const std::vector<SparseCode>& codes,
                      const std::vector<int>& labels,
                      const LinearClassifier& clf) {
  if (codes.empty() || codes.size() != labels.size())
    throw invalid_input("dataset_margin: empty or mismatched dataset");
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < codes.size(); ++i)
    m = std::min(m, binary_margin(codes[i], clf, labels[i]));
  return m;
}

double multiclass_margin(const SparseCode& code, const MultiClassifier& clf, int label) {
  if (label < 0 || label >= clf.n_classes())
    throw invalid_input("multiclass_margin: label out of range");
  const double fu = clf.score(code.dense(), label);
  double m = std::numeric_limits<double>::infinity();
  for (int v = 0; v < clf.n_classes(); ++v) {
    if (v == label) continue;
    m = std::min(m, fu - clf.score(code.dense(), v));
  }
  return m;
}

double phi(const MultiClassifier& clf) {
  double m = 0.0;
  for (int u = 0; u < clf.n_classes(); ++u)
    for (int v = u + 1; v < clf.n_classes(); ++v)
      m = std::max(m, (clf.weights().col(u) - clf.weights().col(v)).norm());
  return m;
}

}  // namespace sparseshield
