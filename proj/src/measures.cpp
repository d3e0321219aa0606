#include "sparseshield/measures.hpp"

#include <algorithm>
#include <cmath>

namespace sparseshield {

CoherenceResult mutual_coherence(const Dictionary& dict) {
  if (dict.cols() == 1) return {0.0, true};
  const Mat& d = dict.matrix();
  double mu = 0.0;
  for (int i = 0; i < d.cols(); ++i)
    for (int j = i + 1; j < d.cols(); ++j)
      mu = std::max(mu, std::abs(d.col(i).dot(d.col(j))));
  return {mu, false};
}

namespace {

// max nonzeros over location windows [loc - back, loc - back + span) clipped
// to the valid range, with m coefficients per location
int max_window_l0(const SparseCode& code, int n_locations, int m, int span, int back) {
  const Vec& v = code.dense();
  int best = 0;
  for (int loc = 0; loc < n_locations; ++loc) {
    const int lo = std::max(0, loc - back);
    const int hi = std::min(n_locations, loc - back + span);
    int count = 0;
    for (int l = lo; l < hi; ++l)
      for (int f = 0; f < m; ++f)
        if (v(l * m + f) != 0.0) ++count;
    best = std::max(best, count);
  }
  return best;
}

}  // namespace

int stripe_l0inf(const SparseCode& code, const Dictionary& dict, int window_locations) {
  if (code.length() != dict.cols())
    throw invalid_input("stripe_l0inf: code length must match dictionary columns");
  if (!dict.is_convolutional()) return code.l0();
  const ConvMeta& meta = dict.conv_meta();
  const int span = window_locations > 0 ? window_locations : 2 * meta.filter_len - 1;
  return max_window_l0(code, meta.n_locations_out(), meta.num_filters, span,
                       span / 2);
}

int patch_l0inf(const SparseCode& code, const Dictionary& dict, int window_locations) {
  if (code.length() != dict.cols())
    throw invalid_input("patch_l0inf: code length must match dictionary columns");
  if (!dict.is_convolutional()) return code.l0();
  const ConvMeta& meta = dict.conv_meta();
  const int span = window_locations > 0 ? window_locations : meta.filter_len;
  return max_window_l0(code, meta.n_locations_out(), meta.num_filters, span, 0);
}

double patch_l2inf(const Vec& signal, int patch_len) {
  if (signal.size() == 0) throw invalid_input("patch_l2inf: empty signal");
  if (patch_len < 1 || patch_len > signal.size())
    throw invalid_input("patch_l2inf: patch_len out of range");
  double best_sq = 0.0;
  double window = signal.head(patch_len).squaredNorm();
  best_sq = window;
  for (int start = 1; start + patch_len <= signal.size(); ++start) {
    window += signal(start + patch_len - 1) * signal(start + patch_len - 1) -
              signal(start - 1) * signal(start - 1);
    best_sq = std::max(best_sq, window);
  }
  // the sliding update can drift; best_sq stays within fp noise of exact
  return std::sqrt(std::max(0.0, best_sq));
}

int stripe_count(const Dictionary& dict) {
  return dict.is_convolutional() ? dict.conv_meta().n_locations_out() : 1;
}

double srip_lower_bound_mc(const Dictionary& dict, int k, int n_samples, Rng& rng) {
  if (k < 1 || k > dict.cols()) throw invalid_input("srip_lower_bound_mc: bad k");
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    std::vector<int> supp = rng.sample_without_replacement(dict.cols(), k);
    Vec v = Vec::Zero(dict.cols());
    for (int idx : supp) v(idx) = rng.normal();
    const double denom = v.squaredNorm();
    if (denom == 0.0) continue;
    const double ratio = (dict.matrix() * v).squaredNorm() / denom;
    worst = std::max(worst, std::abs(ratio - 1.0));
  }
  return worst;
}

}  // namespace sparseshield
