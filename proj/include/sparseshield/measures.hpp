#pragma once

#include "sparseshield/model.hpp"
#include "sparseshield/rng.hpp"

namespace sparseshield {

struct CoherenceResult {
  double value = 0.0;
  // set when the dictionary has a single atom; coherence is defined as zero
  bool single_atom = false;
};

// mu(D) = max_{i != j} |d_i' d_j| over unit-norm atoms.
CoherenceResult mutual_coherence(const Dictionary& dict);

// Maximal nonzero count over stripe windows of (2n-1) locations x m filters.
// Windows are non-cyclic (clipped at the boundary). A non-convolutional
// dictionary has a single stripe covering the whole code. `window_locations`
// overrides the stride-1 default of 2n-1 locations.
int stripe_l0inf(const SparseCode& code, const Dictionary& dict,
                 int window_locations = -1);

// As stripe_l0inf but with patch windows of n locations x m filters.
int patch_l0inf(const SparseCode& code, const Dictionary& dict,
                int window_locations = -1);

// Max l2 norm over sliding windows of `patch_len` entries (stride 1,
// non-cyclic). patch_len = length gives the plain l2 norm.
double patch_l2inf(const Vec& signal, int patch_len);

// Number of stripe windows enumerated by stripe_l0inf (1 when non-conv).
int stripe_count(const Dictionary& dict);

// Monte-Carlo lower bound on the stripe-RIP constant delta_k: the largest
// deviation | ||Dv||^2 / ||v||^2 - 1 | seen over random k-sparse vectors.
// Diagnostics only; certificates use the (2k-1) mu(D) surrogate instead.
double srip_lower_bound_mc(const Dictionary& dict, int k, int n_samples, Rng& rng);

}  // namespace sparseshield
