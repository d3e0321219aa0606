#include "sparseshield/bounds.hpp"

#include <cmath>
#include <limits>

namespace sparseshield {

namespace {

void check_common(double mu, int k, double margin) {
  if (margin <= 0.0) throw premise_violation("bounds: margin must be positive");
  if (mu < 0.0 || mu >= 1.0) throw premise_violation("bounds: mu must be in [0, 1)");
  if (k < 1) throw premise_violation("bounds: sparsity must be >= 1");
}

// largest integer strictly below x (>= 0)
int strict_int_below(double x) {
  const double f = std::floor(x);
  const int v = (f == x) ? static_cast<int>(f) - 1 : static_cast<int>(f);
  return std::max(0, v);
}

BoundReport csc_mu_bound(BoundKind kind, double mu, int k, double scale,
                         double margin, std::optional<double> eps) {
  check_common(mu, k, margin);
  BoundReport r;
  r.kind = kind;
  r.eps_norm = EpsNorm::GlobalL2;
  r.inputs = {{"mu", mu},
              {"k", static_cast<double>(k)},
              {"scale", scale},
              {"margin_star", margin}};
  if (eps) r.inputs["eps"] = *eps;
  if (scale <= 0.0) {
    r.degenerate = true;
    return r;
  }
  const double surrogate = (2.0 * k - 1.0) * mu;  // stands in for delta_2k
  if (surrogate < 1.0) {
    r.feasible = true;
    r.eps_max = margin / (2.0 * scale) * std::sqrt(1.0 - surrogate);
  }
  // reverse direction: the sparsity ceiling at the supplied eps (at eps = 0
  // when none is given); no finite ceiling exists for mu = 0
  const double eps_for_k = eps ? *eps : 0.0;
  if (mu > 0.0) {
    const double ratio = 2.0 * scale * eps_for_k / margin;
    const double kf = 0.5 * (1.0 + (1.0 - ratio * ratio) / mu);
    r.k_max = strict_int_below(kf);
  }
  return r;
}

}  // namespace

BoundReport thm5_binary(double mu, int k, double w_norm, double margin_star,
                        std::optional<double> eps) {
  return csc_mu_bound(BoundKind::Thm5Mu, mu, k, w_norm, margin_star, eps);
}

BoundReport thm7_multiclass(double mu, int k, double phi_w, double margin_star,
                            std::optional<double> eps) {
  return csc_mu_bound(BoundKind::Thm7Mu, mu, k, phi_w, margin_star, eps);
}

namespace {

struct LthrChain {
  bool feasible = true;
  int offending_layer = -1;
  std::vector<Interval> windows;
  std::vector<double> betas;
  std::vector<double> eps_chain;  // eps_0 .. eps_K
  double last_layer_error = 0.0;  // eps_{K-1} + C_K + beta_K
};

// Walks the threshold chain at noise level eps0. Betas are taken from
// `betas` when non-empty, otherwise from the lower-edge + 10% width rule.
LthrChain eval_lthr_chain(const std::vector<LthrLayerParams>& layers,
                          const std::vector<double>& betas, double eps0) {
  LthrChain out;
  out.eps_chain.push_back(eps0);
  double eps_prev = eps0;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LthrLayerParams& p = layers[i];
    const double c_i = (p.stripe_k - 1.0) * p.mu * p.gamma_max;
    const double kk_i = p.stripe_k * p.mu * p.gamma_max;
    // sparsity ceiling (a), rearranged to avoid dividing by mu:
    // eps_{i-1} < gamma_min/2 - (k - 1/2) mu gamma_max
    const double eps_ceiling = 0.5 * p.gamma_min - (p.stripe_k - 0.5) * p.mu * p.gamma_max;
    const Interval window{kk_i + eps_prev, p.gamma_min - c_i - eps_prev};
    out.windows.push_back(window);
    double beta;
    if (!betas.empty()) {
      beta = betas[i];
    } else {
      beta = window.lo + 0.1 * window.width();
    }
    out.betas.push_back(beta);
    const bool ok = eps_prev < eps_ceiling && !window.empty() &&
                    window.lo < beta && beta < window.hi;
    if (!ok && out.feasible) {
      out.feasible = false;
      out.offending_layer = static_cast<int>(i);
    }
    out.last_layer_error = eps_prev + c_i + beta;
    eps_prev = std::sqrt(static_cast<double>(p.patch_k)) * out.last_layer_error;
    out.eps_chain.push_back(eps_prev);
  }
  return out;
}

bool lthr_feasible(const std::vector<LthrLayerParams>& layers,
                   const std::vector<double>& betas, double eps0,
                   double w_norm, int gammaK_l0, double margin) {
  const LthrChain chain = eval_lthr_chain(layers, betas, eps0);
  if (!chain.feasible) return false;
  return margin >
         w_norm * std::sqrt(static_cast<double>(gammaK_l0)) * chain.last_layer_error;
}

}  // namespace

BoundReport thm10_lthr(const std::vector<LthrLayerParams>& layers,
                       const std::vector<double>& betas, double eps0,
                       double w_norm, int gammaK_l0, double margin_star) {
  if (layers.empty()) throw premise_violation("thm10: no layers");
  if (!betas.empty() && betas.size() != layers.size())
    throw premise_violation("thm10: beta count must match layer count");
  if (eps0 < 0.0) throw premise_violation("thm10: eps0 must be >= 0");
  if (gammaK_l0 < 1) throw premise_violation("thm10: gammaK_l0 must be >= 1");
  for (const auto& p : layers) {
    check_common(p.mu, p.stripe_k, margin_star);
    if (p.patch_k < 1 || p.gamma_min <= 0.0 || p.gamma_max < p.gamma_min)
      throw premise_violation("thm10: bad layer parameters");
  }

  BoundReport r;
  r.kind = BoundKind::Thm10Lthr;
  r.eps_norm = layers.size() == 1 ? EpsNorm::GlobalL2 : EpsNorm::PatchL2Inf;
  r.inputs = {{"eps0", eps0},
              {"w_norm", w_norm},
              {"gammaK_l0", static_cast<double>(gammaK_l0)},
              {"margin_star", margin_star}};
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    r.inputs[p + "mu"] = layers[i].mu;
    r.inputs[p + "stripe_k"] = layers[i].stripe_k;
    r.inputs[p + "patch_k"] = layers[i].patch_k;
    r.inputs[p + "gamma_min"] = layers[i].gamma_min;
    r.inputs[p + "gamma_max"] = layers[i].gamma_max;
  }
  if (w_norm <= 0.0) {
    r.degenerate = true;
    return r;
  }

  const LthrChain chain = eval_lthr_chain(layers, betas, eps0);
  r.beta_windows = chain.windows;
  r.betas = chain.betas;
  r.eps_chain = chain.eps_chain;
  const bool margin_ok =
      margin_star > w_norm * std::sqrt(static_cast<double>(gammaK_l0)) *
                        chain.last_layer_error;
  r.feasible = chain.feasible && margin_ok;
  if (!chain.feasible)
    r.infeasible_layer = chain.offending_layer;
  else if (!margin_ok)
    r.infeasible_layer = static_cast<int>(layers.size()) - 1;

  // largest admissible eps0; the feasibility predicate is monotone in eps0
  double lo = 0.0;
  double hi = 0.5 * layers.front().gamma_min;  // ceiling (a) fails here
  if (!lthr_feasible(layers, betas, 0.0, w_norm, gammaK_l0, margin_star)) {
    r.eps_max = 0.0;
  } else {
    const double tol = 1e-13 * std::max(1.0, hi);
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (lthr_feasible(layers, betas, mid, w_norm, gammaK_l0, margin_star))
        lo = mid;
      else
        hi = mid;
    }
    r.eps_max = lo;
  }
  return r;
}

BoundReport thm11_lbp(const std::vector<LbpLayerParams>& layers,
                      double eps_local, double w_norm, int gammaK_l0,
                      double margin_star) {
  if (layers.empty()) throw premise_violation("thm11: no layers");
  if (eps_local < 0.0) throw premise_violation("thm11: eps_local must be >= 0");
  if (gammaK_l0 < 1) throw premise_violation("thm11: gammaK_l0 must be >= 1");
  for (const auto& p : layers) {
    check_common(p.mu, p.stripe_k, margin_star);
    if (p.patch_k < 1) throw premise_violation("thm11: patch_k must be >= 1");
  }

  BoundReport r;
  r.kind = BoundKind::Thm11Lbp;
  r.eps_norm = layers.size() == 1 ? EpsNorm::GlobalL2 : EpsNorm::PatchL2Inf;
  r.inputs = {{"eps_local", eps_local},
              {"w_norm", w_norm},
              {"gammaK_l0", static_cast<double>(gammaK_l0)},
              {"margin_star", margin_star}};
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    r.inputs[p + "mu"] = layers[i].mu;
    r.inputs[p + "stripe_k"] = layers[i].stripe_k;
    r.inputs[p + "patch_k"] = layers[i].patch_k;
  }
  if (w_norm <= 0.0) {
    r.degenerate = true;
    return r;
  }

  // (a) k_i <= (1 + 1/mu_i)/3, i.e. 3 k_i mu_i <= mu_i + 1
  for (size_t i = 0; i < layers.size(); ++i) {
    if (3.0 * layers[i].stripe_k * layers[i].mu > 1.0 + layers[i].mu) {
      r.feasible = false;
      r.infeasible_layer = static_cast<int>(i);
      return r;
    }
  }

  double eps = eps_local;
  double gain = 1.0;  // 7.5^K prod sqrt(patch_k)
  r.eps_chain.push_back(eps);
  for (const auto& p : layers) {
    r.xi_schedule.push_back(4.0 * eps);
    const double factor = 7.5 * std::sqrt(static_cast<double>(p.patch_k));
    eps *= factor;
    gain *= factor;
    r.eps_chain.push_back(eps);
  }
  const double denom = w_norm * std::sqrt(static_cast<double>(gammaK_l0)) * gain;
  r.eps_max = margin_star / denom;
  r.feasible = eps_local < r.eps_max;
  return r;
}

BoundReport cor1_thr(double mu, int k, double gamma_min, double gamma_max,
                     double w_norm, double margin, std::optional<double> beta) {
  check_common(mu, k, margin);
  if (gamma_min <= 0.0 || gamma_max < gamma_min)
    throw premise_violation("cor1: need 0 < gamma_min <= gamma_max");

  BoundReport r;
  r.kind = BoundKind::Cor1Thr;
  r.eps_norm = EpsNorm::GlobalL2;
  r.inputs = {{"mu", mu},
              {"k", static_cast<double>(k)},
              {"gamma_min", gamma_min},
              {"gamma_max", gamma_max},
              {"w_norm", w_norm},
              {"margin", margin}};
  if (beta) r.inputs["beta"] = *beta;
  if (w_norm <= 0.0) {
    r.degenerate = true;
    return r;
  }

  const double c = (k - 1.0) * mu * gamma_max;
  const double kk = k * mu * gamma_max;
  const double width0 = gamma_min - c - kk;  // window width at eps = 0
  const double q = margin / (std::sqrt(static_cast<double>(k)) * w_norm);
  // sparsity premise rearranged: eps <= gamma_min/2 - (k - 1/2) mu gamma_max
  const double eps_sparsity = 0.5 * gamma_min - (k - 0.5) * mu * gamma_max;

  double eps_max;
  double beta_sel;
  if (beta) {
    beta_sel = *beta;
    eps_max = std::min(std::min(beta_sel - kk, gamma_min - c - beta_sel),
                       std::min(q - c - beta_sel, eps_sparsity));
  } else {
    // beta(eps) = kk + eps + 0.1 (width0 - 2 eps); substituting into the
    // margin inequality eps < q - c - beta(eps) gives the closed form below
    const double eps_margin = (q - c - kk - 0.1 * width0) / 1.8;
    eps_max = std::min(std::min(0.5 * width0, eps_margin), eps_sparsity);
    beta_sel = kk + eps_max + 0.1 * (width0 - 2.0 * eps_max);
  }

  if (eps_max > 0.0) {
    r.feasible = true;
    r.eps_max = eps_max;
  } else {
    r.feasible = false;
    r.eps_max = 0.0;
    r.infeasible_layer = 0;
  }
  const double eps_at = r.eps_max;
  r.beta_windows = {Interval{kk + eps_at, gamma_min - c - eps_at}};
  r.betas = {beta_sel};
  r.eps_chain = {r.eps_max,
                 std::sqrt(static_cast<double>(k)) * (r.eps_max + c + beta_sel)};
  if (mu > 0.0) {
    // ceiling of the sparsity premise at eps = 0 (non-strict)
    const double kf = 0.5 * (1.0 + gamma_min / (mu * gamma_max));
    r.k_max = static_cast<int>(std::floor(kf));
  }
  return r;
}

BoundReport cor2_bp(double mu, int k, double w_norm, double margin) {
  check_common(mu, k, margin);
  BoundReport r;
  r.kind = BoundKind::Cor2Bp;
  r.eps_norm = EpsNorm::GlobalL2;
  r.inputs = {{"mu", mu},
              {"k", static_cast<double>(k)},
              {"w_norm", w_norm},
              {"margin", margin}};
  if (w_norm <= 0.0) {
    r.degenerate = true;
    return r;
  }
  if (mu > 0.0) r.k_max = static_cast<int>(std::floor((1.0 + 1.0 / mu) / 3.0));
  // premise k <= (1 + 1/mu)/3, i.e. 3 k mu <= 1 + mu
  if (3.0 * k * mu > 1.0 + mu) {
    r.feasible = false;
    r.infeasible_layer = 0;
    return r;
  }
  r.feasible = true;
  r.eps_max = margin / (7.5 * k * w_norm);
  r.xi_schedule = {4.0 * r.eps_max};
  r.eps_chain = {r.eps_max, 7.5 * r.eps_max};
  return r;
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Thm5Srip: return "thm5-srip";
    case BoundKind::Thm5Mu: return "thm5-mu";
    case BoundKind::Thm7Mu: return "thm7-mu";
    case BoundKind::Thm10Lthr: return "thm10-lthr";
    case BoundKind::Thm11Lbp: return "thm11-lbp";
    case BoundKind::Cor1Thr: return "cor1-thr";
    case BoundKind::Cor2Bp: return "cor2-bp";
  }
  return "unknown";
}

const char* to_string(EpsNorm norm) {
  return norm == EpsNorm::GlobalL2 ? "global-l2" : "patch-l2inf";
}

}  // namespace sparseshield
