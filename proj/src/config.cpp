#include "sparseshield/config.hpp"

#include <json.hpp>

namespace sparseshield {

namespace {

using nlohmann::json;

AttackKind attack_kind_from(const std::string& s) {
  if (s == "fgsm-linf") return AttackKind::FgsmLinf;
  if (s == "grad-ascent-l2") return AttackKind::GradAscentL2;
  throw config_error("unknown attack kind: " + s);
}

AttackLoss attack_loss_from(const std::string& s) {
  if (s == "neg-margin") return AttackLoss::NegMargin;
  if (s == "logistic") return AttackLoss::Logistic;
  throw config_error("unknown attack loss: " + s);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentConfig c;
    const json& s = j.at("synth");
    c.synth.seed = s.at("seed").get<uint64_t>();
    c.synth.n = s.at("n").get<int>();
    c.synth.m = s.at("m").get<int>();
    c.synth.k = s.at("k").get<int>();
    c.synth.amp_lo = s.at("amp_range").at(0).get<double>();
    c.synth.amp_hi = s.at("amp_range").at(1).get<double>();
    c.synth.margin_floor = s.value("margin_floor", 1.0);
    c.synth.n_signals = s.value("n_signals", 500);
    const std::string dict_mode = s.value("dict_mode", "coherence-reduced");
    if (dict_mode == "gaussian-normalized")
      c.synth.dict_mode = DictMode::GaussianNormalized;
    else if (dict_mode == "coherence-reduced")
      c.synth.dict_mode = DictMode::CoherenceReduced;
    else
      throw config_error("unknown dict_mode: " + dict_mode);
    const std::string sign_mode = s.value("sign_mode", "positive");
    if (sign_mode == "positive")
      c.synth.sign_mode = SignMode::Positive;
    else if (sign_mode == "random-sign")
      c.synth.sign_mode = SignMode::RandomSign;
    else
      throw config_error("unknown sign_mode: " + sign_mode);
    c.synth.coherence_floor = s.value("coherence_floor", 0.0);
    c.synth.reduce_rounds = s.value("reduce_rounds", 100);
    try {
      c.synth.validate();
    } catch (const invalid_input& e) {
      throw config_error(e.what());
    }

    if (j.contains("pursuit")) {
      const json& p = j.at("pursuit");
      c.pursuit.auto_from_bounds = p.value("auto_from_bounds", true);
      if (p.contains("betas")) c.pursuit.betas = p["betas"].get<std::vector<double>>();
      if (p.contains("xis")) c.pursuit.xis = p["xis"].get<std::vector<double>>();
      if (p.contains("solver")) {
        const json& so = p["solver"];
        c.pursuit.solver.max_iters = so.value("max_iters", 10000);
        c.pursuit.solver.tol = so.value("tol", 1e-10);
        c.pursuit.solver.kkt_tol = so.value("kkt_tol", 1e-8);
        c.pursuit.solver.acceleration = so.value("acceleration", true);
      }
      if (c.pursuit.solver.max_iters < 1)
        throw config_error("solver.max_iters must be >= 1");
      for (double xi : c.pursuit.xis)
        if (xi <= 0.0) throw config_error("pursuit.xis must be positive");
      for (double beta : c.pursuit.betas)
        if (beta < 0.0) throw config_error("pursuit.betas must be >= 0");
      if (!c.pursuit.auto_from_bounds &&
          (c.pursuit.betas.empty() || c.pursuit.xis.empty()))
        throw config_error(
            "auto_from_bounds=false requires explicit pursuit.betas and pursuit.xis");
    }

    const json& a = j.at("attack");
    c.attack.kind = attack_kind_from(a.value("kind", "grad-ascent-l2"));
    c.attack.loss = attack_loss_from(a.value("loss", "neg-margin"));
    c.attack.eps_grid = a.at("eps_grid").get<std::vector<double>>();
    if (c.attack.eps_grid.empty()) throw config_error("attack.eps_grid is empty");
    if (c.attack.eps_grid.front() < 0.0)
      throw config_error("attack.eps_grid values must be >= 0");
    for (size_t i = 1; i < c.attack.eps_grid.size(); ++i)
      if (c.attack.eps_grid[i] <= c.attack.eps_grid[i - 1])
        throw config_error("attack.eps_grid must be strictly increasing");

    c.output_dir = j.value("output_dir", "out");
    c.emit_plot = j.value("emit_plot", true);
    c.jobs = j.value("jobs", 1);
    if (c.jobs < 1) throw config_error("jobs must be >= 1");
    return c;
  } catch (const json::exception& e) {
    throw config_error(std::string("config schema error: ") + e.what());
  }
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j{
      {"synth",
       {{"seed", c.synth.seed},
        {"n", c.synth.n},
        {"m", c.synth.m},
        {"k", c.synth.k},
        {"amp_range", {c.synth.amp_lo, c.synth.amp_hi}},
        {"margin_floor", c.synth.margin_floor},
        {"n_signals", c.synth.n_signals},
        {"dict_mode", to_string(c.synth.dict_mode)},
        {"sign_mode", to_string(c.synth.sign_mode)},
        {"coherence_floor", c.synth.coherence_floor},
        {"reduce_rounds", c.synth.reduce_rounds}}},
      {"pursuit",
       {{"auto_from_bounds", c.pursuit.auto_from_bounds},
        {"betas", c.pursuit.betas},
        {"xis", c.pursuit.xis},
        {"solver",
         {{"max_iters", c.pursuit.solver.max_iters},
          {"tol", c.pursuit.solver.tol},
          {"kkt_tol", c.pursuit.solver.kkt_tol},
          {"acceleration", c.pursuit.solver.acceleration}}}}},
      {"attack",
       {{"kind", to_string(c.attack.kind)},
        {"loss", to_string(c.attack.loss)},
        {"eps_grid", c.attack.eps_grid}}},
      {"output_dir", c.output_dir},
      {"emit_plot", c.emit_plot},
      {"jobs", c.jobs}};
  return j.dump(2) + "\n";
}

}  // namespace sparseshield
