#include "sparseshield/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sparseshield {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'M', 'X'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
  // static_assert keeps this honest on exotic platforms
  static_assert(std::endian::native == std::endian::little,
                "SSMX writer assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  static_assert(std::endian::native == std::endian::little,
                "SSMX reader assumes a little-endian host");
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw io_error("SSMX: truncated file");
  return value;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Mat& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  write_le<uint32_t>(os, kVersion);
  write_le<uint64_t>(os, static_cast<uint64_t>(m.rows()));
  write_le<uint64_t>(os, static_cast<uint64_t>(m.cols()));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) write_le<double>(os, m(i, j));
  if (!os) throw io_error("write failed: " + path.string());
}

Mat read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw io_error("not an SSMX file: " + path.string());
  const uint32_t version = read_le<uint32_t>(is);
  if (version != kVersion)
    throw io_error("unsupported SSMX version in " + path.string());
  const uint64_t rows = read_le<uint64_t>(is);
  const uint64_t cols = read_le<uint64_t>(is);
  if (rows == 0 || cols == 0 || rows * cols > (1ULL << 32))
    throw io_error("unreasonable SSMX dimensions in " + path.string());
  Mat m(static_cast<long>(rows), static_cast<long>(cols));
  for (uint64_t i = 0; i < rows; ++i)
    for (uint64_t j = 0; j < cols; ++j)
      m(static_cast<long>(i), static_cast<long>(j)) = read_le<double>(is);
  return m;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // prefer the shortest representation that still round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double parsed;
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == v) return shorter;
  }
  return buf;
}

namespace {

using nlohmann::json;

json config_to_json(const SynthConfig& c) {
  return json{{"seed", c.seed},
              {"n", c.n},
              {"m", c.m},
              {"k", c.k},
              {"amp_range", {c.amp_lo, c.amp_hi}},
              {"margin_floor", c.margin_floor},
              {"n_signals", c.n_signals},
              {"dict_mode", to_string(c.dict_mode)},
              {"sign_mode", to_string(c.sign_mode)},
              {"coherence_floor", c.coherence_floor},
              {"reduce_rounds", c.reduce_rounds}};
}

SynthConfig config_from_json(const json& j) {
  SynthConfig c;
  c.seed = j.at("seed").get<uint64_t>();
  c.n = j.at("n").get<int>();
  c.m = j.at("m").get<int>();
  c.k = j.at("k").get<int>();
  c.amp_lo = j.at("amp_range").at(0).get<double>();
  c.amp_hi = j.at("amp_range").at(1).get<double>();
  c.margin_floor = j.at("margin_floor").get<double>();
  c.n_signals = j.at("n_signals").get<int>();
  const std::string dict_mode = j.at("dict_mode").get<std::string>();
  if (dict_mode == "gaussian-normalized")
    c.dict_mode = DictMode::GaussianNormalized;
  else if (dict_mode == "coherence-reduced")
    c.dict_mode = DictMode::CoherenceReduced;
  else
    throw io_error("unknown dict_mode: " + dict_mode);
  const std::string sign_mode = j.at("sign_mode").get<std::string>();
  if (sign_mode == "positive")
    c.sign_mode = SignMode::Positive;
  else if (sign_mode == "random-sign")
    c.sign_mode = SignMode::RandomSign;
  else
    throw io_error("unknown sign_mode: " + sign_mode);
  c.coherence_floor = j.value("coherence_floor", 0.0);
  c.reduce_rounds = j.value("reduce_rounds", 100);
  return c;
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& ds) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "dictionary.ssmx", ds.dict.matrix());
  write_matrix(dir / "classifier_w.ssmx", ds.clf.weights);

  const int n_samples = static_cast<int>(ds.samples.size());
  Mat codes(n_samples, ds.dict.cols());
  Mat signals(n_samples, ds.dict.rows());
  json labels = json::array();
  for (int i = 0; i < n_samples; ++i) {
    codes.row(i) = ds.samples[static_cast<size_t>(i)].code.dense().transpose();
    signals.row(i) = ds.samples[static_cast<size_t>(i)].signal.transpose();
    labels.push_back(ds.samples[static_cast<size_t>(i)].label);
  }
  write_matrix(dir / "codes.ssmx", codes);
  write_matrix(dir / "signals.ssmx", signals);

  json manifest{{"format_version", 1},
                {"config", config_to_json(ds.config)},
                {"mu", ds.mu},
                {"margin_star", ds.margin_star},
                {"acceptance_rate", ds.acceptance_rate},
                {"classifier_bias", ds.clf.bias},
                {"labels", labels},
                {"files",
                 {{"dictionary", "dictionary.ssmx"},
                  {"codes", "codes.ssmx"},
                  {"signals", "signals.ssmx"},
                  {"classifier_w", "classifier_w.ssmx"}}}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw io_error("bad manifest in " + dir.string() + ": " + e.what());
  }
  try {
    Mat dict_m = read_matrix(dir / manifest.at("files").at("dictionary").get<std::string>());
    Mat w = read_matrix(dir / manifest.at("files").at("classifier_w").get<std::string>());
    Mat codes = read_matrix(dir / manifest.at("files").at("codes").get<std::string>());
    Mat signals = read_matrix(dir / manifest.at("files").at("signals").get<std::string>());

    LabeledDataset ds{Dictionary(std::move(dict_m)),
                      LinearClassifier{w.col(0), manifest.at("classifier_bias").get<double>()},
                      {},
                      manifest.at("mu").get<double>(),
                      manifest.at("margin_star").get<double>(),
                      manifest.at("acceptance_rate").get<double>(),
                      config_from_json(manifest.at("config"))};
    const auto& labels = manifest.at("labels");
    if (static_cast<long>(labels.size()) != codes.rows())
      throw io_error("label count does not match code count");
    ds.samples.reserve(labels.size());
    for (long i = 0; i < codes.rows(); ++i) {
      Sample s;
      s.code = SparseCode::from_dense(codes.row(i).transpose());
      s.signal = signals.row(i).transpose();
      s.label = labels.at(static_cast<size_t>(i)).get<int>();
      ds.samples.push_back(std::move(s));
    }
    return ds;
  } catch (const json::exception& e) {
    throw io_error("bad manifest in " + dir.string() + ": " + e.what());
  }
}

std::string bound_report_to_json(const BoundReport& r) {
  json j{{"kind", to_string(r.kind)},
         {"feasible", r.feasible},
         {"degenerate", r.degenerate},
         {"eps_max", r.eps_max},
         {"eps_norm", to_string(r.eps_norm)}};
  if (r.k_max) j["k_max"] = *r.k_max;
  if (!r.beta_windows.empty()) {
    json windows = json::array();
    for (const auto& w : r.beta_windows) windows.push_back({w.lo, w.hi});
    j["beta_windows"] = windows;
  }
  if (!r.betas.empty()) j["betas"] = r.betas;
  if (!r.xi_schedule.empty()) j["xi_schedule"] = r.xi_schedule;
  if (!r.eps_chain.empty()) j["eps_chain"] = r.eps_chain;
  if (r.infeasible_layer) j["infeasible_layer"] = *r.infeasible_layer;
  j["inputs"] = r.inputs;
  return j.dump(2) + "\n";
}

BoundReport bound_report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error(std::string("bad bound report: ") + e.what());
  }
  BoundReport r;
  const std::string kind = j.at("kind").get<std::string>();
  bool found = false;
  for (BoundKind k :
       {BoundKind::Thm5Srip, BoundKind::Thm5Mu, BoundKind::Thm7Mu,
        BoundKind::Thm10Lthr, BoundKind::Thm11Lbp, BoundKind::Cor1Thr,
        BoundKind::Cor2Bp}) {
    if (kind == to_string(k)) {
      r.kind = k;
      found = true;
      break;
    }
  }
  if (!found) throw io_error("unknown bound kind: " + kind);
  r.feasible = j.at("feasible").get<bool>();
  r.degenerate = j.value("degenerate", false);
  r.eps_max = j.at("eps_max").get<double>();
  r.eps_norm = j.at("eps_norm").get<std::string>() == "patch-l2inf"
                   ? EpsNorm::PatchL2Inf
                   : EpsNorm::GlobalL2;
  if (j.contains("k_max")) r.k_max = j["k_max"].get<int>();
  if (j.contains("beta_windows"))
    for (const auto& w : j["beta_windows"])
      r.beta_windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
  if (j.contains("betas")) r.betas = j["betas"].get<std::vector<double>>();
  if (j.contains("xi_schedule"))
    r.xi_schedule = j["xi_schedule"].get<std::vector<double>>();
  if (j.contains("eps_chain")) r.eps_chain = j["eps_chain"].get<std::vector<double>>();
  if (j.contains("infeasible_layer")) r.infeasible_layer = j["infeasible_layer"].get<int>();
  if (j.contains("inputs"))
    r.inputs = j["inputs"].get<std::map<std::string, double>>();
  return r;
}

std::string trace_to_json(const PursuitTrace& trace) {
  json layers = json::array();
  for (const auto& l : trace.layers) {
    layers.push_back({{"support_size", l.code.l0()},
                      {"residual_norm", l.residual_norm},
                      {"iterations", l.iterations},
                      {"converged", l.converged}});
  }
  json j{{"layers", layers}};
  if (trace.score) j["score"] = *trace.score;
  return j.dump(2) + "\n";
}

std::string sweep_csv_header() {
  return "pipeline,eps,norm_kind,n_signals,n_correct,accuracy,seed\n";
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = sweep_csv_header();
  for (const auto& r : rows) {
    out += r.pipeline;
    out += ',';
    out += format_double(r.eps);
    out += ',';
    out += r.norm_kind;
    out += ',';
    out += std::to_string(r.n_signals);
    out += ',';
    out += std::to_string(r.n_correct);
    out += ',';
    out += format_double(r.accuracy);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> sweep_rows_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw io_error("sweep CSV: empty input");
  if (line != "pipeline,eps,norm_kind,n_signals,n_correct,accuracy,seed")
    throw io_error("sweep CSV: unexpected header: " + line);
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    SweepRow r;
    if (!std::getline(ls, r.pipeline, ',')) throw io_error("sweep CSV: bad row");
    if (!std::getline(ls, field, ',')) throw io_error("sweep CSV: bad row");
    r.eps = std::stod(field);
    if (!std::getline(ls, r.norm_kind, ',')) throw io_error("sweep CSV: bad row");
    if (!std::getline(ls, field, ',')) throw io_error("sweep CSV: bad row");
    r.n_signals = std::stoi(field);
    if (!std::getline(ls, field, ',')) throw io_error("sweep CSV: bad row");
    r.n_correct = std::stoi(field);
    if (!std::getline(ls, field, ',')) throw io_error("sweep CSV: bad row");
    r.accuracy = std::stod(field);
    if (!std::getline(ls, field, ',')) throw io_error("sweep CSV: bad row");
    r.seed = std::stoull(field);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw io_error("sweep CSV: no data rows");
  return rows;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw io_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace sparseshield
