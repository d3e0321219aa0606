#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparseshield/attack.hpp"
#include "sparseshield/bounds.hpp"
#include "sparseshield/model.hpp"
#include "sparseshield/pursuit.hpp"
#include "sparseshield/synth.hpp"

namespace sparseshield {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SSMX matrix container: "SSMX" magic, u32 version, u64 rows, u64 cols,
// then row-major IEEE-754 doubles; all fields little-endian.
void write_matrix(const std::filesystem::path& path, const Mat& m);
Mat read_matrix(const std::filesystem::path& path);

// Deterministic shortest-uniquely-round-tripping decimal form of a double.
std::string format_double(double v);

// Dataset directory: manifest.json plus SSMX files for the dictionary,
// codes, signals and classifier weights.
void save_dataset(const std::filesystem::path& dir, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& dir);

std::string bound_report_to_json(const BoundReport& r);
BoundReport bound_report_from_json(const std::string& text);

std::string trace_to_json(const PursuitTrace& trace);

std::string sweep_csv_header();
std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_rows_from_csv(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sparseshield
