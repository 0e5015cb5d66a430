#pragma once

#include "gar/estimator.hpp"
#include "gar/graph.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gar {

/// Rectangular numeric CSV ('.' decimal, ',' separator). A non-numeric first
/// row is treated as a header. Ragged rows and non-numeric cells are rejected
/// with their line (and column) number.
struct CsvData {
  Matrix values;
  std::vector<std::string> header;
  bool had_header = false;
};

CsvData read_csv(std::istream& is);
CsvData read_csv_file(const std::string& path);
void write_csv(std::ostream& os, const Eigen::Ref<const Matrix>& values,
               const std::vector<std::string>& header);

/// Per-column (x - mean) / sd with divisor-n sd. Throws ZeroVariance naming
/// the first constant column.
Matrix standardize_columns(const Eigen::Ref<const Matrix>& data);

/// Ordered key=value configuration. Keys are fixed per subcommand; unknown
/// keys are rejected both from files and from setters. Serialization echoes
/// every key, so a written config fully reproduces the run.
class RunConfig {
 public:
  explicit RunConfig(
      std::vector<std::pair<std::string, std::string>> defaults);

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::string serialize() const;  // "key = value" lines, insertion order
  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
  int index_of(const std::string& key) const;
};

/// On-disk model bundle: theta0 (+ optional theta1 for simulated truths), v0,
/// Laplacian diagonal in JSON; off-diagonals live in the companion edge-list
/// file.
struct ModelFile {
  double theta0 = 0.0;
  double theta1 = 0.0;  // 0 when absent
  Vector v0;
  Vector l_diag;
};

void write_model_json(const std::string& path, const ModelFile& model);
ModelFile read_model_json(const std::string& path);

/// Reassembles the full Laplacian from a model bundle directory holding
/// <prefix>model.json and <prefix>edges.tsv.
struct LoadedModel {
  GarModel model;
  double theta1 = 0.0;
};
LoadedModel read_model_bundle(const std::string& dir,
                              const std::string& prefix);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace gar
