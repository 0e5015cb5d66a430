#include "gar/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gar {

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

CsvData read_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  CsvData out;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line, ',');
    if (rows.empty() && !out.had_header && out.header.empty()) {
      // header auto-detection: a first row with any non-numeric cell
      bool numeric = true;
      double value;
      for (const std::string& field : fields)
        if (!parse_double(field, value)) {
          numeric = false;
          break;
        }
      if (!numeric) {
        out.header = fields;
        out.had_header = true;
        width = fields.size();
        continue;
      }
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw Error(ErrorCode::IoError,
                  "csv: ragged row at line " + std::to_string(line_no) +
                      " (" + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(width) + ")");
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_double(fields[c], row[c]))
        throw Error(ErrorCode::IoError,
                    "csv: non-numeric cell at line " + std::to_string(line_no) +
                        ", column " + std::to_string(c + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(ErrorCode::IoError, "csv: no data rows");
  out.values.resize(long(rows.size()), long(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) out.values(long(r), long(c)) = rows[r][c];
  return out;
}

CsvData read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& os, const Eigen::Ref<const Matrix>& values,
               const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      os << (c ? "," : "") << header[c];
    os << '\n';
  }
  os.precision(17);
  for (long r = 0; r < values.rows(); ++r) {
    for (long c = 0; c < values.cols(); ++c)
      os << (c ? "," : "") << values(r, c);
    os << '\n';
  }
}

Matrix standardize_columns(const Eigen::Ref<const Matrix>& data) {
  const long n = data.rows();
  Matrix out = data;
  for (long c = 0; c < data.cols(); ++c) {
    const double mean = data.col(c).mean();
    const double sd =
        std::sqrt((data.col(c).array() - mean).square().sum() / double(n));
    if (sd <= 0.0)
      throw Error(ErrorCode::ZeroVariance,
                  "standardize: zero variance in column " + std::to_string(c));
    out.col(c) = (data.col(c).array() - mean) / sd;
  }
  return out;
}

RunConfig::RunConfig(std::vector<std::pair<std::string, std::string>> defaults)
    : items_(std::move(defaults)) {}

int RunConfig::index_of(const std::string& key) const {
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (items_[i].first == key) return int(i);
  return -1;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t") != std::string::npos)
        throw Error(ErrorCode::IoError,
                    "config: bad line " + std::to_string(line_no));
      continue;
    }
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t");
      const std::size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const int i = index_of(key);
  if (i < 0)
    throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
  items_[i].second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  const int i = index_of(key);
  if (i < 0)
    throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
  return items_[i].second;
}

double RunConfig::get_double(const std::string& key) const {
  double value;
  if (!parse_double(get(key), value))
    throw Error(ErrorCode::InvalidArgument,
                "config: key '" + key + "' is not a number");
  return value;
}

int RunConfig::get_int(const std::string& key) const {
  return int(get_double(key));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t value = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size())
    throw Error(ErrorCode::InvalidArgument,
                "config: key '" + key + "' is not an unsigned integer");
  return value;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw Error(ErrorCode::InvalidArgument,
              "config: key '" + key + "' is not a boolean");
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [key, value] : items_) os << key << " = " << value << '\n';
  return os.str();
}

void write_model_json(const std::string& path, const ModelFile& model) {
  nlohmann::ordered_json doc;
  doc["theta0"] = model.theta0;
  if (model.theta1 > 0.0) doc["theta1"] = model.theta1;
  doc["p"] = model.v0.size();
  doc["v0"] = std::vector<double>(model.v0.begin(), model.v0.end());
  doc["l_diag"] = std::vector<double>(model.l_diag.begin(), model.l_diag.end());
  write_text_file(path, doc.dump(2) + "\n");
}

ModelFile read_model_json(const std::string& path) {
  nlohmann::json doc = nlohmann::json::parse(read_text_file(path));
  ModelFile model;
  model.theta0 = doc.at("theta0").get<double>();
  model.theta1 = doc.value("theta1", 0.0);
  const auto v0 = doc.at("v0").get<std::vector<double>>();
  const auto l_diag = doc.at("l_diag").get<std::vector<double>>();
  model.v0 = Eigen::Map<const Vector>(v0.data(), long(v0.size()));
  model.l_diag = Eigen::Map<const Vector>(l_diag.data(), long(l_diag.size()));
  return model;
}

LoadedModel read_model_bundle(const std::string& dir,
                              const std::string& prefix) {
  const std::string base = dir + "/" + prefix;
  const ModelFile file = read_model_json(base + "model.json");
  const int p = int(file.l_diag.size());
  std::ifstream edges(base + "edges.tsv");
  if (!edges)
    throw Error(ErrorCode::IoError, "cannot open " + base + "edges.tsv");
  Matrix l = read_edge_list_offdiag(edges, p);
  if (l.rows() != p)
    throw Error(ErrorCode::IoError,
                base + "edges.tsv: node index beyond model dimension");
  l.diagonal() = file.l_diag;

  LoadedModel out;
  out.model.theta0 = file.theta0;
  out.model.v0 = file.v0;
  out.model.laplacian.entries = std::move(l);
  out.model.laplacian.space = LaplacianSpace::Final;
  out.model.laplacian.support =
      topology_from_laplacian(out.model.laplacian.entries, 1e-300);
  out.model.laplacian.v0 = file.v0;
  out.theta1 = file.theta1;
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace gar
