#include "sog/io.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <stdexcept>

namespace sog {

namespace {

std::vector<double> parse_numeric_line(const std::string& line,
                                       const std::string& path, int lineno) {
  std::string cleaned = line;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  std::vector<double> cells;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      cells.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad numeric value '" + tok + "'");
    }
  }
  return cells;
}

std::vector<std::vector<double>> read_rows(const std::string& path,
                                           bool header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    rows.push_back(parse_numeric_line(line, path, lineno));
    if (rows.size() > 1 && rows.back().size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": row has " +
                               std::to_string(rows.back().size()) +
                               " cells, expected " +
                               std::to_string(rows.front().size()));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  return rows;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path, bool header) {
  auto rows = read_rows(path, header);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Eigen::VectorXd read_csv_vector(const std::string& path, bool header) {
  auto rows = read_rows(path, header);
  if (rows.front().size() != 1)
    throw std::runtime_error(path + ": expected one value per line, found " +
                             std::to_string(rows.front().size()));
  Eigen::VectorXd v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i][0];
  return v;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << CsvWriter::num(m(i, j));
    out << "\n";
  }
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config c;
  c.origin_ = name;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(name + ":" + std::to_string(lineno) +
                               ": empty key");
    c.kv_[key] = val;
    c.read_[key] = false;
  }
  return c;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

const std::string* Config::lookup(const std::string& key) {
  auto it = kv_.find(key);
  if (it == kv_.end()) return nullptr;
  read_[key] = true;
  return &it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) {
  const std::string* v = lookup(key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": key '" + key +
                             "' is not a number: '" + *v + "'");
  }
}

int Config::get_int(const std::string& key, int fallback) {
  double d = get_double(key, double(fallback));
  int i = static_cast<int>(d);
  if (double(i) != d)
    throw std::runtime_error(origin_ + ": key '" + key +
                             "' is not an integer");
  return i;
}

uint64_t Config::get_uint64(const std::string& key, uint64_t fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    uint64_t u = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return u;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": key '" + key +
                             "' is not an unsigned integer: '" + *v + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw std::runtime_error(origin_ + ": key '" + key +
                           "' is not a boolean: '" + *v + "'");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            std::vector<double> fallback) {
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::string cleaned = *v;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error(origin_ + ": key '" + key +
                               "' has a bad list entry: '" + tok + "'");
    }
  }
  if (out.empty())
    throw std::runtime_error(origin_ + ": key '" + key + "' lists no values");
  return out;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> keys;
  for (const auto& [k, was_read] : read_)
    if (!was_read) keys.push_back(k);
  return keys;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& columns,
                     bool reproducible)
    : out_(path), columns_(columns.size()), path_(path) {
  if (!out_) throw std::runtime_error("cannot write: " + path);
  out_ << "# schema=v1\n";
  if (!reproducible) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out_ << "# generated=" << buf << "\n";
  }
  for (std::size_t j = 0; j < columns.size(); ++j)
    out_ << (j ? "," : "") << columns[j];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw std::logic_error(path_ + ": row with " + std::to_string(cells.size()) +
                           " cells for " + std::to_string(columns_) +
                           " columns");
  for (std::size_t j = 0; j < cells.size(); ++j)
    out_ << (j ? "," : "") << cells[j];
  out_ << "\n";
}

std::string CsvWriter::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string CsvWriter::num(int v) { return std::to_string(v); }
std::string CsvWriter::num(uint64_t v) { return std::to_string(v); }

}  // namespace sog
