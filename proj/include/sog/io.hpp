#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sog {

/// Numeric CSV, rows = samples, no header unless told otherwise.
/// Cells may be comma- or whitespace-separated.  Parse errors name the
/// file and line.
Eigen::MatrixXd read_csv_matrix(const std::string& path, bool header = false);
Eigen::VectorXd read_csv_vector(const std::string& path, bool header = false);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

/// Flat `key = value` config with namespaced keys (solver.eta1, ...).
/// '#' starts a comment; unknown keys are surfaced via unused().
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& name);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  uint64_t get_uint64(const std::string& key, uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback);

  /// keys present in the file but never read; callers report these
  std::vector<std::string> unused() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> kv_;
  std::map<std::string, bool> read_;
  const std::string* lookup(const std::string& key);
};

/// CSV report writer: emits `# schema=v1`, a timestamp comment unless
/// reproducible output was requested, then the header row.  All numeric
/// cells go through fixed printf-style formatting so identical runs are
/// byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            bool reproducible);
  void row(const std::vector<std::string>& cells);

  static std::string num(double v);
  static std::string num(int v);
  static std::string num(uint64_t v);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::string path_;
};

}  // namespace sog
