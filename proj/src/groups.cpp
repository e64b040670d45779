#include "sog/groups.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sog {

GroupLayout build_layout(std::vector<std::vector<int>> groups, int p) {
  if (p <= 0) throw std::invalid_argument("layout: dimension must be positive");
  if (groups.empty()) throw std::invalid_argument("layout: no groups given");

  GroupLayout layout;
  layout.p = p;
  layout.membership_count.assign(p, 0);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty())
      throw std::invalid_argument("layout: group " + std::to_string(g) +
                                  " is empty");
    std::vector<int> seen_in_group;
    for (int idx : groups[g]) {
      if (idx < 0 || idx >= p)
        throw std::invalid_argument(
            "layout: group " + std::to_string(g) + " contains index " +
            std::to_string(idx) + " outside [0," + std::to_string(p) + ")");
      if (std::find(seen_in_group.begin(), seen_in_group.end(), idx) !=
          seen_in_group.end())
        throw std::invalid_argument("layout: group " + std::to_string(g) +
                                    " lists index " + std::to_string(idx) +
                                    " twice");
      seen_in_group.push_back(idx);
      ++layout.membership_count[idx];
    }
    layout.L = std::max(layout.L, static_cast<int>(groups[g].size()));
  }
  for (int i = 0; i < p; ++i) {
    if (layout.membership_count[i] == 0)
      throw std::invalid_argument("layout: coordinate " + std::to_string(i) +
                                  " is not covered by any group");
    layout.R = std::max(layout.R, layout.membership_count[i]);
  }
  layout.groups = std::move(groups);
  layout.K = static_cast<int>(layout.groups.size());
  return layout;
}

DuplicationMap build_duplication(const GroupLayout& layout) {
  DuplicationMap map;
  map.original_dim = layout.p;
  map.membership_count = layout.membership_count;
  map.group_ranges.reserve(layout.groups.size());
  for (int g = 0; g < layout.K; ++g) {
    int begin = static_cast<int>(map.slots.size());
    for (int idx : layout.groups[g]) map.slots.push_back({g, idx});
    map.group_ranges.emplace_back(begin, static_cast<int>(map.slots.size()));
  }
  map.expanded_dim = static_cast<int>(map.slots.size());
  return map;
}

Eigen::MatrixXd expand_design(const Eigen::MatrixXd& Phi,
                              const DuplicationMap& map) {
  if (Phi.cols() != map.original_dim)
    throw std::invalid_argument("expand_design: design has " +
                                std::to_string(Phi.cols()) +
                                " columns, layout covers " +
                                std::to_string(map.original_dim));
  Eigen::MatrixXd out(Phi.rows(), map.expanded_dim);
  for (int j = 0; j < map.expanded_dim; ++j)
    out.col(j) = Phi.col(map.slots[j].original);
  return out;
}

Eigen::VectorXd collapse(const Eigen::VectorXd& w, const DuplicationMap& map) {
  if (w.size() != map.expanded_dim)
    throw std::invalid_argument("collapse: expected expanded dimension " +
                                std::to_string(map.expanded_dim) + ", got " +
                                std::to_string(w.size()));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(map.original_dim);
  for (int j = 0; j < map.expanded_dim; ++j) x[map.slots[j].original] += w[j];
  return x;
}

Eigen::VectorXd collapse_adjoint(const Eigen::VectorXd& x,
                                 const DuplicationMap& map) {
  if (x.size() != map.original_dim)
    throw std::invalid_argument("collapse_adjoint: expected dimension " +
                                std::to_string(map.original_dim) + ", got " +
                                std::to_string(x.size()));
  Eigen::VectorXd w(map.expanded_dim);
  for (int j = 0; j < map.expanded_dim; ++j) w[j] = x[map.slots[j].original];
  return w;
}

GroupLayout make_block_layout(int num_groups, int group_size) {
  if (num_groups <= 0 || group_size <= 0)
    throw std::invalid_argument("block layout: sizes must be positive");
  std::vector<std::vector<int>> groups(num_groups);
  for (int g = 0; g < num_groups; ++g)
    for (int j = 0; j < group_size; ++j)
      groups[g].push_back(g * group_size + j);
  return build_layout(std::move(groups), num_groups * group_size);
}

GroupLayout make_singleton_layout(int p) { return make_block_layout(p, 1); }

GroupLayout make_chain_layout(int num_groups, int group_size, int shift) {
  if (num_groups <= 0 || group_size <= 0)
    throw std::invalid_argument("chain layout: sizes must be positive");
  if (shift <= 0 || shift > group_size)
    throw std::invalid_argument(
        "chain layout: shift must be in [1, group_size] or coverage breaks");
  int p = shift * (num_groups - 1) + group_size;
  std::vector<std::vector<int>> groups(num_groups);
  for (int g = 0; g < num_groups; ++g)
    for (int j = 0; j < group_size; ++j) groups[g].push_back(g * shift + j);
  return build_layout(std::move(groups), p);
}

GroupLayout make_grid_layout(std::array<int, 3> dims, std::array<int, 3> block,
                             std::array<int, 3> shift) {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0 || block[a] <= 0)
      throw std::invalid_argument("grid layout: sizes must be positive");
    if (shift[a] <= 0 || shift[a] > block[a])
      throw std::invalid_argument(
          "grid layout: shift must be in [1, block] per axis");
    if (block[a] > dims[a])
      throw std::invalid_argument("grid layout: block exceeds grid extent");
  }
  auto starts = [](int dim, int blk, int sh) {
    std::vector<int> s;
    for (int o = 0; o + blk <= dim; o += sh) s.push_back(o);
    return s;
  };
  auto flat = [&](int x, int y, int z) {
    return (x * dims[1] + y) * dims[2] + z;
  };
  std::vector<std::vector<int>> groups;
  for (int ox : starts(dims[0], block[0], shift[0]))
    for (int oy : starts(dims[1], block[1], shift[1]))
      for (int oz : starts(dims[2], block[2], shift[2])) {
        std::vector<int> g;
        g.reserve(block[0] * block[1] * block[2]);
        for (int dx = 0; dx < block[0]; ++dx)
          for (int dy = 0; dy < block[1]; ++dy)
            for (int dz = 0; dz < block[2]; ++dz)
              g.push_back(flat(ox + dx, oy + dy, oz + dz));
        groups.push_back(std::move(g));
      }
  return build_layout(std::move(groups), dims[0] * dims[1] * dims[2]);
}

std::vector<std::vector<int>> read_groups_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open group file: " + path);
  std::vector<std::vector<int>> groups;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<int> g;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        g.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": bad group index '" + tok + "'");
      }
    }
    if (!g.empty()) groups.push_back(std::move(g));
  }
  if (groups.empty())
    throw std::runtime_error(path + ": no groups found");
  return groups;
}

void write_groups_file(const std::string& path,
                       const std::vector<std::vector<int>>& groups) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write group file: " + path);
  for (const auto& g : groups) {
    for (std::size_t j = 0; j < g.size(); ++j)
      out << (j ? " " : "") << g[j];
    out << "\n";
  }
}

}  // namespace sog
