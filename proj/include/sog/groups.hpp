#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sog {

/// A collection of (possibly overlapping) index groups over coordinates
/// 0..p-1.  K, L and R are recomputed at construction and never trusted
/// from input.  Immutable after construction.
struct GroupLayout {
  std::vector<std::vector<int>> groups;  // user-given order
  int p = 0;
  int K = 0;  // number of groups
  int L = 0;  // largest group size
  int R = 0;  // max number of groups sharing one coordinate
  std::vector<int> membership_count;  // per coordinate, size p

  bool disjoint() const { return R == 1; }
};

/// Validates and builds a layout.  Throws std::invalid_argument on
/// out-of-range indices, duplicate indices within a group, or a
/// coordinate not covered by any group (named in the message).
GroupLayout build_layout(std::vector<std::vector<int>> groups, int p);

/// Bijection between per-group replicated coordinates and a flat expanded
/// space where groups occupy disjoint contiguous ranges.
struct DuplicationMap {
  struct Slot {
    int group;
    int original;
  };
  std::vector<Slot> slots;                        // size expanded_dim
  std::vector<std::pair<int, int>> group_ranges;  // [begin,end) per group
  std::vector<int> membership_count;              // per original coordinate
  int expanded_dim = 0;
  int original_dim = 0;
};

DuplicationMap build_duplication(const GroupLayout& layout);

/// Copies column slots[j].original of Phi into expanded column j.
Eigen::MatrixXd expand_design(const Eigen::MatrixXd& Phi,
                              const DuplicationMap& map);

/// Sums expanded slots back onto original coordinates: x_i = sum over
/// slots of coordinate i.
Eigen::VectorXd collapse(const Eigen::VectorXd& w, const DuplicationMap& map);

/// Adjoint of collapse: slot j receives x[slots[j].original].
Eigen::VectorXd collapse_adjoint(const Eigen::VectorXd& x,
                                 const DuplicationMap& map);

// Layout generators used by the CLI and the experiment drivers.

/// K disjoint consecutive blocks of equal size; p = K * group_size.
GroupLayout make_block_layout(int num_groups, int group_size);

/// One singleton group per coordinate.
GroupLayout make_singleton_layout(int p);

/// Chain of groups of `group_size` consecutive coordinates, each shifted
/// by `shift` from the previous (shift < group_size gives overlap).
/// p = shift * (num_groups - 1) + group_size.
GroupLayout make_chain_layout(int num_groups, int group_size, int shift);

/// Groups are axis-aligned blocks on a 3-d grid, tiled with the given
/// per-axis shifts; every voxel the tiling misses is rejected at
/// construction like any uncovered coordinate.
GroupLayout make_grid_layout(std::array<int, 3> dims, std::array<int, 3> block,
                             std::array<int, 3> shift);

// Group file format: one group per line, whitespace-separated 0-based
// indices; blank lines and '#' comments ignored.

std::vector<std::vector<int>> read_groups_file(const std::string& path);
void write_groups_file(const std::string& path,
                       const std::vector<std::vector<int>>& groups);

}  // namespace sog
