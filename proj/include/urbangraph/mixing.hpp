#pragma once

// Age mixing: survey contact rates -> symmetric group adjacency -> edge
// frequency matrix S.

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urbangraph {

/// Dense row-major square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return data_; }

  bool symmetric() const noexcept;
  /// Sum over the upper triangle including the diagonal.
  double upper_sum() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// gamma(i, j): mean contacts of a group-i respondent with group j.
struct ContactMatrix {
  Matrix gamma;
  std::vector<std::string> labels;
};

/// alpha(i, j): estimated number of edges between groups i and j.
struct GroupAdjacency {
  Matrix alpha;
};

struct MixingMatrix {
  Matrix s;
  /// Set when the upper triangle sums to 1.
  bool normalized = false;
};

/// Validates squareness and nonnegative finite entries.
ContactMatrix make_contact_matrix(Matrix gamma, std::vector<std::string> labels = {});

/// Header of column labels, then one row per respondent group. A leading
/// label column is accepted when the header has n+1 fields.
ContactMatrix load_contact_matrix(std::istream& in, std::string_view source_name = "contact_matrix.csv");

/// m(i, j) = |Vi||Vj| off the diagonal, |Vi|(|Vi|-1)/2 on it.
Matrix pair_counts(std::span<const std::uint64_t> group_sizes);

GroupAdjacency reciprocity_correct(const ContactMatrix& contacts, std::span<const std::uint64_t> group_sizes);

/// s(i, j) = alpha(i, j) / m(i, j), optionally normalised to unit upper sum.
MixingMatrix edge_frequency_matrix(const GroupAdjacency& adjacency, std::span<const std::uint64_t> group_sizes,
                                   bool normalize = true);

/// Constant 1/n^2.
MixingMatrix homogeneous_S(std::size_t n);

/// Groups whose S row is identically zero.
std::vector<std::size_t> isolated_groups(const MixingMatrix& mixing);

}  // namespace urbangraph
