#include "urbangraph/mixing.hpp"

#include <cmath>

#include <fmt/format.h>

#include "urbangraph/csv.hpp"
#include "urbangraph/error.hpp"

namespace urbangraph {

bool Matrix::symmetric() const noexcept {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

double Matrix::upper_sum() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) sum += (*this)(i, j);
  }
  return sum;
}

ContactMatrix make_contact_matrix(Matrix gamma, std::vector<std::string> labels) {
  if (gamma.size() == 0) fail(ErrorKind::Config, "contact matrix is empty");
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      const double g = gamma(i, j);
      if (!(g >= 0.0) || !std::isfinite(g)) {
        fail(ErrorKind::Config, fmt::format("contact matrix entry ({}, {}) = {} must be finite and >= 0", i, j, g));
      }
    }
  }
  if (!labels.empty() && labels.size() != gamma.size()) {
    fail(ErrorKind::Config, "contact matrix labels do not match its dimension");
  }
  return {std::move(gamma), std::move(labels)};
}

ContactMatrix load_contact_matrix(std::istream& in, std::string_view source_name) {
  const auto table = csv::read(in, source_name);
  const auto n = table.rows.size();
  std::size_t skip = 0;
  if (table.header.size() == n + 1) {
    skip = 1;
  } else if (table.header.size() != n) {
    fail(ErrorKind::Parse, fmt::format("{}: contact matrix is not square ({} rows, {} columns)", source_name, n,
                                       table.header.size()));
  }
  Matrix gamma(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    for (std::size_t j = 0; j < n; ++j) {
      gamma(i, j) = csv::parse_double(row.fields[j + skip], row.line, source_name);
    }
  }
  std::vector<std::string> labels(table.header.begin() + static_cast<std::ptrdiff_t>(skip), table.header.end());
  return make_contact_matrix(std::move(gamma), std::move(labels));
}

Matrix pair_counts(std::span<const std::uint64_t> group_sizes) {
  const auto n = group_sizes.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto vi = group_sizes[i];
    m(i, i) = static_cast<double>(vi * (vi > 0 ? vi - 1 : 0) / 2);
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = m(j, i) = static_cast<double>(vi * group_sizes[j]);
    }
  }
  return m;
}

GroupAdjacency reciprocity_correct(const ContactMatrix& contacts, std::span<const std::uint64_t> group_sizes) {
  const auto& g = contacts.gamma;
  const auto n = g.size();
  if (group_sizes.size() != n) {
    fail(ErrorKind::Config, fmt::format("contact matrix has {} groups but the population has {}", n,
                                        group_sizes.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (group_sizes[i] == 0) fail(ErrorKind::InvalidParameter, fmt::format("age group {} is empty", i));
  }
  GroupAdjacency out{Matrix(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto vi = static_cast<double>(group_sizes[i]);
    out.alpha(i, i) = 0.5 * g(i, i) * vi;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto vj = static_cast<double>(group_sizes[j]);
      out.alpha(i, j) = out.alpha(j, i) = 0.5 * (g(i, j) * vi + g(j, i) * vj);
    }
  }
  return out;
}

MixingMatrix edge_frequency_matrix(const GroupAdjacency& adjacency, std::span<const std::uint64_t> group_sizes,
                                   bool normalize) {
  const auto& a = adjacency.alpha;
  const auto n = a.size();
  if (group_sizes.size() != n) {
    fail(ErrorKind::Config, fmt::format("group adjacency has {} groups but the population has {}", n,
                                        group_sizes.size()));
  }
  const auto m = pair_counts(group_sizes);
  MixingMatrix out{Matrix(n), false};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      if (a(i, j) > 0.0) {
        if (m(i, j) == 0.0) {
          fail(ErrorKind::DegenerateGroup,
               fmt::format("groups ({}, {}) have edge demand {} but no vertex pairs", i, j, a(i, j)));
        }
        s = a(i, j) / m(i, j);
      }
      out.s(i, j) = out.s(j, i) = s;
    }
  }
  if (normalize) {
    const double total = out.s.upper_sum();
    if (!(total > 0.0)) fail(ErrorKind::ModelDegenerate, "mixing matrix is identically zero");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out.s(i, j) /= total;
    }
    out.normalized = true;
  }
  return out;
}

MixingMatrix homogeneous_S(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidParameter, "mixing needs at least one group");
  const double v = 1.0 / static_cast<double>(n * n);
  return {Matrix(n, v), false};
}

std::vector<std::size_t> isolated_groups(const MixingMatrix& mixing) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mixing.s.size(); ++i) {
    bool zero = true;
    for (std::size_t j = 0; j < mixing.s.size() && zero; ++j) zero = mixing.s(i, j) == 0.0;
    if (zero) out.push_back(i);
  }
  return out;
}

}  // namespace urbangraph
