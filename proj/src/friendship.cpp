#include "urbangraph/friendship.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "urbangraph/error.hpp"
#include "urbangraph/rng.hpp"

namespace urbangraph {

void DistanceKernel::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorKind::InvalidParameter, fmt::format("kernel scale must be positive, got {}", scale));
  }
  if (kind == KernelKind::InversePower && (!(beta >= 0.0) || !std::isfinite(beta))) {
    fail(ErrorKind::InvalidParameter, fmt::format("kernel exponent must be >= 0, got {}", beta));
  }
}

double DistanceKernel::operator()(double distance_km) const {
  if (kind == KernelKind::ConstantOne) return scale;
  if (!(distance_km > 0.0)) fail(ErrorKind::InvalidParameter, "kernel distance must be positive");
  return scale * std::pow(distance_km, -beta);
}

FriendshipContext FriendshipContext::build(std::span<const Person> persons, const Grid& grid,
                                           const MixingMatrix& mixing, const DistanceKernel& kernel, double mu) {
  kernel.validate();
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    fail(ErrorKind::InvalidParameter, fmt::format("mu must be finite and >= 0, got {}", mu));
  }
  if (persons.empty()) fail(ErrorKind::EmptyPopulation, "no persons to connect");
  if (!mixing.s.symmetric()) fail(ErrorKind::Config, "mixing matrix must be symmetric");

  FriendshipContext ctx;
  ctx.mu_ = mu;
  ctx.groups_ = mixing.s.size();
  const auto n = ctx.groups_;
  const auto count = persons.size();

  std::vector<std::uint8_t> used(grid.tile_count(), 0);
  for (std::size_t u = 0; u < count; ++u) {
    const auto& p = persons[u];
    if (p.id != u) fail(ErrorKind::Data, fmt::format("person at position {} carries id {}", u, p.id));
    if (p.group >= n) {
      fail(ErrorKind::Config, fmt::format("person {} is in age group {} but the mixing matrix has {} groups", u,
                                          p.group, n));
    }
    if (p.tile >= grid.tile_count()) fail(ErrorKind::InvalidIndex, fmt::format("person {} is off the grid", u));
    if (!(p.fitness > 0.0) || !std::isfinite(p.fitness)) {
      fail(ErrorKind::InvalidParameter, fmt::format("person {} has fitness {}", u, p.fitness));
    }
    used[p.tile] = 1;
  }
  std::vector<std::uint32_t> local(grid.tile_count(), 0);
  for (TileIndex t = 0; t < grid.tile_count(); ++t) {
    if (used[t]) {
      local[t] = static_cast<std::uint32_t>(ctx.tiles_.size());
      ctx.tiles_.push_back(t);
    }
  }
  const auto T = ctx.tiles_.size();

  ctx.d_.resize(T * T);
  for (std::size_t s = 0; s < T; ++s) {
    for (std::size_t t = s; t < T; ++t) {
      ctx.d_[s * T + t] = ctx.d_[t * T + s] = kernel(grid.distance_km(ctx.tiles_[s], ctx.tiles_[t]));
    }
  }

  const auto cells = n * T;
  ctx.group_.resize(count);
  ctx.local_tile_.resize(count);
  ctx.fitness_.resize(count);
  ctx.sizes_.assign(n, 0);
  ctx.cell_f_.assign(cells, 0.0);
  ctx.cell_f2_.assign(cells, 0.0);
  ctx.cell_fmax_.assign(cells, 0.0);
  ctx.cell_fsecond_.assign(cells, 0.0);
  ctx.cell_offsets_.assign(cells + 1, 0);
  std::vector<std::uint64_t> tile_pop(T, 0);
  double fsum = 0.0;
  for (std::size_t u = 0; u < count; ++u) {
    const auto& p = persons[u];
    const auto t = local[p.tile];
    const auto cell = p.group * T + t;
    ctx.group_[u] = p.group;
    ctx.local_tile_[u] = t;
    ctx.fitness_[u] = p.fitness;
    ++ctx.sizes_[p.group];
    ++tile_pop[t];
    ++ctx.cell_offsets_[cell + 1];
    ctx.cell_f_[cell] += p.fitness;
    ctx.cell_f2_[cell] += p.fitness * p.fitness;
    if (p.fitness > ctx.cell_fmax_[cell]) {
      ctx.cell_fsecond_[cell] = ctx.cell_fmax_[cell];
      ctx.cell_fmax_[cell] = p.fitness;
    } else if (p.fitness > ctx.cell_fsecond_[cell]) {
      ctx.cell_fsecond_[cell] = p.fitness;
    }
    fsum += p.fitness;
  }
  for (std::size_t c = 0; c < cells; ++c) ctx.cell_offsets_[c + 1] += ctx.cell_offsets_[c];
  ctx.members_.resize(count);
  {
    std::vector<std::uint64_t> fill(ctx.cell_offsets_.begin(), ctx.cell_offsets_.end() - 1);
    for (std::size_t u = 0; u < count; ++u) {
      ctx.members_[fill[ctx.group_[u] * T + ctx.local_tile_[u]]++] = static_cast<PersonId>(u);
    }
  }

  ctx.m_ = pair_counts(ctx.sizes_);
  ctx.s_ = mixing.s;
  ctx.mass_ = Matrix(n);
  ctx.total_mass_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double mass = ctx.m_(i, j) * ctx.s_(i, j);
      ctx.mass_(i, j) = ctx.mass_(j, i) = mass;
      ctx.total_mass_ += mass;
    }
  }
  if (!(ctx.total_mass_ > 0.0)) {
    fail(ErrorKind::ModelDegenerate, "mixing mass M is zero: no group pair can receive an edge");
  }

  ctx.a_ = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t s = 0; s < T; ++s) {
        const double fi = ctx.cell_f_[i * T + s];
        if (fi == 0.0) continue;
        for (std::size_t t = 0; t < T; ++t) sum += ctx.d_[s * T + t] * fi * ctx.cell_f_[j * T + t];
      }
      if (i == j) {
        for (std::size_t t = 0; t < T; ++t) sum -= ctx.d_[t * T + t] * ctx.cell_f2_[i * T + t];
        sum *= 0.5;
        if (ctx.m_(i, i) == 0.0) sum = 0.0;
      }
      ctx.a_(i, j) = ctx.a_(j, i) = sum;
      if (ctx.mass_(i, j) > 0.0 && !(sum > 0.0)) {
        fail(ErrorKind::ModelDegenerate, fmt::format("attraction A({}, {}) vanished although pairs exist", i, j));
      }
    }
  }

  // Per-cell reach: sum_t D(s,t) sum_j M(i,j)/A(i,j) F_j(t).
  ctx.reach_.assign(cells, 0.0);
  std::vector<double> weighted(T);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(weighted.begin(), weighted.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (ctx.a_(i, j) <= 0.0) continue;
      const double w = ctx.mass_(i, j) / ctx.a_(i, j);
      for (std::size_t t = 0; t < T; ++t) weighted[t] += w * ctx.cell_f_[j * T + t];
    }
    for (std::size_t s = 0; s < T; ++s) {
      double sum = 0.0;
      for (std::size_t t = 0; t < T; ++t) sum += ctx.d_[s * T + t] * weighted[t];
      ctx.reach_[i * T + s] = sum;
    }
  }

  double dsum = 0.0;
  for (std::size_t s = 0; s < T; ++s) {
    const auto ps = static_cast<double>(tile_pop[s]);
    dsum += ctx.d_[s * T + s] * ps * (ps - 1.0) / 2.0;
    for (std::size_t t = s + 1; t < T; ++t) dsum += ctx.d_[s * T + t] * ps * static_cast<double>(tile_pop[t]);
  }
  const double all_pairs = static_cast<double>(count) * static_cast<double>(count - 1) / 2.0;
  ctx.mean_d_ = all_pairs > 0.0 ? dsum / all_pairs : 0.0;
  ctx.mean_f_ = fsum / static_cast<double>(count);

  for (auto g : isolated_groups(mixing)) {
    ctx.warnings_.push_back(fmt::format("age group {} has a zero mixing row and receives no friendship edges", g));
  }
  return ctx;
}

Matrix FriendshipContext::approximate_attraction() const {
  Matrix out(groups_);
  for (std::size_t i = 0; i < groups_; ++i) {
    for (std::size_t j = 0; j < groups_; ++j) out(i, j) = mean_d_ * mean_f_ * mean_f_ * m_(i, j);
  }
  return out;
}

double FriendshipContext::expected_group_edges(std::size_t i, std::size_t j) const {
  return mu_ * static_cast<double>(node_count()) / 2.0 * mass_(i, j) / total_mass_;
}

double FriendshipContext::pair_coefficient(std::size_t i, std::size_t j, std::size_t s, std::size_t t) const {
  const double a = a_(i, j);
  if (a <= 0.0 || mass_(i, j) <= 0.0) return 0.0;
  return mu_ * static_cast<double>(node_count()) / 2.0 * (mass_(i, j) / total_mass_) * kernel(s, t) / a;
}

std::vector<Block> FriendshipContext::blocks() const {
  const auto T = tiles_.size();
  const auto cells = static_cast<std::uint32_t>(groups_ * T);
  std::vector<std::uint32_t> nonempty;
  for (std::uint32_t c = 0; c < cells; ++c) {
    if (cell_offsets_[c + 1] > cell_offsets_[c]) nonempty.push_back(c);
  }
  std::vector<Block> out;
  for (std::size_t x = 0; x < nonempty.size(); ++x) {
    for (std::size_t y = x; y < nonempty.size(); ++y) {
      const auto a = nonempty[x];
      const auto b = nonempty[y];
      const auto na = cell_offsets_[a + 1] - cell_offsets_[a];
      const auto nb = cell_offsets_[b + 1] - cell_offsets_[b];
      Block blk{a, b, a == b ? na * (na - 1) / 2 : na * nb, 0.0, 0.0};
      if (blk.pairs == 0) continue;
      blk.c = pair_coefficient(a / T, b / T, a % T, b % T);
      if (blk.c == 0.0) continue;
      blk.bound = blk.c * cell_fmax_[a] * (a == b ? cell_fsecond_[a] : cell_fmax_[b]);
      out.push_back(blk);
    }
  }
  return out;
}

double FriendshipContext::edge_probability(PersonId u, PersonId v) const {
  if (u >= node_count() || v >= node_count()) {
    fail(ErrorKind::InvalidIndex, fmt::format("pair ({}, {}) outside [0, {})", u, v, node_count()));
  }
  if (u == v) fail(ErrorKind::InvalidParameter, "edge probability needs two distinct vertices");
  if (u > v) std::swap(u, v);
  const double p =
      pair_coefficient(group_[u], group_[v], local_tile_[u], local_tile_[v]) * fitness_[u] * fitness_[v];
  if (p > 1.0) {
    fail(ErrorKind::Feasibility,
         fmt::format("Pr[{}, {}] = {} exceeds 1; mu = {} is above the feasible bound {}", u, v, p, mu_,
                     max_feasible_mu()));
  }
  return p;
}

double FriendshipContext::expected_degree(PersonId u) const {
  if (u >= node_count()) fail(ErrorKind::InvalidIndex, fmt::format("vertex {} outside [0, {})", u, node_count()));
  const auto T = tiles_.size();
  const auto g = group_[u];
  const auto s = local_tile_[u];
  const double f = fitness_[u];
  double self = 0.0;
  if (a_(g, g) > 0.0) self = f * f * kernel(s, s) * mass_(g, g) / a_(g, g);
  return mu_ * static_cast<double>(node_count()) / (2.0 * total_mass_) * (f * reach_[g * T + s] - self);
}

std::vector<double> FriendshipContext::expected_degrees() const {
  std::vector<double> out(node_count());
  for (PersonId u = 0; u < node_count(); ++u) out[u] = expected_degree(u);
  return out;
}

double FriendshipContext::max_feasible_mu() const {
  // blocks() drops every block when mu = 0; scan with a unit mu then.
  if (mu_ == 0.0) {
    FriendshipContext unit = *this;
    unit.mu_ = 1.0;
    return unit.max_feasible_mu();
  }
  const auto T = tiles_.size();
  const double half_n = static_cast<double>(node_count()) / 2.0;
  double worst = 0.0;
  for (const auto& blk : blocks()) {
    const auto i = blk.a / T;
    const auto j = blk.b / T;
    const double amax = kernel(blk.a % T, blk.b % T) * cell_fmax_[blk.a] *
                        (blk.a == blk.b ? cell_fsecond_[blk.a] : cell_fmax_[blk.b]);
    worst = std::max(worst, half_n * (mass_(i, j) / total_mass_) * amax / a_(i, j));
  }
  return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

double validate_mu(const FriendshipContext& ctx) {
  const double bound = ctx.max_feasible_mu();
  if (ctx.mu() > bound * (1.0 + 1e-12)) {
    fail(ErrorKind::Feasibility,
         fmt::format("mu = {} exceeds the largest feasible value {}; some pair probability would exceed 1",
                     ctx.mu(), bound));
  }
  return bound;
}

namespace {

// k-th pair (x < y) of the triangular enumeration ordered by y.
std::pair<std::uint64_t, std::uint64_t> triangular_pair(std::uint64_t k) {
  auto y = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
  while (y * (y - 1) / 2 > k) --y;
  while ((y + 1) * y / 2 <= k) ++y;
  return {k - y * (y - 1) / 2, y};
}

}  // namespace

EdgeSet sample_friendship_edges(const FriendshipContext& ctx, std::uint64_t seed) {
  EdgeSet out{Layer::Friendship, {}};
  if (ctx.mu() == 0.0) return out;
  const auto blocks = ctx.blocks();
  for (const auto& blk : blocks) {
    if (blk.bound > 1.0 + 1e-12) {
      fail(ErrorKind::Feasibility,
           fmt::format("a block bound of {} exceeds 1; mu = {} is above the feasible bound {}", blk.bound,
                       ctx.mu(), ctx.max_feasible_mu()));
    }
  }
  const auto cells = static_cast<std::uint64_t>(ctx.group_count() * ctx.tile_count());
  const auto block_count = static_cast<std::int64_t>(blocks.size());
  std::vector<std::vector<Edge>> partial;

#pragma omp parallel
  {
    std::vector<Edge> local;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t bi = 0; bi < block_count; ++bi) {
      const auto& blk = blocks[bi];
      const double bound = std::min(1.0, blk.bound);
      const auto ma = ctx.cell_members(blk.a);
      const auto mb = ctx.cell_members(blk.b);
      Philox4x32 eng(seed, stream_id(StreamDomain::Friendship, blk.a * cells + blk.b));
      const double log_q = std::log1p(-bound);
      std::uint64_t next = 0;
      for (;;) {
        if (bound < 1.0) {
          const double skip = std::floor(std::log(uniform_open_closed(eng)) / log_q);
          if (skip >= static_cast<double>(blk.pairs - next)) break;
          next += static_cast<std::uint64_t>(skip);
        }
        if (next >= blk.pairs) break;
        PersonId u;
        PersonId v;
        if (blk.a == blk.b) {
          const auto [x, y] = triangular_pair(next);
          u = ma[x];
          v = ma[y];
        } else {
          u = ma[next / mb.size()];
          v = mb[next % mb.size()];
        }
        const double p = blk.c * ctx.fitness_[u] * ctx.fitness_[v];
        if (uniform01(eng) * bound < p) local.push_back({std::min(u, v), std::max(u, v)});
        ++next;
      }
    }
#pragma omp critical
    partial.push_back(std::move(local));
  }
  std::size_t total = 0;
  for (const auto& p : partial) total += p.size();
  out.edges.reserve(total);
  for (auto& p : partial) out.edges.insert(out.edges.end(), p.begin(), p.end());
  out.canonicalize();
  return out;
}

}  // namespace urbangraph
