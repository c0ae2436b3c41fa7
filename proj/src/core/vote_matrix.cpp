#include "newsgraph/core/vote_matrix.hpp"

#include <algorithm>
#include <string>

#include "newsgraph/core/errors.hpp"

namespace newsgraph {

VoteValue vote_from_int(int value) {
  if (value < -1 || value > 1) {
    throw DomainError("vote value must be -1, 0 or 1, got " + std::to_string(value));
  }
  return static_cast<VoteValue>(value);
}

namespace {

// Stable sort keeps input order among duplicates so the last one wins.
std::vector<VoteEntry> normalize(std::size_t users, std::size_t edges,
                                 std::vector<VoteEntry> entries) {
  for (const auto& e : entries) {
    if (e.user >= users || e.edge >= edges) {
      throw DomainError("vote index out of range");
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const VoteEntry& a, const VoteEntry& b) {
    return a.user != b.user ? a.user < b.user : a.edge < b.edge;
  });
  std::vector<VoteEntry> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.empty() && out.back().user == e.user && out.back().edge == e.edge) {
      out.back() = e;
    } else {
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace

VoteMatrix::VoteMatrix(std::size_t num_users, std::size_t num_edges,
                       std::vector<VoteEntry> entries)
    : num_users_(num_users), num_edges_(num_edges),
      entries_(normalize(num_users, num_edges, std::move(entries))) {
  std::vector<bool> voted(num_edges_, false);
  row_start_.assign(num_users_ + 1, 0);
  for (const auto& e : entries_) {
    voted[e.edge] = true;
    ++row_start_[e.user + 1];
  }
  for (std::size_t i = 0; i < num_users_; ++i) row_start_[i + 1] += row_start_[i];
  for (std::size_t j = 0; j < num_edges_; ++j) {
    if (!voted[j]) {
      throw DomainError("edge " + std::to_string(j) + " has no votes");
    }
  }
}

VoteMatrix::Compacted VoteMatrix::compact(std::size_t num_users, std::size_t num_edges,
                                          std::vector<VoteEntry> entries) {
  auto normalized = normalize(num_users, num_edges, std::move(entries));
  std::vector<std::uint32_t> remap(num_edges, UINT32_MAX);
  for (const auto& e : normalized) remap[e.edge] = 0;
  Compacted out;
  for (std::uint32_t j = 0; j < num_edges; ++j) {
    if (remap[j] == 0) {
      remap[j] = static_cast<std::uint32_t>(out.edge_origin.size());
      out.edge_origin.push_back(j);
    }
  }
  for (auto& e : normalized) e.edge = remap[e.edge];
  out.matrix = VoteMatrix(num_users, out.edge_origin.size(), std::move(normalized));
  return out;
}

std::span<const VoteEntry> VoteMatrix::row(std::size_t user) const {
  if (user >= num_users_) throw DomainError("user index out of range");
  return std::span<const VoteEntry>(entries_).subspan(
      row_start_[user], row_start_[user + 1] - row_start_[user]);
}

std::optional<VoteValue> VoteMatrix::at(std::size_t user, std::size_t edge) const {
  auto r = row(user);
  auto it = std::lower_bound(r.begin(), r.end(), edge,
                             [](const VoteEntry& e, std::size_t j) { return e.edge < j; });
  if (it == r.end() || it->edge != edge) return std::nullopt;
  return it->value;
}

}  // namespace newsgraph
