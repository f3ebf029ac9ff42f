#include "fairdiff/popularity.hpp"

#include <algorithm>
#include <numeric>

#include "fairdiff/error.hpp"

namespace fairdiff::data {

namespace {

// Item ids ordered by descending train count, ties by ascending id.
std::vector<std::uint32_t> popularity_order(std::span<const std::uint32_t> counts) {
  std::vector<std::uint32_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  return order;
}

}  // namespace

std::vector<PopBin> popularity_bins(std::span<const std::uint32_t> counts) {
  if (counts.size() < 3) throw DataError("popularity_bins: catalog has fewer than 3 items");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) throw DataError("popularity_bins: empty train matrix");

  const std::vector<std::uint32_t> order = popularity_order(counts);
  std::vector<PopBin> bins(counts.size(), PopBin::Mid);

  // HighPop: most popular items until their mass first reaches 20%,
  // including the crossing item.
  std::size_t high_end = 0;
  double mass = 0.0;
  while (high_end < order.size() && mass < 0.2 * total) {
    mass += counts[order[high_end]];
    bins[order[high_end]] = PopBin::High;
    ++high_end;
  }
  // LowPop mirrors from the bottom, never overwriting HighPop.
  std::size_t low_begin = order.size();
  mass = 0.0;
  while (low_begin > high_end && mass < 0.2 * total) {
    --low_begin;
    mass += counts[order[low_begin]];
    bins[order[low_begin]] = PopBin::Low;
  }
  return bins;
}

std::vector<std::uint8_t> tail_mask(std::span<const std::uint32_t> counts) {
  if (counts.size() < 3) throw DataError("tail_mask: catalog has fewer than 3 items");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) throw DataError("tail_mask: empty train matrix");

  const std::vector<std::uint32_t> order = popularity_order(counts);
  std::vector<std::uint8_t> tail(counts.size(), 1);
  double mass = 0.0;
  for (std::uint32_t item : order) {
    if (mass >= 0.8 * total) break;
    mass += counts[item];
    tail[item] = 0;  // head item (the one crossing 80% stays in the head)
  }
  return tail;
}

Triple history_distribution(const InteractionDataset& ds, std::uint32_t user,
                            std::span<const PopBin> bins) {
  const std::vector<std::uint32_t>& items = ds.train(user);
  if (items.empty())
    throw InvalidInput("history_distribution: user " + std::to_string(user) +
                       " has no train interactions");
  Triple h = {0.0, 0.0, 0.0};
  for (std::uint32_t i : items) h[static_cast<std::size_t>(bins[i])] += 1.0;
  const double n = static_cast<double>(items.size());
  for (double& v : h) v /= n;
  return h;
}

std::vector<double> PopularityProfile::tail_mask_real() const {
  std::vector<double> m(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) m[i] = tail[i] ? 1.0 : 0.0;
  return m;
}

double PopularityProfile::tail_item_fraction() const {
  if (tail.empty()) return 0.0;
  double n = 0.0;
  for (std::uint8_t t : tail) n += t;
  return n / static_cast<double>(tail.size());
}

std::array<std::size_t, 3> PopularityProfile::bin_sizes() const {
  std::array<std::size_t, 3> sizes = {0, 0, 0};
  for (PopBin b : bin) ++sizes[static_cast<std::size_t>(b)];
  return sizes;
}

Triple PopularityProfile::mean_history(std::span<const std::uint32_t> users) const {
  if (users.empty()) throw InvalidInput("mean_history: empty batch");
  Triple mean = {0.0, 0.0, 0.0};
  for (std::uint32_t u : users) {
    if (!has_history[u])
      throw InvalidInput("mean_history: user " + std::to_string(u) + " has no history");
    for (std::size_t c = 0; c < 3; ++c) mean[c] += history[u][c];
  }
  for (double& v : mean) v /= static_cast<double>(users.size());
  return mean;
}

PopularityProfile build_popularity_profile(const InteractionDataset& ds) {
  PopularityProfile profile;
  profile.train_count = ds.train_item_counts();
  profile.bin = popularity_bins(profile.train_count);
  profile.tail = tail_mask(profile.train_count);
  profile.history.resize(ds.num_users(), Triple{0.0, 0.0, 0.0});
  profile.has_history.assign(ds.num_users(), 0);
  for (std::uint32_t u = 0; u < ds.num_users(); ++u) {
    if (ds.train(u).empty()) continue;  // flagged, excluded from batches
    profile.history[u] = history_distribution(ds, u, profile.bin);
    profile.has_history[u] = 1;
  }
  return profile;
}

}  // namespace fairdiff::data
