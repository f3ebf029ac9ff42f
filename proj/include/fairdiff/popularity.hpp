#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fairdiff/dataset.hpp"

namespace fairdiff::data {

enum class PopBin : std::uint8_t { High = 0, Mid = 1, Low = 2 };

// Component order of every popularity triple in the codebase.
inline constexpr std::size_t kHigh = 0;
inline constexpr std::size_t kMid = 1;
inline constexpr std::size_t kLow = 2;

using Triple = std::array<double, 3>;

/// Item popularity structure computed from the train split only.
struct PopularityProfile {
  std::vector<std::uint32_t> train_count;       // per item
  std::vector<PopBin> bin;                      // per item
  std::vector<std::uint8_t> tail;               // m_tail, per item
  std::vector<Triple> history;                  // H_u, per user
  std::vector<std::uint8_t> has_history;        // per user; 0 flags empty train rows

  std::size_t num_items() const { return bin.size(); }
  std::vector<double> tail_mask_real() const;
  double tail_item_fraction() const;
  std::array<std::size_t, 3> bin_sizes() const;

  /// Mean history triple over a batch of users (all must have history).
  Triple mean_history(std::span<const std::uint32_t> users) const;
};

/// Items ordered by descending train count, ties by ascending item id.
/// The extreme bins each absorb items until their cumulative count first
/// reaches 20% of all train interactions; the crossing item is included.
std::vector<PopBin> popularity_bins(std::span<const std::uint32_t> train_count);

/// Pareto 80/20 long-tail mask: head items cumulatively cover 80% of train
/// interactions (the crossing item counts as head); the rest are tail.
std::vector<std::uint8_t> tail_mask(std::span<const std::uint32_t> train_count);

/// Proportion of the user's train interactions in each popularity bin.
/// Throws InvalidInput for users without any train interaction.
Triple history_distribution(const InteractionDataset& ds, std::uint32_t user,
                            std::span<const PopBin> bins);

PopularityProfile build_popularity_profile(const InteractionDataset& ds);

}  // namespace fairdiff::data
