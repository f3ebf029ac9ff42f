#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairdiff/dataset.hpp"
#include "fairdiff/rng.hpp"

namespace fairdiff::metrics {

/// Ranked recommendation slate for one user.
struct RecommendationList {
  std::vector<std::uint32_t> items;  // best first, history excluded
  bool truncated = false;            // fewer eligible items than K
};

/// Highest-K unmasked scores, ties broken by ascending item id. A shorter,
/// flagged list is returned when fewer than K items are eligible.
RecommendationList topk_masked(std::span<const double> scores, std::size_t k,
                               std::span<const std::uint8_t> mask_history);

// ---- per-list primitives -------------------------------------------------

/// Binary-relevance NDCG with DCG = sum over hits of 1/log2(pos+1) and the
/// ideal over min(K, |test|) positions. Users without test items have no value.
double ndcg_user(const RecommendationList& list, std::span<const std::uint32_t> test_items,
                 std::size_t k);

double recall_user(const RecommendationList& list,
                   std::span<const std::uint32_t> test_items, std::size_t k);

double aplt_user(const RecommendationList& list, std::span<const std::uint8_t> m_tail,
                 std::size_t k);

// ---- aggregates over evaluated users --------------------------------------

double ndcg_at_k(std::span<const RecommendationList> lists,
                 std::span<const std::vector<std::uint32_t>> test_sets, std::size_t k);

double recall_at_k(std::span<const RecommendationList> lists,
                   std::span<const std::vector<std::uint32_t>> test_sets, std::size_t k);

double aplt_at_k(std::span<const RecommendationList> lists,
                 std::span<const std::uint8_t> m_tail, std::size_t k);

/// Per-item exposure counts over all lists (full catalog, zeros included).
std::vector<std::uint64_t> exposure_counts(std::span<const RecommendationList> lists,
                                           std::size_t catalog);

/// Normalized disparity of the mean per-item exposure between head and tail:
/// (E_head - E_tail) / (E_head + E_tail). Throws DataError when either group
/// is empty or nothing was exposed.
double delta_exp(std::span<const RecommendationList> lists,
                 std::span<const std::uint8_t> m_tail);

/// Gini index of the exposure-count vector over the full catalog.
double gini(std::span<const RecommendationList> lists, std::size_t catalog);
double gini_of_counts(std::span<const std::uint64_t> counts);

double coverage(std::span<const RecommendationList> lists, std::size_t catalog);

// ---- fairness/accuracy trade-off ------------------------------------------

enum class Direction { LowerBetter, HigherBetter };

struct TradeoffResult {
  double value = 0.0;
  bool zero_accuracy_loss = false;  // value is a signed-infinity sentinel
};

/// T_m = fairness gain / accuracy loss, both relative to the baseline.
/// Gains are oriented so that an improvement is positive.
TradeoffResult tradeoff(Direction dir, double baseline_m, double method_m,
                        double baseline_ndcg, double method_ndcg);

// ---- reference recommenders -----------------------------------------------

/// K distinct unmasked items drawn uniformly per user.
std::vector<RecommendationList> baseline_random(
    SeededRng& rng, std::span<const std::vector<std::uint8_t>> masks, std::size_t k);

/// Items ranked by train count (ties by ascending id), masked per user.
std::vector<RecommendationList> baseline_mostpop(
    std::span<const std::uint32_t> train_counts,
    std::span<const std::vector<std::uint8_t>> masks, std::size_t k);

// ---- report ----------------------------------------------------------------

struct MetricsRow {
  std::size_t k = 0;
  double ndcg = 0.0;
  double recall = 0.0;
  double aplt = 0.0;
  double delta_exp = 0.0;
  double gini = 0.0;
  double coverage = 0.0;
};

struct MetricsReport {
  std::string model;
  std::vector<MetricsRow> rows;  // one per cutoff
  /// Per-user vectors at the reporting cutoff, for significance analysis
  /// downstream. Users without test items carry no entry.
  std::vector<std::uint32_t> user_ids;
  std::vector<double> ndcg_per_user;
  std::vector<double> aplt_per_user;
};

}  // namespace fairdiff::metrics
