#include "fairdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairdiff/error.hpp"

namespace fairdiff::metrics {

namespace {

bool contains(std::span<const std::uint32_t> sorted_items, std::uint32_t item) {
  return std::binary_search(sorted_items.begin(), sorted_items.end(), item);
}

}  // namespace

RecommendationList topk_masked(std::span<const double> scores, std::size_t k,
                               std::span<const std::uint8_t> mask_history) {
  if (k < 1) throw InvalidInput("topk_masked: K must be >= 1");
  if (!mask_history.empty() && mask_history.size() != scores.size())
    throw InvalidInput("topk_masked: mask size mismatch");

  std::vector<std::uint32_t> idx;
  idx.reserve(scores.size());
  for (std::uint32_t i = 0; i < scores.size(); ++i)
    if (mask_history.empty() || !mask_history[i]) idx.push_back(i);

  RecommendationList list;
  const std::size_t take = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take),
                    idx.end(), [&](std::uint32_t a, std::uint32_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(take);
  list.items = std::move(idx);
  list.truncated = take < k;
  return list;
}

double ndcg_user(const RecommendationList& list, std::span<const std::uint32_t> test_items,
                 std::size_t k) {
  if (test_items.empty()) throw InvalidInput("ndcg_user: empty test set");
  const std::size_t depth = std::min(k, list.items.size());
  double dcg = 0.0;
  for (std::size_t p = 0; p < depth; ++p) {
    if (contains(test_items, list.items[p]))
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  const std::size_t ideal = std::min(k, test_items.size());
  double idcg = 0.0;
  for (std::size_t p = 0; p < ideal; ++p)
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

double recall_user(const RecommendationList& list,
                   std::span<const std::uint32_t> test_items, std::size_t k) {
  if (test_items.empty()) throw InvalidInput("recall_user: empty test set");
  const std::size_t depth = std::min(k, list.items.size());
  std::size_t hits = 0;
  for (std::size_t p = 0; p < depth; ++p)
    if (contains(test_items, list.items[p])) ++hits;
  return static_cast<double>(hits) /
         static_cast<double>(std::min(k, test_items.size()));
}

double aplt_user(const RecommendationList& list, std::span<const std::uint8_t> m_tail,
                 std::size_t k) {
  const std::size_t depth = std::min(k, list.items.size());
  std::size_t tail_hits = 0;
  for (std::size_t p = 0; p < depth; ++p)
    if (m_tail[list.items[p]]) ++tail_hits;
  return static_cast<double>(tail_hits) / static_cast<double>(k);
}

double ndcg_at_k(std::span<const RecommendationList> lists,
                 std::span<const std::vector<std::uint32_t>> test_sets, std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < lists.size(); ++u) {
    if (test_sets[u].empty()) continue;
    sum += ndcg_user(lists[u], test_sets[u], k);
    ++n;
  }
  if (n == 0) throw DataError("ndcg_at_k: no user has test items");
  return sum / static_cast<double>(n);
}

double recall_at_k(std::span<const RecommendationList> lists,
                   std::span<const std::vector<std::uint32_t>> test_sets, std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < lists.size(); ++u) {
    if (test_sets[u].empty()) continue;
    sum += recall_user(lists[u], test_sets[u], k);
    ++n;
  }
  if (n == 0) throw DataError("recall_at_k: no user has test items");
  return sum / static_cast<double>(n);
}

double aplt_at_k(std::span<const RecommendationList> lists,
                 std::span<const std::uint8_t> m_tail, std::size_t k) {
  if (lists.empty()) throw InvalidInput("aplt_at_k: no lists");
  double sum = 0.0;
  for (const RecommendationList& list : lists) sum += aplt_user(list, m_tail, k);
  return sum / static_cast<double>(lists.size());
}

std::vector<std::uint64_t> exposure_counts(std::span<const RecommendationList> lists,
                                           std::size_t catalog) {
  std::vector<std::uint64_t> counts(catalog, 0);
  for (const RecommendationList& list : lists)
    for (std::uint32_t i : list.items) ++counts[i];
  return counts;
}

double delta_exp(std::span<const RecommendationList> lists,
                 std::span<const std::uint8_t> m_tail) {
  std::size_t n_head = 0, n_tail = 0;
  for (std::uint8_t t : m_tail) (t ? n_tail : n_head) += 1;
  if (n_head == 0 || n_tail == 0)
    throw DataError("delta_exp: head or tail group is empty");

  const std::vector<std::uint64_t> counts = exposure_counts(lists, m_tail.size());
  double head_total = 0.0, tail_total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    (m_tail[i] ? tail_total : head_total) += static_cast<double>(counts[i]);
  const double head_mean = head_total / static_cast<double>(n_head);
  const double tail_mean = tail_total / static_cast<double>(n_tail);
  if (head_mean + tail_mean == 0.0)
    throw DataError("delta_exp: nothing was exposed");
  return (head_mean - tail_mean) / (head_mean + tail_mean);
}

double gini_of_counts(std::span<const std::uint64_t> counts) {
  const std::size_t n = counts.size();
  if (n < 2) throw DataError("gini: catalog must have at least 2 items");
  std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = static_cast<double>(sorted[i]);
    total += e;
    weighted += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * e;
  }
  if (total == 0.0) throw DataError("gini: zero total exposure");
  return weighted / (static_cast<double>(n) * total);
}

double gini(std::span<const RecommendationList> lists, std::size_t catalog) {
  const std::vector<std::uint64_t> counts = exposure_counts(lists, catalog);
  return gini_of_counts(counts);
}

double coverage(std::span<const RecommendationList> lists, std::size_t catalog) {
  if (catalog == 0) throw InvalidInput("coverage: empty catalog");
  std::vector<std::uint8_t> seen(catalog, 0);
  for (const RecommendationList& list : lists)
    for (std::uint32_t i : list.items) seen[i] = 1;
  const auto distinct = static_cast<double>(
      std::count(seen.begin(), seen.end(), std::uint8_t{1}));
  return distinct / static_cast<double>(catalog);
}

TradeoffResult tradeoff(Direction dir, double baseline_m, double method_m,
                        double baseline_ndcg, double method_ndcg) {
  if (baseline_ndcg == 0.0) throw InvalidInput("tradeoff: baseline NDCG must be > 0");
  if (baseline_m == 0.0) throw InvalidInput("tradeoff: baseline metric must be nonzero");
  const double gain = dir == Direction::LowerBetter
                          ? (baseline_m - method_m) / baseline_m
                          : (method_m - baseline_m) / baseline_m;
  const double loss = (baseline_ndcg - method_ndcg) / baseline_ndcg;
  TradeoffResult out;
  if (loss == 0.0) {
    out.zero_accuracy_loss = true;
    out.value = std::copysign(std::numeric_limits<double>::infinity(),
                              gain == 0.0 ? 1.0 : gain);
    return out;
  }
  out.value = gain / loss;
  return out;
}

std::vector<RecommendationList> baseline_random(
    SeededRng& rng, std::span<const std::vector<std::uint8_t>> masks, std::size_t k) {
  std::vector<RecommendationList> lists(masks.size());
  for (std::size_t u = 0; u < masks.size(); ++u) {
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t i = 0; i < masks[u].size(); ++i)
      if (!masks[u][i]) eligible.push_back(i);
    const std::size_t take = std::min(k, eligible.size());
    // partial Fisher-Yates
    for (std::size_t p = 0; p < take; ++p) {
      const std::size_t j =
          p + static_cast<std::size_t>(rng.uniform_int(eligible.size() - p));
      std::swap(eligible[p], eligible[j]);
    }
    eligible.resize(take);
    lists[u].items = std::move(eligible);
    lists[u].truncated = take < k;
  }
  return lists;
}

std::vector<RecommendationList> baseline_mostpop(
    std::span<const std::uint32_t> train_counts,
    std::span<const std::vector<std::uint8_t>> masks, std::size_t k) {
  std::vector<std::uint32_t> order(train_counts.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (train_counts[a] != train_counts[b]) return train_counts[a] > train_counts[b];
    return a < b;
  });
  std::vector<RecommendationList> lists(masks.size());
  for (std::size_t u = 0; u < masks.size(); ++u) {
    for (std::uint32_t i : order) {
      if (lists[u].items.size() == k) break;
      if (!masks[u][i]) lists[u].items.push_back(i);
    }
    lists[u].truncated = lists[u].items.size() < k;
  }
  return lists;
}

}  // namespace fairdiff::metrics
