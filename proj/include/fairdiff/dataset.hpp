#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fairdiff::data {

/// One implicit-feedback event, ids already remapped to dense integers.
struct Event {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double ts = 0.0;
};

/// Raw event before id remapping.
struct RawEvent {
  std::string user;
  std::string item;
  double ts = 0.0;
  double weight = 1.0;
};

/// How to read a raw interaction file.
struct FormatSpec {
  char delimiter = '\t';
  /// Events with weight (play count) below this are dropped before the
  /// remaining ones collapse to binary presence.
  double min_weight = 1.0;
};

/// Parses `user<delim>item<delim>timestamp[<delim>weight]` lines.
/// Throws DataError on malformed rows (with the line number) or an empty file.
std::vector<RawEvent> load_interactions(const std::filesystem::path& path,
                                        const FormatSpec& fmt = {});

/// Drops duplicate (user, item) pairs, keeping the earliest event.
std::vector<RawEvent> dedup(std::vector<RawEvent> events);

/// Iterative k-core filter: repeatedly removes users and items with fewer
/// than k interactions until a fixed point. Throws DataError when nothing
/// survives.
std::vector<RawEvent> kcore(std::vector<RawEvent> events, std::size_t k);

std::vector<RawEvent> dedup_and_kcore(std::vector<RawEvent> events, std::size_t k);

/// Implicit-feedback dataset over dense user/item ids with per-user
/// chronological train/val/test splits.
class InteractionDataset {
 public:
  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t num_interactions() const;
  double sparsity_pct() const;

  /// Item ids per user and split, each sorted ascending.
  const std::vector<std::uint32_t>& train(std::uint32_t u) const { return train_[u]; }
  const std::vector<std::uint32_t>& val(std::uint32_t u) const { return val_[u]; }
  const std::vector<std::uint32_t>& test(std::uint32_t u) const { return test_[u]; }

  /// Events of one user in chronological order (ties by ascending item id).
  const std::vector<Event>& events(std::uint32_t u) const { return events_[u]; }

  const std::string& user_label(std::uint32_t u) const { return user_ids_[u]; }
  const std::string& item_label(std::uint32_t i) const { return item_ids_[i]; }

  /// Dense binary interaction vector over the train split.
  std::vector<double> train_row(std::uint32_t u) const;

  /// Per-item interaction counts in the train split.
  std::vector<std::uint32_t> train_item_counts() const;

  static InteractionDataset from_parts(std::vector<std::string> user_ids,
                                       std::vector<std::string> item_ids,
                                       std::vector<std::vector<Event>> events,
                                       std::vector<std::vector<std::uint32_t>> train,
                                       std::vector<std::vector<std::uint32_t>> val,
                                       std::vector<std::vector<std::uint32_t>> test);

 private:
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::vector<std::vector<Event>> events_;
  std::vector<std::vector<std::uint32_t>> train_;
  std::vector<std::vector<std::uint32_t>> val_;
  std::vector<std::vector<std::uint32_t>> test_;
};

/// Splits each user chronologically with counts floor(r_train*n) /
/// floor(r_val*n) / remainder. Equal timestamps are ordered by ascending
/// item id. Users whose train split would be empty are dropped.
InteractionDataset chrono_split(const std::vector<RawEvent>& events,
                                double r_train = 0.7, double r_val = 0.1);

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  double sparsity_pct = 0.0;
};

DatasetStats dataset_stats(const InteractionDataset& ds);
DatasetStats dataset_stats(std::size_t users, std::size_t items, std::size_t interactions);

}  // namespace fairdiff::data
