#include "fairdiff/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <unordered_map>

#include "fairdiff/error.hpp"

namespace fairdiff::data {

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::vector<RawEvent> load_interactions(const std::filesystem::path& path,
                                        const FormatSpec& fmt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open interaction file: " + path.string());

  std::vector<RawEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line, fmt.delimiter);
    if (fields.size() < 3 || fields.size() > 4)
      throw DataError(path.string() + ": parse error at line " + std::to_string(lineno) +
                      ": expected 3 or 4 fields, got " + std::to_string(fields.size()));
    RawEvent ev;
    ev.user = fields[0];
    ev.item = fields[1];
    if (ev.user.empty() || ev.item.empty() || !parse_double(fields[2], ev.ts))
      throw DataError(path.string() + ": parse error at line " + std::to_string(lineno));
    if (fields.size() == 4) {
      if (!parse_double(fields[3], ev.weight))
        throw DataError(path.string() + ": parse error at line " +
                        std::to_string(lineno) + ": bad weight");
    }
    if (ev.weight >= fmt.min_weight) events.push_back(std::move(ev));
  }
  if (events.empty())
    throw DataError(path.string() + ": no events (empty file or all below weight threshold)");
  return events;
}

std::vector<RawEvent> dedup(std::vector<RawEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.item != b.item) return a.item < b.item;
    return a.ts < b.ts;
  });
  std::vector<RawEvent> out;
  out.reserve(events.size());
  for (RawEvent& ev : events) {
    if (!out.empty() && out.back().user == ev.user && out.back().item == ev.item) continue;
    out.push_back(std::move(ev));
  }
  return out;
}

std::vector<RawEvent> kcore(std::vector<RawEvent> events, std::size_t k) {
  if (k < 1) throw InvalidInput("kcore: k must be >= 1");
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::string, std::size_t> udeg, ideg;
    for (const RawEvent& ev : events) {
      ++udeg[ev.user];
      ++ideg[ev.item];
    }
    std::vector<RawEvent> kept;
    kept.reserve(events.size());
    for (RawEvent& ev : events) {
      if (udeg[ev.user] >= k && ideg[ev.item] >= k)
        kept.push_back(std::move(ev));
      else
        changed = true;
    }
    events = std::move(kept);
    if (events.empty())
      throw DataError("k-core filtering with k=" + std::to_string(k) +
                      " eliminated every event");
  }
  return events;
}

std::vector<RawEvent> dedup_and_kcore(std::vector<RawEvent> events, std::size_t k) {
  return kcore(dedup(std::move(events)), k);
}

std::size_t InteractionDataset::num_interactions() const {
  // splits partition each user's events, and they survive reloads
  std::size_t n = 0;
  for (std::size_t u = 0; u < train_.size(); ++u)
    n += train_[u].size() + val_[u].size() + test_[u].size();
  return n;
}

double InteractionDataset::sparsity_pct() const {
  return dataset_stats(num_users(), num_items(), num_interactions()).sparsity_pct;
}

std::vector<double> InteractionDataset::train_row(std::uint32_t u) const {
  std::vector<double> row(num_items(), 0.0);
  for (std::uint32_t i : train_[u]) row[i] = 1.0;
  return row;
}

std::vector<std::uint32_t> InteractionDataset::train_item_counts() const {
  std::vector<std::uint32_t> counts(num_items(), 0);
  for (const auto& items : train_)
    for (std::uint32_t i : items) ++counts[i];
  return counts;
}

InteractionDataset InteractionDataset::from_parts(
    std::vector<std::string> user_ids, std::vector<std::string> item_ids,
    std::vector<std::vector<Event>> events, std::vector<std::vector<std::uint32_t>> train,
    std::vector<std::vector<std::uint32_t>> val,
    std::vector<std::vector<std::uint32_t>> test) {
  const std::size_t n = user_ids.size();
  if (events.size() != n || train.size() != n || val.size() != n || test.size() != n)
    throw InvalidInput("InteractionDataset::from_parts: per-user arrays disagree");
  InteractionDataset ds;
  ds.user_ids_ = std::move(user_ids);
  ds.item_ids_ = std::move(item_ids);
  ds.events_ = std::move(events);
  ds.train_ = std::move(train);
  ds.val_ = std::move(val);
  ds.test_ = std::move(test);
  return ds;
}

InteractionDataset chrono_split(const std::vector<RawEvent>& events, double r_train,
                                double r_val) {
  if (events.empty()) throw DataError("chrono_split: no events");
  if (!(r_train > 0.0) || r_val < 0.0 || r_train + r_val >= 1.0)
    throw InvalidInput("chrono_split: invalid ratios");

  // Dense ids in order of first appearance; dropped entities never enter.
  std::unordered_map<std::string, std::uint32_t> umap, imap;
  std::vector<std::string> user_ids, item_ids;
  std::vector<std::vector<Event>> per_user;
  for (const RawEvent& ev : events) {
    auto [uit, unew] = umap.try_emplace(ev.user, static_cast<std::uint32_t>(user_ids.size()));
    if (unew) {
      user_ids.push_back(ev.user);
      per_user.emplace_back();
    }
    auto [iit, inew] = imap.try_emplace(ev.item, static_cast<std::uint32_t>(item_ids.size()));
    if (inew) item_ids.push_back(ev.item);
    per_user[uit->second].push_back({uit->second, iit->second, ev.ts});
  }

  const std::size_t num_users = user_ids.size();
  std::vector<std::vector<std::uint32_t>> train(num_users), val(num_users), test(num_users);
  std::vector<std::uint8_t> keep(num_users, 1);
  for (std::size_t u = 0; u < num_users; ++u) {
    std::vector<Event>& evs = per_user[u];
    std::sort(evs.begin(), evs.end(), [](const Event& a, const Event& b) {
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.item < b.item;  // deterministic tie break
    });
    const std::size_t n = evs.size();
    const auto n_train = static_cast<std::size_t>(r_train * static_cast<double>(n));
    const auto n_val = static_cast<std::size_t>(r_val * static_cast<double>(n));
    if (n_train == 0) {
      keep[u] = 0;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_train)
        train[u].push_back(evs[i].item);
      else if (i < n_train + n_val)
        val[u].push_back(evs[i].item);
      else
        test[u].push_back(evs[i].item);
    }
    std::sort(train[u].begin(), train[u].end());
    std::sort(val[u].begin(), val[u].end());
    std::sort(test[u].begin(), test[u].end());
  }

  // Compact away dropped users (those without a train event).
  std::vector<std::string> kept_users;
  std::vector<std::vector<Event>> kept_events;
  std::vector<std::vector<std::uint32_t>> kept_train, kept_val, kept_test;
  for (std::size_t u = 0; u < num_users; ++u) {
    if (!keep[u]) continue;
    const auto nu = static_cast<std::uint32_t>(kept_users.size());
    kept_users.push_back(user_ids[u]);
    for (Event& ev : per_user[u]) ev.user = nu;
    kept_events.push_back(std::move(per_user[u]));
    kept_train.push_back(std::move(train[u]));
    kept_val.push_back(std::move(val[u]));
    kept_test.push_back(std::move(test[u]));
  }
  if (kept_users.empty()) throw DataError("chrono_split: every user was dropped");

  return InteractionDataset::from_parts(std::move(kept_users), std::move(item_ids),
                                        std::move(kept_events), std::move(kept_train),
                                        std::move(kept_val), std::move(kept_test));
}

DatasetStats dataset_stats(const InteractionDataset& ds) {
  return dataset_stats(ds.num_users(), ds.num_items(), ds.num_interactions());
}

DatasetStats dataset_stats(std::size_t users, std::size_t items, std::size_t interactions) {
  DatasetStats s;
  s.users = users;
  s.items = items;
  s.interactions = interactions;
  const double cells = static_cast<double>(users) * static_cast<double>(items);
  s.sparsity_pct = cells > 0.0
                       ? 100.0 * (1.0 - static_cast<double>(interactions) / cells)
                       : 0.0;
  return s;
}

}  // namespace fairdiff::data
