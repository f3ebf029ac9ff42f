#include "fairdiff/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>

#include "fairdiff/error.hpp"

namespace fairdiff::data {

namespace {

const char* bin_name(PopBin b) {
  switch (b) {
    case PopBin::High: return "high";
    case PopBin::Mid: return "mid";
    case PopBin::Low: return "low";
  }
  return "mid";
}

PopBin bin_from_name(const std::string& s, const std::string& ctx) {
  if (s == "high") return PopBin::High;
  if (s == "mid") return PopBin::Mid;
  if (s == "low") return PopBin::Low;
  throw DataError(ctx + ": unknown popularity bin '" + s + "'");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);  // binary: identical bytes on every platform
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  return in;
}

void write_split(const std::filesystem::path& p, const InteractionDataset& ds,
                 const std::vector<std::uint32_t>& (InteractionDataset::*split)(
                     std::uint32_t) const) {
  std::ofstream out = open_out(p);
  for (std::uint32_t u = 0; u < ds.num_users(); ++u)
    for (std::uint32_t i : (ds.*split)(u)) out << u << '\t' << i << '\n';
}

std::vector<std::vector<std::uint32_t>> read_split(const std::filesystem::path& p,
                                                   std::size_t num_users,
                                                   std::size_t num_items) {
  std::ifstream in = open_in(p);
  std::vector<std::vector<std::uint32_t>> rows(num_users);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::uint32_t u = 0, i = 0;
    const char* s = line.data();
    const char* e = s + line.size();
    auto r1 = std::from_chars(s, e, u);
    if (r1.ec != std::errc() || r1.ptr == e || *r1.ptr != '\t')
      throw DataError(p.string() + ": parse error at line " + std::to_string(lineno));
    auto r2 = std::from_chars(r1.ptr + 1, e, i);
    if (r2.ec != std::errc() || r2.ptr != e)
      throw DataError(p.string() + ": parse error at line " + std::to_string(lineno));
    if (u >= num_users || i >= num_items)
      throw DataError(p.string() + ": id out of range at line " + std::to_string(lineno));
    rows[u].push_back(i);
  }
  return rows;
}

}  // namespace

void save_dataset(const PreparedDataset& prepared, const std::filesystem::path& dir) {
  const InteractionDataset& ds = prepared.dataset;
  const PopularityProfile& profile = prepared.profile;
  std::filesystem::create_directories(dir);

  {
    std::ofstream out = open_out(dir / "mapping.tsv");
    for (std::uint32_t u = 0; u < ds.num_users(); ++u)
      out << "U\t" << ds.user_label(u) << '\t' << u << '\n';
    for (std::uint32_t i = 0; i < ds.num_items(); ++i)
      out << "I\t" << ds.item_label(i) << '\t' << i << '\n';
  }
  write_split(dir / "train.tsv", ds, &InteractionDataset::train);
  write_split(dir / "val.tsv", ds, &InteractionDataset::val);
  write_split(dir / "test.tsv", ds, &InteractionDataset::test);
  {
    std::ofstream out = open_out(dir / "popularity.tsv");
    for (std::uint32_t i = 0; i < ds.num_items(); ++i)
      out << i << '\t' << profile.train_count[i] << '\t' << bin_name(profile.bin[i])
          << '\t' << static_cast<int>(profile.tail[i]) << '\n';
  }
  {
    const DatasetStats stats = dataset_stats(ds);
    char sparsity[32];
    std::snprintf(sparsity, sizeof(sparsity), "%.2f", stats.sparsity_pct);
    std::ofstream out = open_out(dir / "stats.tsv");
    out << "users\t" << stats.users << '\n'
        << "items\t" << stats.items << '\n'
        << "interactions\t" << stats.interactions << '\n'
        << "sparsity_pct\t" << sparsity << '\n';
  }
}

PreparedDataset load_dataset(const std::filesystem::path& dir) {
  std::vector<std::string> user_ids, item_ids;
  {
    std::ifstream in = open_in(dir / "mapping.tsv");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::size_t t1 = line.find('\t');
      const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                     : line.find('\t', t1 + 1);
      if (t1 != 1 || t2 == std::string::npos)
        throw DataError("mapping.tsv: parse error at line " + std::to_string(lineno));
      const std::string orig = line.substr(2, t2 - 2);
      if (line[0] == 'U')
        user_ids.push_back(orig);
      else if (line[0] == 'I')
        item_ids.push_back(orig);
      else
        throw DataError("mapping.tsv: unknown row kind at line " + std::to_string(lineno));
    }
  }
  if (user_ids.empty() || item_ids.empty())
    throw DataError(dir.string() + ": mapping.tsv has no users or no items");

  const std::size_t U = user_ids.size(), I = item_ids.size();
  auto train = read_split(dir / "train.tsv", U, I);
  auto val = read_split(dir / "val.tsv", U, I);
  auto test = read_split(dir / "test.tsv", U, I);

  // Chronology is not persisted; events stay empty after a reload.
  std::vector<std::vector<Event>> events(U);
  InteractionDataset ds = InteractionDataset::from_parts(
      std::move(user_ids), std::move(item_ids), std::move(events), std::move(train),
      std::move(val), std::move(test));

  PopularityProfile profile = build_popularity_profile(ds);
  {
    // cross-check the persisted popularity table against the train split
    std::ifstream in = open_in(dir / "popularity.tsv");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::uint32_t item = 0, count = 0;
      char bin_buf[8] = {0};
      int tail_flag = 0;
      if (std::sscanf(line.c_str(), "%u\t%u\t%7[a-z]\t%d", &item, &count, bin_buf,
                      &tail_flag) != 4 ||
          item >= I)
        throw DataError("popularity.tsv: parse error at line " + std::to_string(lineno));
      if (profile.train_count[item] != count ||
          profile.bin[item] != bin_from_name(bin_buf, "popularity.tsv") ||
          profile.tail[item] != static_cast<std::uint8_t>(tail_flag != 0))
        throw DataError("popularity.tsv: line " + std::to_string(lineno) +
                        " disagrees with the train split");
    }
  }
  return {std::move(ds), std::move(profile)};
}

}  // namespace fairdiff::data
