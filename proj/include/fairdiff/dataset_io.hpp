#pragma once

#include <filesystem>

#include "fairdiff/dataset.hpp"
#include "fairdiff/popularity.hpp"

namespace fairdiff::data {

/// Prepared dataset on disk:
///   mapping.tsv     U|I <TAB> original id <TAB> dense id
///   train.tsv …     dense user <TAB> dense item (ascending item id within user)
///   popularity.tsv  item <TAB> train count <TAB> bin <TAB> tail flag
///   stats.tsv       users / items / interactions / sparsity_pct
struct PreparedDataset {
  InteractionDataset dataset;
  PopularityProfile profile;
};

void save_dataset(const PreparedDataset& prepared, const std::filesystem::path& dir);

/// Loads a directory written by save_dataset. Throws DataError on missing
/// or inconsistent files.
PreparedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace fairdiff::data
