#include "fairdiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "fairdiff/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace fairdiff::train {

namespace {

constexpr char kMagic[4] = {'A', '2', 'G', 'D'};

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IncompatError(std::string("checkpoint truncated while reading ") + what);
  return value;
}

std::string read_bytes(std::istream& in, std::uint64_t n, const char* what) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw IncompatError(std::string("checkpoint truncated while reading ") + what);
  return s;
}

std::string serialize_config(const std::map<std::string, std::string>& config) {
  std::string out;
  for (const auto& [k, v] : config) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::map<std::string, std::string> parse_config_block(const std::string& text) {
  std::map<std::string, std::string> config;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw IncompatError("checkpoint config block is malformed");
    config.emplace(line.substr(0, eq), line.substr(eq + 1));
    start = end + 1;
  }
  return config;
}

}  // namespace

const Checkpoint::Block* Checkpoint::find(const std::string& name) const {
  for (const Block& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

void Checkpoint::add_net(const std::string& prefix, const num::DenseNet& net) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const num::Layer& layer = net.layers[l];
    Block w;
    w.name = prefix + "." + std::to_string(l) + ".w";
    w.rows = layer.out;
    w.cols = layer.in;
    w.data.assign(layer.w.begin(), layer.w.end());
    blocks.push_back(std::move(w));
    Block b;
    b.name = prefix + "." + std::to_string(l) + ".b";
    b.rows = layer.b.size();
    b.cols = 1;
    b.data.assign(layer.b.begin(), layer.b.end());
    blocks.push_back(std::move(b));
  }
}

num::DenseNet Checkpoint::extract_net(const std::string& prefix,
                                      const num::DenseNet& like) const {
  num::DenseNet net = like;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    num::Layer& layer = net.layers[l];
    const Block* w = find(prefix + "." + std::to_string(l) + ".w");
    const Block* b = find(prefix + "." + std::to_string(l) + ".b");
    if (!w || !b)
      throw IncompatError("checkpoint is missing parameter block " + prefix + "." +
                          std::to_string(l));
    if (w->rows != layer.out || w->cols != layer.in || b->rows != layer.b.size())
      throw IncompatError("checkpoint block " + w->name +
                          " does not match the configured architecture");
    layer.w.assign(w->data.begin(), w->data.end());
    layer.b.assign(b->data.begin(), b->data.end());
  }
  return net;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());

  out.write(kMagic, sizeof(kMagic));
  write_pod(out, ckpt.version);
  const std::string config = serialize_config(ckpt.config);
  write_pod(out, static_cast<std::uint64_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));
  write_pod(out, ckpt.epoch);
  write_pod(out, static_cast<std::uint64_t>(ckpt.val_history.size()));
  out.write(reinterpret_cast<const char*>(ckpt.val_history.data()),
            static_cast<std::streamsize>(ckpt.val_history.size() * sizeof(float)));
  write_pod(out, static_cast<std::uint32_t>(ckpt.blocks.size()));
  for (const Checkpoint::Block& b : ckpt.blocks) {
    write_pod(out, static_cast<std::uint32_t>(b.name.size()));
    out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_pod(out, b.rows);
    write_pod(out, b.cols);
    out.write(reinterpret_cast<const char*>(b.data.data()),
              static_cast<std::streamsize>(b.data.size() * sizeof(float)));
  }
  if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IncompatError("cannot open checkpoint: " + path.string());

  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IncompatError(path.string() + ": not a fairdiff checkpoint (bad magic)");

  Checkpoint ckpt;
  ckpt.version = read_pod<std::uint32_t>(in, "version");
  if (ckpt.version != kCheckpointVersion)
    throw IncompatError(path.string() + ": checkpoint version " +
                        std::to_string(ckpt.version) + ", this build reads version " +
                        std::to_string(kCheckpointVersion));

  const auto config_len = read_pod<std::uint64_t>(in, "config length");
  ckpt.config = parse_config_block(read_bytes(in, config_len, "config"));
  ckpt.epoch = read_pod<std::uint32_t>(in, "epoch");

  const auto hist_len = read_pod<std::uint64_t>(in, "history length");
  ckpt.val_history.resize(hist_len);
  in.read(reinterpret_cast<char*>(ckpt.val_history.data()),
          static_cast<std::streamsize>(hist_len * sizeof(float)));
  if (!in) throw IncompatError("checkpoint truncated while reading history");

  const auto n_blocks = read_pod<std::uint32_t>(in, "block count");
  ckpt.blocks.resize(n_blocks);
  for (Checkpoint::Block& b : ckpt.blocks) {
    const auto name_len = read_pod<std::uint32_t>(in, "block name length");
    b.name = read_bytes(in, name_len, "block name");
    b.rows = read_pod<std::uint64_t>(in, "block rows");
    b.cols = read_pod<std::uint64_t>(in, "block cols");
    b.data.resize(b.rows * b.cols);
    in.read(reinterpret_cast<char*>(b.data.data()),
            static_cast<std::streamsize>(b.data.size() * sizeof(float)));
    if (!in) throw IncompatError("checkpoint truncated while reading block " + b.name);
  }
  // trailing bytes mean a different/corrupt layout
  in.peek();
  if (!in.eof())
    throw IncompatError(path.string() + ": trailing bytes after checkpoint payload");
  return ckpt;
}

}  // namespace fairdiff::train
