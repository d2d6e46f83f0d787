#include "affect/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

#include "affect/errors.hpp"

namespace affect {

namespace {

constexpr char kMagic[8] = {'A', 'F', 'F', 'T', 'C', 'K', 'P', 'T'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CheckpointError("truncated checkpoint");
  return v;
}

}  // namespace

Checkpoint::Checkpoint() : meta_(std::make_unique<nlohmann::json>(nlohmann::json::object())) {}
Checkpoint::~Checkpoint() = default;
Checkpoint::Checkpoint(Checkpoint&&) noexcept = default;
Checkpoint& Checkpoint::operator=(Checkpoint&&) noexcept = default;

nlohmann::json& Checkpoint::meta() { return *meta_; }
const nlohmann::json& Checkpoint::meta() const { return *meta_; }

void Checkpoint::add(const std::string& name, const Tensor& t) {
  for (const auto& [n, _] : entries_)
    if (n == name) throw CheckpointError("duplicate tensor name: " + name);
  entries_.emplace_back(name, t);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, _] : entries_)
    if (n == name) return true;
  return false;
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw CheckpointError("missing tensor: " + name);
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kVersion);

  const std::string meta_str = meta_->dump();
  write_pod<std::uint64_t>(out, meta_str.size());
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, t] : entries_) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  if (!out) throw CheckpointError("write failed: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());

  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("not a checkpoint file: " + path.string());
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw CheckpointError("checkpoint version mismatch: file has v" +
                          std::to_string(version) + ", this build reads v" +
                          std::to_string(kVersion));

  Checkpoint ckpt;
  const auto meta_len = read_pod<std::uint64_t>(in);
  std::string meta_str(meta_len, '\0');
  in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw CheckpointError("truncated checkpoint metadata");
  *ckpt.meta_ = nlohmann::json::parse(meta_str);

  const auto count = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto ndim = read_pod<std::uint32_t>(in);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(read_pod<std::uint32_t>(in));
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!in) throw CheckpointError("truncated tensor data: " + name);
    ckpt.entries_.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

}  // namespace affect
