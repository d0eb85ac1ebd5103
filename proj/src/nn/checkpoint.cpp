#include "texcomp/nn/checkpoint.hpp"

#include "texcomp/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {
namespace {

constexpr char kMagic[8] = {'T', 'X', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    index.push_back({{"name", name}, {"shape", t->shape}, {"offset", offset}, {"count", t->numel()}});
    offset += t->numel();
  }
  const std::string header = nlohmann::json{{"config", config}, {"tensors", index}}.dump();
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(Errc::io_failure, "cannot write " + tmp.string());
    out.write(kMagic, 8);
    const std::uint64_t length = header.size();
    out.write(reinterpret_cast<const char*>(&length), 8);
    out.write(header.data(), std::streamsize(header.size()));
    std::vector<float> buffer;
    for (const auto& [name, t] : tensors) {
      buffer.assign(t->data.begin(), t->data.end());
      out.write(reinterpret_cast<const char*>(buffer.data()), std::streamsize(buffer.size() * 4));
    }
    if (!out) throw Error(Errc::io_failure, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, "checkpoint not found: " + path.string());
  char magic[8];
  std::uint64_t length = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&length), 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0 || length > (1u << 30))
    throw Error(Errc::io_failure, "not a checkpoint file: " + path.string());
  std::string header(length, '\0');
  in.read(header.data(), std::streamsize(length));
  const auto json = nlohmann::json::parse(header, nullptr, false);
  if (json.is_discarded() || !json.contains("tensors"))
    throw Error(Errc::io_failure, "corrupt checkpoint header: " + path.string());

  const std::streamoff payload = in.tellg();
  Checkpoint ckpt;
  ckpt.config = json.value("config", nlohmann::json::object());
  std::vector<float> buffer;
  for (const auto& entry : json["tensors"]) {
    Tensor t(entry["shape"].get<std::vector<int>>());
    const auto offset = entry["offset"].get<std::uint64_t>();
    const auto count = entry["count"].get<std::uint64_t>();
    if (count != t.numel()) throw Error(Errc::io_failure, "corrupt checkpoint tensor entry");
    buffer.resize(count);
    in.seekg(payload + std::streamoff(offset * 4));
    in.read(reinterpret_cast<char*>(buffer.data()), std::streamsize(count * 4));
    if (!in) throw Error(Errc::io_failure, "truncated checkpoint: " + path.string());
    std::copy(buffer.begin(), buffer.end(), t.data.begin());
    ckpt.tensors.emplace(entry["name"].get<std::string>(), std::move(t));
  }
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params,
                        const std::vector<Buffer*>& buffers) {
  auto restore = [&](const std::string& name, Tensor& target) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end())
      throw Error(Errc::config_mismatch, "checkpoint lacks tensor '" + name + "'");
    if (it->second.shape != target.shape)
      throw Error(Errc::config_mismatch, "checkpoint tensor '" + name + "' has shape " +
                                             shape_string(it->second.shape) + ", expected " +
                                             shape_string(target.shape));
    target.data = it->second.data;
  };
  for (Parameter* p : params) restore(p->name, p->value);
  for (Buffer* b : buffers) restore(b->name, b->value);
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
