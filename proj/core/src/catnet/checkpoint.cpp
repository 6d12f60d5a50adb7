#include "ctxrec/catnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace ctxrec::catnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

using nlohmann::json;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw CheckpointError("checkpoint truncated");
  return v;
}

struct RawCheckpoint {
  json header;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;
};

RawCheckpoint read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw CheckpointError(path.string() + " is not a CATNet checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(in);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw CheckpointError("checkpoint truncated");
  RawCheckpoint raw;
  try {
    raw.header = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  for (const auto& t : raw.header.at("tensors")) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    Eigen::MatrixXd m(rows, cols);
    const auto bytes = static_cast<std::streamsize>(m.size() * sizeof(double));
    if (!in.read(reinterpret_cast<char*>(m.data()), bytes)) throw CheckpointError("checkpoint truncated");
    raw.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
  }
  return raw;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const Parameters& params,
                     const std::vector<double>& loss_curve, const json& metadata) {
  json header;
  header["config"] = to_json(config);
  header["loss_curve"] = loss_curve;
  header["metadata"] = metadata;
  header["tensors"] = json::array();
  params.visit([&](const std::string& name, const Eigen::MatrixXd& m) {
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    params.visit([&](const std::string&, const Eigen::MatrixXd& m) {
      out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    });
    if (!out.flush()) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  RawCheckpoint raw = read_raw(path);
  Checkpoint ck;
  ck.config = model_config_from_json(raw.header.at("config"));
  ck.config.resolve();
  ck.loss_curve = raw.header.value("loss_curve", std::vector<double>{});
  ck.metadata = raw.header.value("metadata", json::object());

  const Backbone backbone(ck.config.backbone, ck.config.input_channels());
  ck.params = zero_parameters(ck.config, backbone);
  std::size_t i = 0;
  ck.params.visit([&](const std::string& name, Eigen::MatrixXd& m) {
    if (i >= raw.tensors.size() || raw.tensors[i].first != name) {
      throw CheckpointError("checkpoint tensor list does not match its config at " + name);
    }
    if (raw.tensors[i].second.rows() != m.rows() || raw.tensors[i].second.cols() != m.cols()) {
      throw CheckpointError("shape mismatch for " + name);
    }
    m = std::move(raw.tensors[i].second);
    ++i;
  });
  if (i != raw.tensors.size()) throw CheckpointError("checkpoint has extra tensors");
  return ck;
}

std::map<std::string, Eigen::MatrixXd> read_checkpoint_tensors(const std::filesystem::path& path) {
  std::map<std::string, Eigen::MatrixXd> out;
  for (auto& [name, m] : read_raw(path).tensors) out.emplace(name, std::move(m));
  return out;
}

std::size_t assign_tensors(Parameters& params, const std::map<std::string, Eigen::MatrixXd>& tensors,
                           const std::string& prefix) {
  std::size_t copied = 0;
  params.visit([&](const std::string& name, Eigen::MatrixXd& m) {
    if (name.rfind(prefix, 0) != 0) return;
    auto it = tensors.find(name);
    if (it == tensors.end()) return;
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw CheckpointError("shape mismatch for " + name);
    }
    m = it->second;
    ++copied;
  });
  return copied;
}

}  // namespace ctxrec::catnet
