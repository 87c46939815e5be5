#include "kgrl/a3c/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace kgrl::a3c {

namespace {

constexpr char kMagic[6] = {'K', 'G', 'A', '3', 'C', '\x01'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::istream& in, const std::string& what) {
  U v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(U))) {
    throw CheckpointError("checkpoint truncated while reading " + what);
  }
  return v;
}

std::string agent_header(const policy::AgentConfig& a, std::int64_t step) {
  std::ostringstream os;
  os.precision(17);
  os << "step=" << step << '\n'
     << "n_joints=" << a.n_joints << '\n'
     << "actions_per_joint=" << a.actions_per_joint << '\n'
     << "kge_dim=" << a.kge_dim << '\n'
     << "image_size=" << a.image_size << '\n'
     << "conv1_channels=" << a.conv1_channels << '\n'
     << "conv1_kernel=" << a.conv1_kernel << '\n'
     << "conv1_stride=" << a.conv1_stride << '\n'
     << "conv2_channels=" << a.conv2_channels << '\n'
     << "conv2_kernel=" << a.conv2_kernel << '\n'
     << "conv2_stride=" << a.conv2_stride << '\n'
     << "fc_width=" << a.fc_width << '\n'
     << "lstm_hidden=" << a.lstm_hidden << '\n'
     << "conv_gain=" << a.conv_gain << '\n'
     << "lstm_gain=" << a.lstm_gain << '\n'
     << "actor_gain=" << a.actor_gain << '\n'
     << "critic_gain=" << a.critic_gain << '\n';
  return os.str();
}

void parse_header(const std::string& text, Checkpoint& ckpt) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CheckpointError("malformed checkpoint header line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError(std::string("checkpoint header lacks '") + key + "'");
    return it->second;
  };
  auto& a = ckpt.agent;
  try {
    ckpt.step = std::stoll(field("step"));
    a.n_joints = std::stoull(field("n_joints"));
    a.actions_per_joint = std::stoull(field("actions_per_joint"));
    a.kge_dim = std::stoull(field("kge_dim"));
    a.image_size = std::stoull(field("image_size"));
    a.conv1_channels = std::stoull(field("conv1_channels"));
    a.conv1_kernel = std::stoull(field("conv1_kernel"));
    a.conv1_stride = std::stoull(field("conv1_stride"));
    a.conv2_channels = std::stoull(field("conv2_channels"));
    a.conv2_kernel = std::stoull(field("conv2_kernel"));
    a.conv2_stride = std::stoull(field("conv2_stride"));
    a.fc_width = std::stoull(field("fc_width"));
    a.lstm_hidden = std::stoull(field("lstm_hidden"));
    a.conv_gain = std::stod(field("conv_gain"));
    a.lstm_gain = std::stod(field("lstm_gain"));
    a.actor_gain = std::stod(field("actor_gain"));
    a.critic_gain = std::stod(field("critic_gain"));
  } catch (const std::logic_error& e) {
    throw CheckpointError(std::string("invalid checkpoint header value: ") + e.what());
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    const std::string header = agent_header(checkpoint.agent, checkpoint.step);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.blocks.size()));
    std::uint64_t offset = 0;
    for (const auto& b : checkpoint.blocks) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
      out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(b.shape.size()));
      for (std::size_t d : b.shape) put<std::uint64_t>(out, d);
      put<std::uint64_t>(out, offset);
      offset += b.values.size();
    }
    put<std::uint64_t>(out, offset);
    for (const auto& b : checkpoint.blocks) {
      out.write(reinterpret_cast<const char*>(b.values.data()),
                static_cast<std::streamsize>(b.values.size() * sizeof(float)));
    }
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic)) throw CheckpointError("checkpoint truncated while reading magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path.string() + " is not a KGA3C v1 checkpoint (bad magic or version)");
  }
  Checkpoint ckpt;
  const auto header_len = get<std::uint32_t>(in, "header length");
  if (header_len > (1u << 20)) throw CheckpointError("checkpoint header length is implausible");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), header_len)) throw CheckpointError("checkpoint truncated in header");
  parse_header(header, ckpt);

  const auto count = get<std::uint32_t>(in, "tensor count");
  if (count > 4096) throw CheckpointError("checkpoint tensor count is implausible");
  std::vector<std::uint64_t> offsets;
  for (std::uint32_t i = 0; i < count; ++i) {
    ParameterBlock b;
    const auto name_len = get<std::uint32_t>(in, "tensor name length");
    if (name_len > 4096) throw CheckpointError("checkpoint tensor name length is implausible");
    b.name.resize(name_len);
    if (!in.read(b.name.data(), name_len)) throw CheckpointError("checkpoint truncated in tensor name");
    const auto rank = get<std::uint32_t>(in, "tensor rank");
    if (rank > 8) throw CheckpointError("checkpoint tensor rank is implausible");
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      b.shape.push_back(get<std::uint64_t>(in, "tensor shape"));
      n *= b.shape.back();
    }
    offsets.push_back(get<std::uint64_t>(in, "tensor offset"));
    b.values.resize(n);
    ckpt.blocks.push_back(std::move(b));
  }
  const auto total = get<std::uint64_t>(in, "data length");
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < ckpt.blocks.size(); ++i) {
    if (offsets[i] != expected) throw CheckpointError("checkpoint manifest offsets are inconsistent");
    expected += ckpt.blocks[i].values.size();
  }
  if (total != expected) throw CheckpointError("checkpoint data length disagrees with manifest");
  for (auto& b : ckpt.blocks) {
    if (!in.read(reinterpret_cast<char*>(b.values.data()),
                 static_cast<std::streamsize>(b.values.size() * sizeof(float)))) {
      throw CheckpointError("checkpoint truncated in tensor data for " + b.name);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint has trailing bytes");
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const policy::AgentConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.agent.kge_dim != expected.kge_dim) {
    throw CheckpointError("checkpoint kge_dim " + std::to_string(ckpt.agent.kge_dim) +
                          " does not match agent kge_dim " + std::to_string(expected.kge_dim));
  }
  if (ckpt.agent.n_joints != expected.n_joints) {
    throw CheckpointError("checkpoint n_joints " + std::to_string(ckpt.agent.n_joints) +
                          " does not match agent n_joints " + std::to_string(expected.n_joints));
  }
  if (ckpt.agent.image_size != expected.image_size) {
    throw CheckpointError("checkpoint image_size " + std::to_string(ckpt.agent.image_size) +
                          " does not match agent image_size " + std::to_string(expected.image_size));
  }
  if (!(ckpt.agent == expected)) {
    throw CheckpointError("checkpoint agent configuration does not match the requested agent");
  }
  return ckpt;
}

Checkpoint make_checkpoint(const policy::PolicyNetwork<float>& network, std::int64_t step) {
  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.agent = network.config();
  for (const auto& p : network.parameters()) {
    ckpt.blocks.push_back({p.name, p.tensor.shape(),
                           std::vector<float>(p.tensor.values().begin(), p.tensor.values().end())});
  }
  return ckpt;
}

Checkpoint make_checkpoint(const policy::AgentConfig& agent, const std::vector<std::string>& names,
                           const std::vector<std::vector<std::size_t>>& shapes,
                           const std::vector<std::vector<float>>& values, std::int64_t step) {
  if (names.size() != shapes.size() || names.size() != values.size()) {
    throw std::invalid_argument("make_checkpoint: names, shapes and values differ in length");
  }
  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.agent = agent;
  for (std::size_t i = 0; i < names.size(); ++i) ckpt.blocks.push_back({names[i], shapes[i], values[i]});
  return ckpt;
}

void apply_checkpoint(const Checkpoint& checkpoint, policy::PolicyNetwork<float>& network) {
  const auto& params = network.parameters();
  if (checkpoint.blocks.size() != params.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(checkpoint.blocks.size()) +
                          " tensors, network has " + std::to_string(params.size()));
  }
  std::vector<std::vector<float>> values;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& b = checkpoint.blocks[i];
    if (b.name != params[i].name || b.shape != params[i].tensor.shape()) {
      throw CheckpointError("checkpoint tensor '" + b.name + "' does not match network tensor '" +
                            params[i].name + "'");
    }
    values.push_back(b.values);
  }
  network.assign<float>(values);
}

}  // namespace kgrl::a3c
