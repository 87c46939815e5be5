#include "kgrl/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace kgrl::cli {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError("unknown key '" + section + "' outside any section");
      for (const auto& [key, value] : body) {
        values_[section + "." + key] = unquote(value.data());
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string* raw(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  void read(const std::string& key, double& out) {
    if (auto v = raw(key)) out = parse_double(key, *v);
  }
  void read(const std::string& key, std::size_t& out) {
    if (auto v = raw(key)) out = parse_unsigned(key, *v);
  }
  void read(const std::string& key, std::int64_t& out) {
    if (auto v = raw(key)) {
      const std::uint64_t u = parse_unsigned(key, *v);
      if (u > static_cast<std::uint64_t>(INT64_MAX)) bad(key, *v);
      out = static_cast<std::int64_t>(u);
    }
  }
  void read(const std::string& key, int& out) {
    if (auto v = raw(key)) {
      const std::uint64_t u = parse_unsigned(key, *v);
      if (u > static_cast<std::uint64_t>(INT32_MAX)) bad(key, *v);
      out = static_cast<int>(u);
    }
  }
  void read_u64(const std::string& key, std::uint64_t& out) {
    if (auto v = raw(key)) out = parse_unsigned(key, *v);
  }
  void read(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else bad(key, *v);
    }
  }
  void read(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (auto v = raw(key)) {
      std::string text = *v;
      if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
      std::vector<double> list;
      std::istringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) list.push_back(parse_double(key, trim(item)));
      if (list.empty()) bad(key, *v);
      out = std::move(list);
    }
  }

  void reject_unused() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw ConfigError("unknown key '" + key + "'");
    }
  }

  [[noreturn]] static void bad(const std::string& key, const std::string& value) {
    throw ConfigError("invalid value for '" + key + "': '" + value + "'");
  }

 private:
  static double parse_double(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(text, &pos);
      if (pos != text.size()) bad(key, text);
      return d;
    } catch (const std::logic_error&) {
      bad(key, text);
    }
  }
  static std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    std::string digits;
    for (char c : text) {
      if (c != '_') digits.push_back(c);
    }
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) bad(key, text);
    return v;
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

a3c::ActionMode parse_action_mode(const std::string& key, const std::string& text) {
  if (text == "sample") return a3c::ActionMode::sample;
  if (text == "greedy") return a3c::ActionMode::greedy;
  Reader::bad(key, text);
}

const char* to_string(a3c::ActionMode mode) {
  return mode == a3c::ActionMode::greedy ? "greedy" : "sample";
}

template <typename F>
void check(const std::string& key, F&& validator) {
  try {
    validator();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid value for '" + key + "': " + e.what());
  }
}

}  // namespace

std::size_t ExperimentConfig::kge_dim() const {
  if (kge.mode == kge::KgeMode::none) return 0;
  return kge.target_dim ? kge.target_dim : kge::default_embedding_dim(kge.mode, env.dr_colors);
}

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("malformed configuration at line " + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree);
  ExperimentConfig c;

  // The arm preset first, so individual env keys override it.
  std::size_t n_links = c.env.n_links;
  r.read("env.n_links", n_links);
  if (n_links != 2 && n_links != 3) Reader::bad("env.n_links", std::to_string(n_links));
  c.env = reacharena::EnvConfig::planar(n_links);
  auto& e = c.env;
  r.read("env.link_lengths", e.link_lengths);
  r.read("env.joint_lower", e.joint_lower);
  r.read("env.joint_upper", e.joint_upper);
  r.read("env.mpi", e.mpi);
  r.read("env.x_min", e.x_min);
  r.read("env.x_max", e.x_max);
  r.read("env.y_min", e.y_min);
  r.read("env.y_max", e.y_max);
  r.read("env.image_size", e.image_size);
  r.read("env.dr_colors", e.dr_colors);
  r.read("env.success_dist", e.success_dist);
  r.read("env.success_deg", e.success_deg);
  r.read("env.max_steps", e.max_steps);
  r.read("env.view_center_x", e.view_center_x);
  r.read("env.view_center_y", e.view_center_y);
  r.read("env.view_half_extent", e.view_half_extent);
  r.read("env.link_width", e.link_width);

  auto& a = c.agent;
  r.read("agent.conv1_channels", a.conv1_channels);
  r.read("agent.conv1_kernel", a.conv1_kernel);
  r.read("agent.conv1_stride", a.conv1_stride);
  r.read("agent.conv2_channels", a.conv2_channels);
  r.read("agent.conv2_kernel", a.conv2_kernel);
  r.read("agent.conv2_stride", a.conv2_stride);
  r.read("agent.fc_width", a.fc_width);
  r.read("agent.lstm_hidden", a.lstm_hidden);
  r.read("agent.conv_gain", a.conv_gain);
  r.read("agent.lstm_gain", a.lstm_gain);
  r.read("agent.actor_gain", a.actor_gain);
  r.read("agent.critic_gain", a.critic_gain);

  auto& t = c.train;
  r.read("train.gamma", t.gamma);
  r.read("train.lambda", t.lambda);
  r.read("train.beta", t.beta);
  r.read("train.learning_rate", t.learning_rate);
  r.read("train.rmsprop_decay", t.rmsprop_decay);
  r.read("train.rmsprop_epsilon", t.rmsprop_epsilon);
  r.read("train.n_workers", t.n_workers);
  r.read("train.total_steps", t.total_steps);
  r.read("train.rollout_length", t.rollout_length);
  r.read("train.interim_interval", t.interim_interval);
  r.read("train.interim_episodes", t.interim_episodes);
  r.read("train.grad_clip_norm", t.grad_clip_norm);
  r.read("train.lock_free", t.lock_free);
  if (auto v = r.raw("train.eval_action_mode")) t.eval_action_mode = parse_action_mode("train.eval_action_mode", *v);

  auto& k = c.kge;
  const std::string* mode = r.raw("kge.mode");
  if (!mode) throw ConfigError("missing required key 'kge.mode'");
  try {
    k.mode = kge::parse_kge_mode(*mode);
  } catch (const std::invalid_argument&) {
    Reader::bad("kge.mode", *mode);
  }
  std::string graph, vectors;
  r.read("kge.graph", graph);
  r.read("kge.word_vectors", vectors);
  k.graph = resolve(base_dir, graph);
  k.word_vectors = resolve(base_dir, vectors);
  r.read_u64("kge.fallback_seed", k.fallback_seed);
  const bool has_target_dim = r.has("kge.target_dim");
  r.read("kge.target_dim", k.target_dim);
  r.read("kge.per_episode", k.per_episode);

  auto& v = c.eval;
  r.read("eval.episodes", v.episodes);
  r.read("eval.dist_threshold", v.dist_threshold);
  r.read("eval.deg_threshold", v.deg_threshold);
  r.read_u64("eval.seed", v.seed);
  if (auto m = r.raw("eval.action_mode")) v.action_mode = parse_action_mode("eval.action_mode", *m);
  r.read("eval.compare_runs", v.compare_runs);
  r.read("eval.compare_episodes", v.compare_episodes);

  std::string out;
  r.read("run.output_dir", out);
  if (!out.empty()) c.output_dir = resolve(base_dir, out);
  r.read_u64("run.seed", c.seed);

  r.reject_unused();

  // Cross-field rules.
  if (k.mode == kge::KgeMode::none && has_target_dim && k.target_dim != 0) {
    throw ConfigError("invalid value for 'kge.target_dim': must be absent or 0 when kge.mode is none");
  }
  if (k.mode != kge::KgeMode::none && has_target_dim && k.target_dim == 0) {
    throw ConfigError("invalid value for 'kge.target_dim': must be positive when kge.mode is " +
                      std::string(kge::to_string(k.mode)));
  }
  if (k.mode == kge::KgeMode::none && k.per_episode) {
    throw ConfigError("invalid value for 'kge.per_episode': requires kge.mode partial or full");
  }
  if (e.link_lengths.size() != e.n_links) {
    throw ConfigError("invalid value for 'env.link_lengths': expected " + std::to_string(e.n_links) + " entries");
  }
  check("env", [&] { e.validate(); });
  a.n_joints = e.n_links;
  a.image_size = e.image_size;
  a.kge_dim = c.kge_dim();
  check("agent", [&] { a.validate(); });
  t.seed = c.seed;
  check("train", [&] { t.validate(); });
  if (v.episodes == 0) Reader::bad("eval.episodes", "0");
  if (!(v.dist_threshold > 0.0)) Reader::bad("eval.dist_threshold", std::to_string(v.dist_threshold));
  if (!(v.deg_threshold > 0.0)) Reader::bad("eval.deg_threshold", std::to_string(v.deg_threshold));
  if (v.compare_runs == 0) Reader::bad("eval.compare_runs", "0");
  if (v.compare_episodes == 0) Reader::bad("eval.compare_episodes", "0");
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto list = [&os](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << '\n';
  };
  const auto& e = c.env;
  os << "[env]\n"
     << "n_links = " << e.n_links << '\n';
  os << "link_lengths = ";
  list(e.link_lengths);
  os << "joint_lower = ";
  list(e.joint_lower);
  os << "joint_upper = ";
  list(e.joint_upper);
  os << "mpi = " << e.mpi << '\n'
     << "x_min = " << e.x_min << "\nx_max = " << e.x_max << '\n'
     << "y_min = " << e.y_min << "\ny_max = " << e.y_max << '\n'
     << "image_size = " << e.image_size << '\n'
     << "dr_colors = " << (e.dr_colors ? "true" : "false") << '\n'
     << "success_dist = " << e.success_dist << '\n'
     << "success_deg = " << e.success_deg << '\n'
     << "max_steps = " << e.max_steps << '\n'
     << "view_center_x = " << e.view_center_x << '\n'
     << "view_center_y = " << e.view_center_y << '\n'
     << "view_half_extent = " << e.view_half_extent << '\n'
     << "link_width = " << e.link_width << "\n\n";
  const auto& a = c.agent;
  os << "[agent]\n"
     << "conv1_channels = " << a.conv1_channels << '\n'
     << "conv1_kernel = " << a.conv1_kernel << '\n'
     << "conv1_stride = " << a.conv1_stride << '\n'
     << "conv2_channels = " << a.conv2_channels << '\n'
     << "conv2_kernel = " << a.conv2_kernel << '\n'
     << "conv2_stride = " << a.conv2_stride << '\n'
     << "fc_width = " << a.fc_width << '\n'
     << "lstm_hidden = " << a.lstm_hidden << '\n'
     << "conv_gain = " << a.conv_gain << '\n'
     << "lstm_gain = " << a.lstm_gain << '\n'
     << "actor_gain = " << a.actor_gain << '\n'
     << "critic_gain = " << a.critic_gain << "\n\n";
  const auto& t = c.train;
  os << "[train]\n"
     << "gamma = " << t.gamma << '\n'
     << "lambda = " << t.lambda << '\n'
     << "beta = " << t.beta << '\n'
     << "learning_rate = " << t.learning_rate << '\n'
     << "rmsprop_decay = " << t.rmsprop_decay << '\n'
     << "rmsprop_epsilon = " << t.rmsprop_epsilon << '\n'
     << "n_workers = " << t.n_workers << '\n'
     << "total_steps = " << t.total_steps << '\n'
     << "rollout_length = " << t.rollout_length << '\n'
     << "interim_interval = " << t.interim_interval << '\n'
     << "interim_episodes = " << t.interim_episodes << '\n'
     << "grad_clip_norm = " << t.grad_clip_norm << '\n'
     << "lock_free = " << (t.lock_free ? "true" : "false") << '\n'
     << "eval_action_mode = " << to_string(t.eval_action_mode) << "\n\n";
  const auto& k = c.kge;
  os << "[kge]\n"
     << "mode = " << kge::to_string(k.mode) << '\n';
  if (!k.graph.empty()) os << "graph = \"" << std::filesystem::absolute(k.graph).string() << "\"\n";
  if (!k.word_vectors.empty()) {
    os << "word_vectors = \"" << std::filesystem::absolute(k.word_vectors).string() << "\"\n";
  }
  os << "fallback_seed = " << k.fallback_seed << '\n';
  if (k.mode != kge::KgeMode::none) os << "target_dim = " << c.kge_dim() << '\n';
  os << "per_episode = " << (k.per_episode ? "true" : "false") << "\n\n";
  const auto& v = c.eval;
  os << "[eval]\n"
     << "episodes = " << v.episodes << '\n'
     << "dist_threshold = " << v.dist_threshold << '\n'
     << "deg_threshold = " << v.deg_threshold << '\n'
     << "seed = " << v.seed << '\n'
     << "action_mode = " << to_string(v.action_mode) << '\n'
     << "compare_runs = " << v.compare_runs << '\n'
     << "compare_episodes = " << v.compare_episodes << "\n\n";
  os << "[run]\n"
     << "output_dir = \"" << std::filesystem::absolute(c.output_dir).string() << "\"\n"
     << "seed = " << c.seed << '\n';
  return os.str();
}

kge::KnowledgeGraph experiment_graph(const ExperimentConfig& config) {
  if (config.kge.graph.empty()) return kge::default_scene_graph(config.env.dr_colors);
  return kge::load_graph(config.kge.graph);
}

kge::WordVectorTable experiment_word_vectors(const ExperimentConfig& config,
                                             const kge::KnowledgeGraph& graph) {
  if (!config.kge.word_vectors.empty()) return kge::load_word_vectors(config.kge.word_vectors, kge::kWordDim);
  return kge::fallback_word_vectors(kge::graph_vocabulary(graph), kge::kWordDim, config.kge.fallback_seed);
}

a3c::KgeInput build_kge_input(const ExperimentConfig& config) {
  if (config.kge.mode == kge::KgeMode::none) return {};
  const auto graph = experiment_graph(config);
  const auto table = experiment_word_vectors(config, graph);
  const std::size_t dim = config.kge_dim();
  if (config.kge.per_episode) {
    return a3c::KgeInput::per_episode(graph, table, config.kge.mode, config.env.dr_colors, dim, config.env);
  }
  auto e = kge::scene_embedding_for_mode(graph, config.kge.mode, config.env.dr_colors, table, dim);
  return a3c::KgeInput::fixed(e ? e->values : std::vector<float>(dim, 0.0f));
}

}  // namespace kgrl::cli
