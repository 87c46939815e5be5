#include "kgrl/reacharena/trace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kgrl::reacharena {

TraceWriter::TraceWriter(const std::filesystem::path& path, std::size_t n_joints)
    : out_(path), n_joints_(n_joints) {
  if (!out_) throw std::runtime_error("cannot write trace " + path.string());
  out_ << "episode,step";
  for (std::size_t j = 0; j < n_joints; ++j) out_ << ",q" << j;
  for (std::size_t j = 0; j < n_joints; ++j) out_ << ",a" << j;
  out_ << ",reward,rel_dist,rel_deg,done,success\n";
  out_ << std::setprecision(17);
}

void TraceWriter::write(const TraceRow& row) {
  if (row.joint_angles.size() != n_joints_ || row.actions.size() != n_joints_) {
    throw std::invalid_argument("trace row has the wrong number of joints");
  }
  out_ << row.episode << ',' << row.step;
  for (double q : row.joint_angles) out_ << ',' << q;
  for (int a : row.actions) out_ << ',' << a;
  out_ << ',' << row.reward << ',' << row.rel_dist << ',' << row.rel_deg << ',' << int(row.done) << ','
       << int(row.success) << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty trace");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  auto need = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw std::runtime_error(path.string() + ": missing column '" + name + "'");
    return it->second;
  };
  std::size_t n_joints = 0;
  while (column.count("q" + std::to_string(n_joints))) ++n_joints;
  const std::size_t c_episode = need("episode"), c_step = need("step"), c_reward = need("reward"),
                    c_dist = need("rel_dist"), c_deg = need("rel_deg"), c_done = need("done"),
                    c_success = need("success");

  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": wrong field count");
    }
    TraceRow row;
    row.episode = std::stoull(f[c_episode]);
    row.step = std::stoi(f[c_step]);
    for (std::size_t j = 0; j < n_joints; ++j) {
      row.joint_angles.push_back(std::stod(f[column["q" + std::to_string(j)]]));
      auto a = column.find("a" + std::to_string(j));
      if (a != column.end()) row.actions.push_back(std::stoi(f[a->second]));
    }
    row.reward = std::stod(f[c_reward]);
    row.rel_dist = std::stod(f[c_dist]);
    row.rel_deg = std::stod(f[c_deg]);
    row.done = f[c_done] == "1";
    row.success = f[c_success] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (float v : image.pixels) {
    const auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    out.put(static_cast<char>(byte));
  }
}

}  // namespace kgrl::reacharena
