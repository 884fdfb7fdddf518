#include "onramp/rl/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace onramp::rl {

namespace {

void write_array(std::ostream& out, const std::vector<double>& values) {
  char buf[40];
  for (const double v : values) {
    std::snprintf(buf, sizeof(buf), "%a\n", v);
    out << buf;
  }
}

double read_hex_double(std::istream& in, const std::string& path) {
  std::string token;
  if (!(in >> token)) {
    throw std::runtime_error("checkpoint truncated: " + path);
  }
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str()) {
    throw std::runtime_error("checkpoint parse error near '" + token + "': " + path);
  }
  return v;
}

std::string expect_key(std::istream& in, const std::string& key,
                       const std::string& path) {
  std::string k, v;
  if (!(in >> k)) throw std::runtime_error("checkpoint truncated: " + path);
  if (k != key) {
    throw std::runtime_error("checkpoint: expected '" + key + "', got '" + k +
                             "': " + path);
  }
  if (!(in >> v)) throw std::runtime_error("checkpoint truncated: " + path);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const auto& shape = ckpt.net.shape();
  out << "onramp-checkpoint " << kCheckpointFormatVersion << "\n";
  out << "kind " << ckpt.kind << "\n";
  out << "input " << shape.input << "\n";
  out << "hidden " << shape.hidden.size();
  for (const int h : shape.hidden) out << ' ' << h;
  out << "\n";
  out << "outputs " << shape.outputs << "\n";
  out << "value_head " << (shape.value_head ? 1 : 0) << "\n";
  out << "timestep " << ckpt.timestep << "\n";
  out << "params " << ckpt.net.parameter_count() << "\n";
  write_array(out, ckpt.net.parameters());
  if (ckpt.adam) {
    out << "adam " << ckpt.adam->t << "\n";
    write_array(out, ckpt.adam->m);
    write_array(out, ckpt.adam->v);
  } else {
    out << "adam none\n";
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "onramp-checkpoint") {
    throw std::runtime_error("not an onramp checkpoint: " + path);
  }
  if (version != kCheckpointFormatVersion) {
    std::ostringstream msg;
    msg << "checkpoint format version mismatch: file has " << version
        << ", this build reads " << kCheckpointFormatVersion << ": " << path;
    throw std::runtime_error(msg.str());
  }

  Checkpoint ckpt;
  ckpt.kind = expect_key(in, "kind", path);

  NetworkShape shape;
  shape.input = std::stoi(expect_key(in, "input", path));
  std::string hidden_count = expect_key(in, "hidden", path);
  shape.hidden.clear();
  for (int i = 0, n = std::stoi(hidden_count); i < n; ++i) {
    int width;
    if (!(in >> width)) throw std::runtime_error("checkpoint truncated: " + path);
    shape.hidden.push_back(width);
  }
  shape.outputs = std::stoi(expect_key(in, "outputs", path));
  shape.value_head = std::stoi(expect_key(in, "value_head", path)) != 0;
  ckpt.timestep = std::stol(expect_key(in, "timestep", path));

  const std::size_t n_params =
      static_cast<std::size_t>(std::stoull(expect_key(in, "params", path)));
  ckpt.net = PolicyNetwork(shape);
  if (ckpt.net.parameter_count() != n_params) {
    std::ostringstream msg;
    msg << "checkpoint parameter count " << n_params << " does not match shape ("
        << ckpt.net.parameter_count() << " expected): " << path;
    throw std::runtime_error(msg.str());
  }
  for (std::size_t i = 0; i < n_params; ++i) {
    ckpt.net.parameters()[i] = read_hex_double(in, path);
  }

  std::string adam_tag = expect_key(in, "adam", path);
  if (adam_tag != "none") {
    AdamState adam(n_params);
    adam.t = std::stol(adam_tag);
    for (std::size_t i = 0; i < n_params; ++i) adam.m[i] = read_hex_double(in, path);
    for (std::size_t i = 0; i < n_params; ++i) adam.v[i] = read_hex_double(in, path);
    ckpt.adam = std::move(adam);
  }
  return ckpt;
}

}  // namespace onramp::rl
