#include "sparse_spike/instance_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "sparse_spike/errors.hpp"

namespace sparse_spike {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic{'S', 'S', 'P', 'K', 'I', 'N', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("instance file truncated");
  return to_little(v);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) put(out, m(i, j));
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = get<double>(in);
  }
  return m;
}

json header_json(const Instance& inst) {
  json spike = {{"dim", inst.spike.dim()}, {"flat", inst.spike.flat}};
  json support = json::array();
  json values = json::array();
  for (Index i : inst.spike.support) {
    support.push_back(i);
    values.push_back(inst.spike.values(i));
  }
  spike["support"] = support;
  spike["values"] = values;
  json h = {
      {"format", "sparse_spike.instance"},
      {"version", kVersion},
      {"model", std::string(to_string(inst.model))},
      {"rows", inst.data.rows()},
      {"cols", inst.data.cols()},
      {"signal", inst.signal},
      {"seed", inst.seed},
      {"spike", spike},
  };
  h["perturbation"] = inst.perturbation
                          ? json{{"kind", std::string(to_string(inst.perturbation->kind))},
                                 {"strength", inst.perturbation->strength},
                                 {"seed", inst.perturbation->seed}}
                          : json(nullptr);
  h["noise"] = inst.noise ? json{{"family", std::string(to_string(inst.noise->family))},
                                 {"scale", inst.noise->scale}}
                          : json(nullptr);
  return h;
}

// Everything but the data matrix.
Instance from_header(const json& h) {
  if (h.value("format", "") != "sparse_spike.instance") {
    throw std::runtime_error("not a sparse_spike instance header");
  }
  if (h.at("version").get<std::uint32_t>() != kVersion) {
    throw std::runtime_error("unsupported instance format version");
  }
  Instance inst;
  inst.model = parse_model_kind(h.at("model").get<std::string>());
  inst.signal = h.at("signal").get<double>();
  inst.seed = h.at("seed").get<Seed>();
  const json& s = h.at("spike");
  const Index dim = s.at("dim").get<Index>();
  inst.spike.values = Eigen::VectorXd::Zero(dim);
  inst.spike.flat = s.at("flat").get<bool>();
  const auto support = s.at("support").get<std::vector<Index>>();
  const auto values = s.at("values").get<std::vector<double>>();
  if (support.size() != values.size()) throw std::runtime_error("spike support/values mismatch");
  for (std::size_t a = 0; a < support.size(); ++a) {
    if (support[a] < 0 || support[a] >= dim) throw std::runtime_error("spike index out of range");
    inst.spike.values(support[a]) = values[a];
  }
  inst.spike.support = support;
  if (const json& p = h.at("perturbation"); !p.is_null()) {
    inst.perturbation = Perturbation{parse_adversary_kind(p.at("kind").get<std::string>()),
                                     p.at("strength").get<double>(), p.at("seed").get<Seed>()};
  }
  if (const json& n = h.at("noise"); !n.is_null()) {
    NoiseSpec noise;
    noise.family = parse_noise_family(n.at("family").get<std::string>());
    noise.scale = n.at("scale").get<double>();
    inst.noise = noise;
  }
  return inst;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

bool is_pair_path(const std::filesystem::path& path) { return path.extension() == ".json"; }

std::filesystem::path data_path_for(const std::filesystem::path& json_path) {
  std::filesystem::path p = json_path;
  p.replace_extension(".bin");
  return p;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void check_dims(Index rows, Index cols) {
  if (rows < 1 || cols < 1 || rows > (1 << 20) || cols > (1 << 20)) {
    throw std::runtime_error("implausible matrix dimensions in header");
  }
}

}  // namespace

std::string instance_header(const Instance& inst) { return header_json(inst).dump(2); }

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  inst.validate();
  json h = header_json(inst);
  if (is_pair_path(path)) {
    const std::filesystem::path bin = data_path_for(path);
    h["data_file"] = bin.filename().string();
    std::ofstream data = open_out(bin);
    write_matrix(data, inst.data);
    std::ofstream header = open_out(path);
    header << h.dump(2) << '\n';
    if (!data || !header) throw std::runtime_error("failed writing " + path.string());
    return;
  }
  const std::string text = h.dump();
  std::ofstream out = open_out(path);
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_matrix(out, inst.data);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in && magic == kMagic) {
    if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported container version");
    (void)get<std::uint32_t>(in);
    const std::uint64_t length = get<std::uint64_t>(in);
    if (length > (std::uint64_t{1} << 30)) throw std::runtime_error("implausible header length");
    std::string text(static_cast<std::size_t>(length), '\0');
    in.read(text.data(), static_cast<std::streamsize>(length));
    if (!in) throw std::runtime_error("instance file truncated");
    const json h = json::parse(text);
    Instance inst = from_header(h);
    const Index rows = h.at("rows").get<Index>();
    const Index cols = h.at("cols").get<Index>();
    check_dims(rows, cols);
    inst.data = read_matrix(in, rows, cols);
    inst.validate();
    return inst;
  }
  const json h = read_json_file(path);
  Instance inst = from_header(h);
  const Index rows = h.at("rows").get<Index>();
  const Index cols = h.at("cols").get<Index>();
  check_dims(rows, cols);
  std::ifstream data = open_in(path.parent_path() / h.at("data_file").get<std::string>());
  inst.data = read_matrix(data, rows, cols);
  inst.validate();
  return inst;
}

void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& json_path) {
  const std::filesystem::path bin = data_path_for(json_path);
  std::ofstream data = open_out(bin);
  write_matrix(data, m);
  std::ofstream header = open_out(json_path);
  header << json{{"rows", m.rows()}, {"cols", m.cols()}, {"data_file", bin.filename().string()}}
                .dump(2)
         << '\n';
  if (!data || !header) throw std::runtime_error("failed writing " + json_path.string());
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& json_path) {
  const json h = read_json_file(json_path);
  const Index rows = h.at("rows").get<Index>();
  const Index cols = h.at("cols").get<Index>();
  check_dims(rows, cols);
  std::ifstream data = open_in(json_path.parent_path() / h.at("data_file").get<std::string>());
  return read_matrix(data, rows, cols);
}

}  // namespace sparse_spike
