#include "rpg/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace rpg {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian");

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'P', 'G', 'P', 'H', 'I', '\0', '\n'};

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <class T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, const std::string& path) : in_(in), path_(path) {}
  template <class T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw CheckpointError(path_ + ": truncated checkpoint");
    return v;
  }
  std::string get_string() {
    const auto len = get<std::uint32_t>();
    if (len > (1u << 16)) throw CheckpointError(path_ + ": corrupt segment name");
    std::string s(len, '\0');
    in_.read(s.data(), len);
    if (!in_) throw CheckpointError(path_ + ": truncated checkpoint");
    return s;
  }

 private:
  std::ifstream& in_;
  const std::string& path_;
};

}  // namespace

void save_checkpoint(const std::string& path, const MetricNet& net, const MetricNetParams& phi) {
  if (phi.size() != net.param_count()) throw LayoutMismatch("save_checkpoint: parameter count mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(kCheckpointVersion);
  const MetricNetConfig& cfg = net.config();
  w.put<std::int32_t>(cfg.m_tilde);
  w.put<std::int32_t>(cfg.pool_size);
  w.put<std::int32_t>(cfg.kernel_size);
  w.put<std::int32_t>(cfg.segment_width);
  w.put<std::int32_t>(cfg.trunk_width);
  const auto& segments = net.layout().segments();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(segments.size()));
  for (const Segment& s : segments) {
    w.put_string(s.name);
    w.put<std::uint8_t>(s.kind == SegmentKind::matrix ? 1 : 0);
    w.put<std::uint8_t>(s.pool_exempt ? 1 : 0);
    w.put<std::int32_t>(s.rows);
    w.put<std::int32_t>(s.cols);
  }
  w.put<std::uint64_t>(static_cast<std::uint64_t>(phi.size()));
  out.write(reinterpret_cast<const char*>(phi.values.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(phi.size())));
  if (!out) throw CheckpointError("failed writing " + path);
}

MetricNetParams load_checkpoint(const std::string& path, const MetricNet& net) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw CheckpointError(path + ": not a metric-net checkpoint");
  Reader r(in, path);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const MetricNetConfig& cfg = net.config();
  const std::array<int, 5> expected = {cfg.m_tilde, cfg.pool_size, cfg.kernel_size,
                                       cfg.segment_width, cfg.trunk_width};
  for (int e : expected) {
    if (r.get<std::int32_t>() != e) throw LayoutMismatch(path + ": network config differs");
  }
  LayerLayout layout;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.get_string();
    const auto kind = r.get<std::uint8_t>();
    const auto exempt = r.get<std::uint8_t>();
    const auto rows = r.get<std::int32_t>();
    const auto cols = r.get<std::int32_t>();
    if (kind == 1) {
      layout.add_matrix(std::move(name), rows, cols);
    } else {
      layout.add_vector(std::move(name), rows, exempt != 0);
    }
  }
  if (!(layout == net.layout())) throw LayoutMismatch(path + ": stored layout differs");
  const auto size = r.get<std::uint64_t>();
  if (size != static_cast<std::uint64_t>(net.param_count())) {
    throw LayoutMismatch(path + ": stored parameter count differs");
  }
  MetricNetParams phi;
  phi.blocks = net.blocks();
  phi.values.resize(static_cast<Eigen::Index>(size));
  in.read(reinterpret_cast<char*>(phi.values.data()),
          static_cast<std::streamsize>(sizeof(double) * size));
  if (!in) throw CheckpointError(path + ": truncated parameter data");
  return phi;
}

std::string checkpoint_json(const MetricNet& net, const MetricNetParams& phi) {
  using nlohmann::json;
  const MetricNetConfig& cfg = net.config();
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["config"] = {{"m_tilde", cfg.m_tilde},
                   {"pool_size", cfg.pool_size},
                   {"kernel_size", cfg.kernel_size},
                   {"segment_width", cfg.segment_width},
                   {"trunk_width", cfg.trunk_width}};
  json layout = json::array();
  for (const Segment& s : net.layout().segments()) {
    layout.push_back({{"name", s.name},
                      {"kind", s.kind == SegmentKind::matrix ? "matrix" : "vector"},
                      {"rows", s.rows},
                      {"cols", s.cols},
                      {"pool_exempt", s.pool_exempt}});
  }
  doc["layout"] = layout;
  json blocks = json::array();
  for (const ParamBlock& b : phi.blocks) {
    std::vector<double> values(phi.values.data() + b.offset, phi.values.data() + b.offset + b.size);
    blocks.push_back({{"name", b.name}, {"tag", to_string(b.tag)}, {"values", values}});
  }
  doc["blocks"] = blocks;
  return doc.dump(2);
}

}  // namespace rpg
