#include "fcgrad/agent/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "fcgrad/common/error.hpp"

namespace fcg::agent {

namespace {

constexpr char kMagic[8] = {'F', 'C', 'G', 'C', 'K', 'P', 'T', '1'};

class Out {
 public:
  explicit Out(const std::string& path) : path_(path), f_(path, std::ios::binary) {
    require(f_.is_open(), "cannot open " + path + " for writing", ErrorCode::Io);
  }
  void u64(std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    f_.write(reinterpret_cast<const char*>(b), 8);
  }
  void u32(std::uint32_t x) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    f_.write(reinterpret_cast<const char*>(b), 4);
  }
  void f64s(const std::vector<double>& v) {
    for (double x : v) u64(std::bit_cast<std::uint64_t>(x));
  }
  void bytes(const char* p, std::size_t n) { f_.write(p, std::streamsize(n)); }
  void finish() {
    f_.close();
    require(!f_.fail(), "write failed on " + path_, ErrorCode::Io);
  }

 private:
  std::string path_;
  std::ofstream f_;
};

class In {
 public:
  explicit In(const std::string& path) : path_(path), f_(path, std::ios::binary) {
    require(f_.is_open(), "cannot open " + path, ErrorCode::Io);
  }
  void read(unsigned char* p, std::size_t n) {
    f_.read(reinterpret_cast<char*>(p), std::streamsize(n));
    require(std::size_t(f_.gcount()) == n, path_ + ": truncated checkpoint",
            ErrorCode::Io);
  }
  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t(b[i]) << (8 * i);
    return x;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t(b[i]) << (8 * i);
    return x;
  }
  void f64s(std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = std::bit_cast<double>(u64());
  }
  bool at_end() { return f_.peek() == std::char_traits<char>::eof(); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream f_;
};

// Guards against absurd sizes in corrupted headers.
constexpr std::uint64_t kMaxDim = 1u << 24;

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  Out o(path);
  o.bytes(kMagic, sizeof kMagic);
  o.u32(kCheckpointVersion);
  o.u32(std::uint32_t(ckpt.tag.size()));
  o.bytes(ckpt.tag.data(), ckpt.tag.size());
  o.u32(std::uint32_t(ckpt.agents.size()));
  for (const AgentState& a : ckpt.agents) {
    const NetShape& s = a.net.shape();
    o.u64(s.obs_dim);
    o.u64(s.hidden);
    o.u64(s.actions);
    o.u64(s.layout_hash());
    o.f64s(a.net.policy_params);
    o.f64s(a.net.value_params);
    o.u64(a.policy_opt.t);
    o.f64s(a.policy_opt.m);
    o.f64s(a.policy_opt.v);
    o.u64(a.value_opt.t);
    o.f64s(a.value_opt.m);
    o.f64s(a.value_opt.v);
  }
  o.finish();
}

Checkpoint load_checkpoint(const std::string& path) {
  In in(path);
  unsigned char magic[8];
  in.read(magic, 8);
  require(std::memcmp(magic, kMagic, 8) == 0, path + ": not a checkpoint file",
          ErrorCode::Io);
  const std::uint32_t version = in.u32();
  require(version == kCheckpointVersion,
          path + ": unsupported checkpoint version " + std::to_string(version),
          ErrorCode::Io);
  Checkpoint ck;
  const std::uint32_t tag_len = in.u32();
  require(tag_len < (1u << 20), path + ": corrupt tag length", ErrorCode::Io);
  ck.tag.resize(tag_len);
  in.read(reinterpret_cast<unsigned char*>(ck.tag.data()), tag_len);
  const std::uint32_t n = in.u32();
  require(n >= 1 && n <= 64, path + ": corrupt agent count", ErrorCode::Io);
  for (std::uint32_t k = 0; k < n; ++k) {
    NetShape s;
    s.obs_dim = in.u64();
    s.hidden = in.u64();
    s.actions = in.u64();
    require(s.obs_dim >= 1 && s.obs_dim < kMaxDim && s.hidden >= 1 &&
                s.hidden < kMaxDim && s.actions >= 1 && s.actions < kMaxDim,
            path + ": corrupt network dimensions", ErrorCode::Io);
    require(in.u64() == s.layout_hash(),
            path + ": parameter layout hash mismatch", ErrorCode::Config);
    AgentState a(s);
    in.f64s(a.net.policy_params, s.policy_size());
    in.f64s(a.net.value_params, s.value_size());
    a.policy_opt.t = in.u64();
    in.f64s(a.policy_opt.m, s.policy_size());
    in.f64s(a.policy_opt.v, s.policy_size());
    a.value_opt.t = in.u64();
    in.f64s(a.value_opt.m, s.value_size());
    in.f64s(a.value_opt.v, s.value_size());
    ck.agents.push_back(std::move(a));
  }
  require(in.at_end(), path + ": trailing bytes after checkpoint", ErrorCode::Io);
  return ck;
}

}  // namespace fcg::agent
