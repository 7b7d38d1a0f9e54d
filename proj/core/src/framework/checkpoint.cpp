#include "pcattn/framework/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pcattn/errors.hpp"

namespace pcattn::framework {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(v);
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  std::size_t offset() const { return pos_; }

  template <typename T>
  T get(const char* field) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U), field);
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  std::string text(std::size_t n, const char* field) {
    need(n, field);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) throw FormatError(pos_, std::string("truncated while reading ") + field);
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  out += ckpt.metadata;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    if (e.data.size() != e.shape.numel()) throw ContractError("checkpoint entry " + e.name + " has wrong payload size");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.rank()));
    for (std::size_t dim : e.shape.dims()) put<std::uint64_t>(out, dim);
    for (double v : e.data) put<double>(out, v);
  }
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(0, "bad magic, expected PCKP");
  if (bytes.size() < 12) throw FormatError(bytes.size(), "truncated checkpoint");
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes.substr(body));
  if (tail.get<std::uint64_t>("checksum") != fnv1a(bytes.substr(0, body))) {
    throw FormatError(body, "checksum mismatch");
  }
  Reader in(bytes.substr(0, body));
  in.text(4, "magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kVersion) throw FormatError(4, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.metadata = in.text(in.get<std::uint32_t>("metadata length"), "metadata");
  const auto count = in.get<std::uint32_t>("entry count");
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = in.text(in.get<std::uint32_t>("name length"), "name");
    const std::size_t rank_at = in.offset();
    const auto rank = in.get<std::uint32_t>("rank");
    if (rank == 0 || rank > 8) throw FormatError(rank_at, "implausible rank " + std::to_string(rank));
    std::vector<std::size_t> dims;
    std::size_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const std::size_t at = in.offset();
      const auto dim = in.get<std::uint64_t>("dims");
      if (dim == 0 || dim > (std::size_t{1} << 32)) throw FormatError(at, "implausible extent");
      dims.push_back(dim);
      numel *= dim;
    }
    in.need(numel * 8, "payload");
    e.shape = numerics::Shape(dims);
    e.data.resize(numel);
    for (double& v : e.data) v = in.get<double>("payload");
    ckpt.entries.push_back(std::move(e));
  }
  if (in.offset() != body) throw FormatError(in.offset(), "trailing bytes before checksum");
  return ckpt;
}

Checkpoint snapshot(const std::vector<std::pair<std::string, numerics::Value>>& params, std::string metadata) {
  Checkpoint c;
  c.metadata = std::move(metadata);
  for (const auto& [name, v] : params) c.entries.push_back({name, v.shape(), {v.data().begin(), v.data().end()}});
  return c;
}

void restore(const Checkpoint& ckpt, const std::vector<std::pair<std::string, numerics::Value>>& params) {
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : ckpt.entries) by_name[e.name] = &e;
  if (by_name.size() != params.size()) {
    throw CompatibilityError("checkpoint holds " + std::to_string(by_name.size()) + " tensors, model has " +
                             std::to_string(params.size()));
  }
  for (const auto& [name, v] : params) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CompatibilityError("checkpoint lacks tensor " + name);
    if (it->second->shape != v.shape()) {
      throw CompatibilityError("tensor " + name + " has shape " + it->second->shape.str() + " in the checkpoint but " +
                               v.shape().str() + " in the model");
    }
  }
  for (const auto& [name, v] : params) {
    numerics::Value target = v;
    const auto& src = by_name[name]->data;
    std::copy(src.begin(), src.end(), target.mutable_data().begin());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace pcattn::framework
