#include "pcattn/pcio/pcb.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcattn/errors.hpp"

namespace pcattn::pcio {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'B', '1'};
constexpr std::uint32_t kNoClass = 0xFFFFFFFFu;

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_f32(std::string& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 4;
    return v;
  }
  std::uint8_t u8(const char* field) {
    need(1, field);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  double f32(const char* field) { return static_cast<double>(std::bit_cast<float>(u32(field))); }

  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) throw FormatError(pos_, std::string("truncated while reading ") + field);
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_pcb(const Dataset& dataset) {
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(dataset.size()));
  for (const PointCloud& pc : dataset) {
    put_u32(out, static_cast<std::uint32_t>(pc.size()));
    put_u32(out, pc.class_label.value_or(kNoClass));
    out.push_back(pc.part_labels ? 1 : 0);
    for (const Vec3& p : pc.positions)
      for (double c : p) put_f32(out, c);
    if (pc.part_labels) {
      for (std::uint32_t l : *pc.part_labels) put_u32(out, l);
    }
  }
  return out;
}

Dataset decode_pcb(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(0, "bad magic, expected PCB1");
  Reader in(bytes);
  for (int i = 0; i < 4; ++i) in.u8("magic");
  const std::uint32_t count = in.u32("record count");
  Dataset data;
  for (std::uint32_t r = 0; r < count; ++r) {
    PointCloud pc;
    const std::uint32_t n = in.u32("point count");
    const std::uint32_t cls = in.u32("class label");
    if (cls != kNoClass) pc.class_label = cls;
    const std::size_t flag_at = in.offset();
    const std::uint8_t has_parts = in.u8("has_parts flag");
    if (has_parts > 1) throw FormatError(flag_at, "has_parts flag must be 0 or 1");
    in.need(static_cast<std::size_t>(n) * 12, "positions");
    pc.positions.resize(n);
    for (Vec3& p : pc.positions)
      for (double& c : p) c = in.f32("positions");
    if (has_parts) {
      in.need(static_cast<std::size_t>(n) * 4, "part labels");
      pc.part_labels.emplace(n);
      for (std::uint32_t& l : *pc.part_labels) l = in.u32("part labels");
    }
    data.push_back(std::move(pc));
  }
  if (!in.done()) throw FormatError(in.offset(), "trailing bytes after the declared records");
  return data;
}

void write_pcb(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_pcb(dataset);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_pcb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_pcb(ss.str());
}

}  // namespace pcattn::pcio
