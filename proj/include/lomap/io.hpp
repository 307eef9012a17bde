#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace lomap::io {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = kFnvOffset) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// Binary buffer writer. All scalars are serialized little-endian regardless
// of host order; finish() appends an FNV-1a checksum over everything written
// and flushes to disk in one shot.
class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_le(u);
  }
  void f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put_le(u);
  }
  void magic(const char tag[5]) { bytes(tag, 4); }

  // appends the checksum and writes the buffer to `path`
  void finish(const std::string& path);

  const std::vector<unsigned char>& buffer() const { return buf_; }

 private:
  template <typename T>
  void put_le(T v) {
    unsigned char out[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
      out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    bytes(out, sizeof(T));
  }
  std::vector<unsigned char> buf_;
};

// Whole-file reader with a cursor. check_magic/verify_checksum raise data
// errors on mismatch; all reads raise on truncation.
class Reader {
 public:
  explicit Reader(const std::string& path);
  static Reader from_bytes(std::vector<unsigned char> bytes);

  void expect_magic(const char tag[5]);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32();
  double f64();
  void raw(void* out, std::size_t n);

  // checks the trailing 8-byte checksum against the preceding content;
  // call before consuming the body
  void verify_checksum();
  // true once the cursor sits at the checksum footer
  bool at_footer() const { return pos_ + 8 == buf_.size(); }

  std::size_t size() const { return buf_.size(); }

 private:
  Reader() = default;
  template <typename T>
  T get_le();
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
  std::string path_;
};

// Minimal RFC-4180 style CSV emitter: header row, comma separation, fields
// quoted when they contain a comma, quote, or newline.
class Csv {
 public:
  void header(const std::vector<std::string>& cols);
  void cell(const std::string& v);
  void cell(double v);
  void cell(std::uint64_t v);
  void cell(std::int64_t v);
  void cell(int v) { cell(static_cast<std::int64_t>(v)); }
  void end_row();
  void write(const std::string& path) const;
  const std::string& text() const { return out_; }

 private:
  void push(const std::string& field);
  std::string out_;
  bool row_open_ = false;
};

// %.12g rendering used for every float that lands in a CSV; keeps reruns
// byte-comparable.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lomap::io
