#include "lomap/io.hpp"

#include <cstdio>
#include <fstream>

#include "lomap/error.hpp"

namespace lomap::io {

void Writer::finish(const std::string& path) {
  std::uint64_t sum = fnv1a64(buf_.data(), buf_.size());
  u64(sum);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(buf_.data()),
            static_cast<std::streamsize>(buf_.size()));
  if (!out) fail_data("short write: " + path);
}

Reader::Reader(const std::string& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open: " + path);
  in.seekg(0, std::ios::end);
  std::streamoff n = in.tellg();
  in.seekg(0, std::ios::beg);
  buf_.resize(static_cast<std::size_t>(n));
  if (n > 0)
    in.read(reinterpret_cast<char*>(buf_.data()), n);
  if (!in) fail_data("short read: " + path);
}

Reader Reader::from_bytes(std::vector<unsigned char> bytes) {
  Reader r;
  r.buf_ = std::move(bytes);
  r.path_ = "<memory>";
  return r;
}

template <typename T>
T Reader::get_le() {
  if (pos_ + sizeof(T) > buf_.size())
    fail_data("truncated file: " + path_);
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(buf_[pos_ + i]) << (8 * i);
  pos_ += sizeof(T);
  return v;
}

void Reader::expect_magic(const char tag[5]) {
  if (pos_ + 4 > buf_.size()) fail_data("truncated file: " + path_);
  if (std::memcmp(buf_.data() + pos_, tag, 4) != 0)
    fail_data(std::string("bad magic, expected ") + tag + ": " + path_);
  pos_ += 4;
}

std::uint8_t Reader::u8() {
  if (pos_ + 1 > buf_.size()) fail_data("truncated file: " + path_);
  return buf_[pos_++];
}
std::uint32_t Reader::u32() { return get_le<std::uint32_t>(); }
std::uint64_t Reader::u64() { return get_le<std::uint64_t>(); }

float Reader::f32() {
  std::uint32_t u = get_le<std::uint32_t>();
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}
double Reader::f64() {
  std::uint64_t u = get_le<std::uint64_t>();
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

void Reader::raw(void* out, std::size_t n) {
  if (pos_ + n > buf_.size()) fail_data("truncated file: " + path_);
  std::memcpy(out, buf_.data() + pos_, n);
  pos_ += n;
}

void Reader::verify_checksum() {
  if (buf_.size() < 8) fail_data("file too small for checksum: " + path_);
  std::size_t body = buf_.size() - 8;
  std::uint64_t want = 0;
  for (std::size_t i = 0; i < 8; ++i)
    want |= static_cast<std::uint64_t>(buf_[body + i]) << (8 * i);
  std::uint64_t got = fnv1a64(buf_.data(), body);
  if (want != got) fail_data("checksum mismatch: " + path_);
}

std::string format_double(double v) {
  char tmp[64];
  std::snprintf(tmp, sizeof(tmp), "%.12g", v);
  return tmp;
}

void Csv::header(const std::vector<std::string>& cols) {
  for (const auto& c : cols) cell(c);
  end_row();
}

void Csv::push(const std::string& field) {
  if (row_open_) out_ += ',';
  bool need_quote = field.find_first_of(",\"\n\r") != std::string::npos;
  if (need_quote) {
    out_ += '"';
    for (char ch : field) {
      if (ch == '"') out_ += '"';
      out_ += ch;
    }
    out_ += '"';
  } else {
    out_ += field;
  }
  row_open_ = true;
}

void Csv::cell(const std::string& v) { push(v); }
void Csv::cell(double v) { push(format_double(v)); }
void Csv::cell(std::uint64_t v) { push(std::to_string(v)); }
void Csv::cell(std::int64_t v) { push(std::to_string(v)); }

void Csv::end_row() {
  out_ += '\n';
  row_open_ = false;
}

void Csv::write(const std::string& path) const {
  write_text_file(path, out_);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open: " + path);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open for writing: " + path);
  out << text;
  if (!out) fail_data("short write: " + path);
}

}  // namespace lomap::io
