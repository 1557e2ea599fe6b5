#include "skewfatou/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace skewfatou {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return std::mt19937_64(mix(mix(seed) ^ mix(stream * 0xda3e39cb94b95bdbULL + 1)));
}

std::string fmt_double(double x, int significant) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x,
                           std::chars_format::general, significant);
  return std::string(buf, res.ptr);
}

std::string fmt_cplx(cplx v, int significant) {
  return fmt_double(v.real(), significant) + "," + fmt_double(v.imag(), significant);
}

double parse_double(const std::string& s) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc()) {
    // from_chars rejects "inf"/"nan" spellings; nobody feeds those on purpose.
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  for (const char* p = res.ptr; p < e; ++p)
    if (*p != ' ' && *p != '\t')
      throw std::invalid_argument("trailing characters after number: '" + s + "'");
  return v;
}

report::report(std::string title) { text_ = "# " + std::move(title) + "\n"; }

void report::stamp_now() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  text_ += std::string("# generated: ") + buf + "\n";
}

void report::section(const std::string& name) { text_ += "\n[" + name + "]\n"; }

void report::kv(const std::string& key, const std::string& value) {
  text_ += key + " = " + value + "\n";
}
void report::kv(const std::string& key, double value) { kv(key, fmt_double(value)); }
void report::kv(const std::string& key, cplx value) { kv(key, fmt_cplx(value)); }
void report::kv(const std::string& key, std::int64_t value) { kv(key, std::to_string(value)); }
void report::kv(const std::string& key, bool value) { kv(key, std::string(value ? "true" : "false")); }
void report::line(const std::string& row) { text_ += row + "\n"; }

void report::write(const std::filesystem::path& file) const { write_text(file, text_); }

std::string orbit_csv(const std::vector<orbit_entry_row>& rows) {
  std::string out = "k,re_z,im_z,re_w,im_w\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + "," + fmt_double(r.z.real()) + "," +
           fmt_double(r.z.imag()) + "," + fmt_double(r.w.real()) + "," +
           fmt_double(r.w.imag()) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

void write_pgm(const std::filesystem::path& file, int width, int height,
               const std::vector<std::uint8_t>& bytes) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("pgm dimensions must be positive");
  if (bytes.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw std::invalid_argument("pgm byte count does not match dimensions");
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
  os << "P5\n" << width << " " << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

} // namespace skewfatou
