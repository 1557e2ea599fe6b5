#pragma once

#include "skewfatou/util.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace skewfatou {

// Plain structured text: [section] headers, key = value rows in insertion
// order, free-form table rows. The generation timestamp is confined to one
// leading comment line so re-runs differ in that line only.
class report {
public:
  explicit report(std::string title);

  void stamp_now(); // adds the single "# generated:" header line
  void section(const std::string& name);
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, double value);
  void kv(const std::string& key, cplx value);
  void kv(const std::string& key, std::int64_t value);
  void kv(const std::string& key, bool value);
  void line(const std::string& row);

  const std::string& str() const { return text_; }
  void write(const std::filesystem::path& file) const;

private:
  std::string text_;
};

// Orbit CSV: exact header "k,re_z,im_z,re_w,im_w", 17 significant digits.
struct orbit_entry_row {
  std::int64_t k;
  cplx z, w;
};
std::string orbit_csv(const std::vector<orbit_entry_row>& rows);
void write_text(const std::filesystem::path& file, const std::string& text);

// Binary PGM (P5, maxval 255), row-major from the top-left pixel.
void write_pgm(const std::filesystem::path& file, int width, int height,
               const std::vector<std::uint8_t>& bytes);

} // namespace skewfatou
