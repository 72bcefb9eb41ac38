#pragma once

#include <array>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uwhl/image.hpp"

namespace uwhl {

/// Attenuation ratios of one optical water type: beta_br = beta_B / beta_R
/// and beta_bg = beta_B / beta_G.
struct WaterType {
  std::string name;
  double beta_br = 1.0;
  double beta_bg = 1.0;

  /// beta_c / beta_B for c = R, G, B: the exponent that maps t_B to t_c.
  [[nodiscard]] Rgb channel_exponents() const { return {1.0 / beta_br, 1.0 / beta_bg, 1.0}; }

  friend bool operator==(const WaterType&, const WaterType&) = default;
};

inline void validate(const WaterType& wt) {
  if (wt.name.empty()) throw Error("water type with empty name");
  if (!(wt.beta_br > 0.0) || !(wt.beta_bg > 0.0) || !std::isfinite(wt.beta_br) || !std::isfinite(wt.beta_bg)) {
    throw Error("water type '" + wt.name + "': non-positive ratio");
  }
}

class WaterTypeLibrary {
 public:
  WaterTypeLibrary() = default;
  explicit WaterTypeLibrary(std::vector<WaterType> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error("empty library");
    std::set<std::string> names;
    for (const auto& e : entries_) {
      validate(e);
      if (!names.insert(e.name).second) throw Error("duplicate name '" + e.name + "'");
    }
  }

  [[nodiscard]] const std::vector<WaterType>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const WaterType& operator[](std::size_t i) const { return entries_[i]; }

  [[nodiscard]] const WaterType* find(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  [[nodiscard]] const WaterType& at(std::string_view name) const {
    if (const auto* e = find(name)) return *e;
    throw Error("unknown water type '" + std::string(name) + "'");
  }

  [[nodiscard]] std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return i;
    throw Error("unknown water type '" + std::string(name) + "'");
  }

  friend bool operator==(const WaterTypeLibrary&, const WaterTypeLibrary&) = default;

 private:
  std::vector<WaterType> entries_;
};

/// Diffuse attenuation coefficients K_d (1/m) of the Jerlov water types at the
/// peak camera sensitivities 600 nm (R), 525 nm (G) and 475 nm (B).
///
/// Values are read off the Jerlov classification curves (Austin & Petzold 1986
/// measurements as tabulated in Mobley, "Light and Water", 1994) and rounded to
/// three or four significant digits. The camera response is treated as a delta
/// at each wavelength, so a channel coefficient is the curve value at that
/// wavelength. Type I is pinned to K ratios of 0.11 / 0.46, the usual pair for
/// clear open-ocean water.
struct JerlovCoefficients {
  const char* name;
  double k600;
  double k525;
  double k475;
};

inline constexpr std::array<JerlovCoefficients, 10> kJerlovTable{{
    {"I", 0.1782, 0.0426, 0.0196},
    {"IA", 0.1800, 0.0452, 0.0225},
    {"IB", 0.1826, 0.0480, 0.0256},
    {"II", 0.1980, 0.0590, 0.0370},
    {"III", 0.2350, 0.0840, 0.0660},
    {"1C", 0.3400, 0.1400, 0.1480},
    {"3C", 0.4200, 0.1900, 0.2300},
    {"5C", 0.5200, 0.2700, 0.3600},
    {"7C", 0.6800, 0.4200, 0.5800},
    {"9C", 0.9600, 0.6700, 0.9500},
}};

/// The ten Jerlov types, open ocean first, as (beta_B/beta_R, beta_B/beta_G).
inline WaterTypeLibrary builtin_library() {
  std::vector<WaterType> entries;
  entries.reserve(kJerlovTable.size());
  for (const auto& k : kJerlovTable) {
    entries.push_back({k.name, k.k475 / k.k600, k.k475 / k.k525});
  }
  return WaterTypeLibrary(std::move(entries));
}

/// Parses `name beta_br beta_bg` lines. Blank lines and `#` comments are ignored.
inline WaterTypeLibrary parse_library(std::istream& is, const std::string& source = "<stream>") {
  std::vector<WaterType> entries;
  std::set<std::string> names;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    const auto where = source + " line " + std::to_string(lineno);
    std::string a;
    std::string b;
    if (!(ls >> a >> b)) throw Error(where + ": parse error, expected 'name beta_br beta_bg'");
    std::string extra;
    if (ls >> extra) throw Error(where + ": parse error, trailing field '" + extra + "'");
    auto number = [&](const std::string& tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') throw Error(where + ": parse error, bad number '" + tok + "'");
      return v;
    };
    WaterType wt{name, number(a), number(b)};
    if (!(wt.beta_br > 0.0) || !(wt.beta_bg > 0.0)) throw Error(where + ": non-positive ratio");
    if (!names.insert(name).second) throw Error(where + ": duplicate name '" + name + "'");
    entries.push_back(std::move(wt));
  }
  if (entries.empty()) throw Error("empty library");
  return WaterTypeLibrary(std::move(entries));
}

inline WaterTypeLibrary load_library(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read water-type library '" + path + "'");
  return parse_library(is, path);
}

/// "builtin" selects the Jerlov table; anything else is a library file path.
inline WaterTypeLibrary resolve_library(const std::string& source) {
  return source == "builtin" ? builtin_library() : load_library(source);
}

/// Writes the library in the format `parse_library` reads, exactly round-tripping doubles.
inline void write_library(std::ostream& os, const WaterTypeLibrary& lib) {
  char buf[96];
  for (const auto& e : lib.entries()) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g\n", e.beta_br, e.beta_bg);
    os << e.name << buf;
  }
}

inline void save_library(const WaterTypeLibrary& lib, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  write_library(os, lib);
}

}  // namespace uwhl
