#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mckv/spectral/field.hpp"

namespace mckv {

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error("cannot open for writing: " + p.string());
  os << std::setprecision(17);
  return os;
}
inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw Error("cannot open for reading: " + p.string());
  return is;
}
}  // namespace detail

/// Writes `<base>.csv` (columns k_1..k_d,re,im; modes with |k| <= K in
/// lexicographic order) and `<base>.json` ({d, n, K}). K < 0 stores every
/// resolved mode, recorded as K = kmax * sqrt(d) rounded up.
inline void write_field(const std::filesystem::path& base, const SpectralField& f, int K = -1) {
  const Grid& g = f.grid();
  if (K < 0) K = static_cast<int>(std::ceil(g.kmax() * std::sqrt(static_cast<double>(g.d))));
  auto csv = detail::open_out(base.string() + ".csv");
  for (int j = 0; j < g.d; ++j) csv << "k_" << (j + 1) << ",";
  csv << "re,im\n";
  for (const auto& k : g.resolved_modes()) {
    if (k.norm2() > K * K) continue;
    for (int j = 0; j < g.d; ++j) csv << k.k[j] << ",";
    const cplx c = f[k];
    csv << c.real() << "," << c.imag() << "\n";
  }
  auto side = detail::open_out(base.string() + ".json");
  side << nlohmann::json{{"d", g.d}, {"n", g.n}, {"K", K}}.dump(2) << "\n";
}

inline SpectralField read_field(const std::filesystem::path& base) {
  nlohmann::json meta;
  {
    auto side = detail::open_in(base.string() + ".json");
    side >> meta;
  }
  const Grid g(meta.at("d").get<int>(), meta.at("n").get<int>());
  SpectralField f(g);
  auto csv = detail::open_in(base.string() + ".csv");
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    ModeIndex k;
    k.d = g.d;
    for (int j = 0; j < g.d; ++j) {
      std::getline(ss, tok, ',');
      k.k[j] = std::stoi(tok);
    }
    std::getline(ss, tok, ',');
    const double re = std::stod(tok);
    std::getline(ss, tok, ',');
    const double im = std::stod(tok);
    if (!g.resolved(k)) throw InvalidArgument("read_field: mode outside grid " + k.str());
    f[k] = cplx{re, im};
  }
  return f;
}

}  // namespace mckv
