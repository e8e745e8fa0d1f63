#pragma once

#include <cstdio>
#include <filesystem>

#include "mckv/parabolic/trajectory.hpp"
#include "mckv/spectral/io.hpp"

namespace mckv {

namespace detail {
inline std::string node_name(const char* prefix, int m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05d", prefix, m);
  return buf;
}
}  // namespace detail

/// Directory layout: node_00000.{csv,json} ... node_M, optional
/// stage_00000 ... stage_{M-1}, and manifest.json {T, M, scheme, grid, stages}.
inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr,
                             const nlohmann::json& extra = nlohmann::json::object()) {
  std::filesystem::create_directories(dir);
  for (int m = 0; m <= tr.M; ++m)
    write_field(dir / detail::node_name("node", m), tr.nodes[static_cast<std::size_t>(m)]);
  for (std::size_t m = 0; m < tr.stages.size(); ++m)
    write_field(dir / detail::node_name("stage", static_cast<int>(m)), tr.stages[m]);
  nlohmann::json manifest = {
      {"T", tr.T},
      {"M", tr.M},
      {"scheme", to_string(tr.scheme)},
      {"grid", {{"d", tr.grid().d}, {"n", tr.grid().n}}},
      {"stages", tr.has_stages()},
  };
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  auto os = detail::open_out(dir / "manifest.json");
  os << manifest.dump(2) << "\n";
}

inline Trajectory read_trajectory(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  {
    auto is = detail::open_in(dir / "manifest.json");
    is >> manifest;
  }
  Trajectory tr;
  tr.T = manifest.at("T").get<double>();
  tr.M = manifest.at("M").get<int>();
  tr.scheme = scheme_from_string(manifest.at("scheme").get<std::string>());
  const Grid g(manifest.at("grid").at("d").get<int>(), manifest.at("grid").at("n").get<int>());
  for (int m = 0; m <= tr.M; ++m) {
    tr.nodes.push_back(read_field(dir / detail::node_name("node", m)));
    require_same_grid(g, tr.nodes.back().grid(), "read_trajectory");
  }
  if (manifest.value("stages", false))
    for (int m = 0; m < tr.M; ++m) tr.stages.push_back(read_field(dir / detail::node_name("stage", m)));
  return tr;
}

}  // namespace mckv
