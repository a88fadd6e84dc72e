#pragma once

// Instance JSON and plain XYZ point files.

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lcp/error.hpp"
#include "lcp/geom3.hpp"
#include "lcp/oracle.hpp"

namespace lcp::io {

using nlohmann::json;

inline json points_to_json(const PointSet& S) {
  json arr = json::array();
  for (const auto& p : S) arr.push_back({p.x(), p.y(), p.z()});
  return arr;
}

inline PointSet points_from_json(const json& arr, const char* what) {
  if (!arr.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of points");
  PointSet S;
  S.reserve(arr.size());
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 3) throw Error(ErrorCode::ParseError, std::string(what) + ": point needs 3 coordinates");
    Point3 p;
    for (int d = 0; d < 3; ++d) {
      if (!row[d].is_number()) throw Error(ErrorCode::ParseError, std::string(what) + ": coordinate is not a number");
      p[d] = row[d].get<double>();
    }
    if (!p.allFinite()) throw Error(ErrorCode::ParseError, std::string(what) + ": coordinate is not finite");
    S.push_back(p);
  }
  return S;
}

inline json motion_to_json(const RigidMotion& mu) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(mu.rotation(r, c));
  return {{"rotation", rot}, {"translation", {mu.translation.x(), mu.translation.y(), mu.translation.z()}}};
}

inline RigidMotion motion_from_json(const json& j) {
  try {
    const auto& rot = j.at("rotation");
    const auto& tr = j.at("translation");
    if (rot.size() != 9 || tr.size() != 3) throw Error(ErrorCode::ParseError, "motion needs 9 rotation and 3 translation numbers");
    RigidMotion mu;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) mu.rotation(r, c) = rot[3 * r + c].get<double>();
    for (int d = 0; d < 3; ++d) mu.translation[d] = tr[d].get<double>();
    if (!mu.rotation.allFinite() || !mu.translation.allFinite()) throw Error(ErrorCode::ParseError, "motion is not finite");
    return mu;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad motion: ") + e.what());
  }
}

inline json instance_to_json(const oracle::Instance& inst) {
  json j{{"eps", inst.eps}, {"P", points_to_json(inst.P)}, {"Q", points_to_json(inst.Q)}};
  if (inst.truth) {
    json t = motion_to_json(inst.truth->motion);
    json pairs = json::array();
    for (const auto& [q, p] : inst.truth->pairs) pairs.push_back({q, p});
    t["pairs"] = pairs;
    t["k"] = inst.truth->k;
    t["noise"] = inst.truth->noise;
    j["truth"] = t;
  }
  return j;
}

inline oracle::Instance instance_from_json(const json& j) {
  try {
    oracle::Instance inst;
    inst.eps = j.value("eps", 0.0);
    if (!(inst.eps >= 0.0) || !std::isfinite(inst.eps)) throw Error(ErrorCode::ParseError, "eps must be a finite number >= 0");
    inst.P = points_from_json(j.at("P"), "P");
    inst.Q = points_from_json(j.at("Q"), "Q");
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      oracle::Truth truth;
      truth.motion = motion_from_json(t);
      for (const auto& pr : t.value("pairs", json::array())) {
        const auto q = pr.at(0).get<Index>(), p = pr.at(1).get<Index>();
        if (q >= inst.Q.size() || p >= inst.P.size()) throw Error(ErrorCode::ParseError, "truth pair out of range");
        truth.pairs.emplace_back(q, p);
      }
      truth.k = t.value("k", truth.pairs.size());
      truth.noise = t.value("noise", 0.0);
      inst.truth = std::move(truth);
    }
    return inst;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad instance: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline oracle::Instance read_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

/// Whitespace separated "x y z" per line; blank lines and '#' comments skipped.
inline PointSet read_xyz(std::istream& in) {
  PointSet S;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;
    std::string rest;
    if (!(ls >> y >> z) || (ls >> rest))
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected three coordinates");
    const Point3 p(x, y, z);
    if (!p.allFinite()) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": coordinate is not finite");
    S.push_back(p);
  }
  return S;
}

inline PointSet read_xyz_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_xyz(in);
}

}  // namespace lcp::io
