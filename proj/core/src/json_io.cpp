#include "shiftdom/json_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace shiftdom {

namespace {

using njson = nlohmann::ordered_json;

njson cube_to_json(int level, const std::vector<std::int64_t>& index) {
  njson j;
  j["level"] = level;
  j["index"] = index;
  return j;
}

njson cube_to_json(const DyadicCube& q) { return cube_to_json(q.level, q.index); }

std::pair<int, std::vector<std::int64_t>> cube_fields_from_json(const njson& j) {
  if (!j.is_object() || !j.contains("level") || !j.contains("index"))
    throw ConfigError("cube entries need level and index");
  return {j.at("level").get<int>(),
          j.at("index").get<std::vector<std::int64_t>>()};
}

DyadicCube cube_from_json(const njson& j) {
  auto [level, index] = cube_fields_from_json(j);
  return DyadicCube{level, std::move(index)};
}

njson root_to_json(const RootCube& root) {
  njson j;
  j["d"] = root.dim;
  j["side"] = rat_to_string(root.side);
  njson corner = njson::array();
  for (const auto& c : root.corner) corner.push_back(rat_to_string(c));
  j["corner"] = std::move(corner);
  j["depth"] = root.depth;
  return j;
}

RootCube root_from_json(const njson& j) {
  if (!j.is_object()) throw ConfigError("root must be an object");
  for (const char* key : {"d", "side", "corner", "depth"})
    if (!j.contains(key))
      throw ConfigError(std::string("root is missing \"") + key + "\"");
  std::vector<Rat> corner;
  for (const auto& c : j.at("corner"))
    corner.push_back(rat_from_string(c.get<std::string>()));
  return RootCube::make(j.at("d").get<int>(),
                        rat_from_string(j.at("side").get<std::string>()),
                        std::move(corner), j.at("depth").get<int>());
}

njson parse(const std::string& text) {
  try {
    return njson::parse(text);
  } catch (const njson::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

// nlohmann type errors (wrong field types, missing array nesting) surface as
// exceptions of its own hierarchy; normalize them to config errors.
template <class Fn>
auto guarded(Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const njson::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

} // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

std::string instance_to_json(const ShiftInstance<Rat>& inst) {
  njson j;
  j["root"] = root_to_json(inst.root);
  j["m"] = inst.m;
  njson alpha = njson::array();
  for (const auto& [q, a] : inst.alpha.values) {
    njson entry;
    entry["cube"] = cube_to_json(q);
    entry["value"] = rat_to_string(a);
    alpha.push_back(std::move(entry));
  }
  j["alpha"] = std::move(alpha);
  njson functions = njson::array();
  for (const auto& f : inst.fs) {
    njson leaves = njson::array();
    for (const auto& v : f.leaves()) leaves.push_back(rat_to_string(v));
    functions.push_back(std::move(leaves));
  }
  j["functions"] = std::move(functions);
  return j.dump(2) + "\n";
}

ShiftInstance<Rat> instance_from_json(const std::string& text) {
  const njson j = parse(text);
  return guarded([&] {
    for (const char* key : {"root", "m", "alpha", "functions"})
      if (!j.contains(key))
        throw ConfigError(std::string("instance is missing \"") + key + "\"");
    const RootCube root = root_from_json(j.at("root"));
    std::map<DyadicCube, Rat> alpha;
    for (const auto& entry : j.at("alpha")) {
      if (!entry.contains("cube") || !entry.contains("value"))
        throw ConfigError("alpha entries need cube and value");
      const bool fresh =
          alpha
              .emplace(cube_from_json(entry.at("cube")),
                       rat_from_string(entry.at("value").get<std::string>()))
              .second;
      if (!fresh) throw ConfigError("duplicate alpha cube");
    }
    std::vector<GridFunction<Rat>> fs;
    for (const auto& leaves_json : j.at("functions")) {
      std::vector<Rat> leaves;
      for (const auto& v : leaves_json)
        leaves.push_back(rat_from_string(v.get<std::string>()));
      if (leaves.size() != root.leaf_count())
        throw ConfigError("function leaf array does not match the lattice");
      fs.push_back(GridFunction<Rat>::from_leaves(root, std::move(leaves)));
    }
    return ShiftInstance<Rat>::make(
        root, j.at("m").get<int>(),
        CoefficientSequence<Rat>::make(root, std::move(alpha)), std::move(fs));
  });
}

std::string family_to_json(const SparseFamily& fam) {
  njson j;
  j["root"] = root_to_json(fam.root);
  j["eta"] = rat_to_string(fam.eta);
  njson cubes = njson::array();
  for (const auto& q : fam.cubes) cubes.push_back(cube_to_json(q));
  j["cubes"] = std::move(cubes);
  return j.dump(2) + "\n";
}

SparseFamily family_from_json(const std::string& text) {
  const njson j = parse(text);
  return guarded([&] {
    for (const char* key : {"root", "eta", "cubes"})
      if (!j.contains(key))
        throw ConfigError(std::string("family is missing \"") + key + "\"");
    std::set<DyadicCube> cubes;
    for (const auto& c : j.at("cubes")) cubes.insert(cube_from_json(c));
    return SparseFamily::make(root_from_json(j.at("root")), std::move(cubes),
                              rat_from_string(j.at("eta").get<std::string>()));
  });
}

std::string weighted_families_to_json(
    const std::vector<WeightedFamily<Rat>>& families) {
  njson arr = njson::array();
  for (const auto& fam : families) {
    njson j;
    j["rho"] = fam.rho.thirds;
    j["m"] = fam.m;
    j["weight"] = rat_to_string(fam.weight);
    njson cubes = njson::array();
    for (const auto& q : fam.cubes) cubes.push_back(cube_to_json(q.level, q.index));
    j["family"] = std::move(cubes);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<WeightedFamily<Rat>> weighted_families_from_json(
    const std::string& text) {
  const njson j = parse(text);
  return guarded([&] {
    if (!j.is_array()) throw ConfigError("weighted families must be an array");
    std::vector<WeightedFamily<Rat>> out;
    for (const auto& entry : j) {
      for (const char* key : {"rho", "m", "weight", "family"})
        if (!entry.contains(key))
          throw ConfigError(std::string("weighted family is missing \"") + key +
                            "\"");
      WeightedFamily<Rat> fam;
      fam.rho = GridShift{entry.at("rho").get<std::vector<int>>()};
      fam.m = entry.at("m").get<int>();
      fam.weight = rat_from_string(entry.at("weight").get<std::string>());
      for (const auto& c : entry.at("family")) {
        auto [level, index] = cube_fields_from_json(c);
        fam.cubes.push_back(ShiftedCube{fam.rho, level, std::move(index)});
      }
      out.push_back(std::move(fam));
    }
    return out;
  });
}

std::string domination_to_json(const DominationSummary& s) {
  njson j;
  njson cubes = njson::array();
  for (const auto& q : s.family) cubes.push_back(cube_to_json(q));
  j["family"] = std::move(cubes);
  j["c_theory"] = s.c_theory;
  j["empirical_ratio"] = s.empirical_ratio;
  j["m"] = s.m;
  j["k"] = s.k;
  j["sparsity"] = njson{{"eta", rat_to_string(s.eta)}, {"pass", s.sparsity_pass}};
  j["certified"] = s.certified;
  return j.dump(2) + "\n";
}

} // namespace shiftdom
