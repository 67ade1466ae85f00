#include "snmap/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "snmap/errors.hpp"

namespace snmap {

using nlohmann::json;

namespace {

JumpLaw parse_law(const json& j) {
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return JumpLaw::none();
  if (kind == "exponential") return JumpLaw::exponential(j.at("jump_rate").get<double>());
  if (kind == "erlang") return JumpLaw::erlang(j.value("shape", 1), j.at("jump_rate").get<double>());
  if (kind == "mixture") {
    std::vector<ErlangPhase> phases;
    for (const auto& c : j.at("components"))
      phases.push_back({c.at("weight").get<double>(), c.value("shape", 1), c.at("jump_rate").get<double>()});
    return JumpLaw::mixture(std::move(phases));
  }
  throw ModelParseError("unknown jump kind '" + kind + "'");
}

json law_to_json(const JumpLaw& law) {
  json j;
  j["kind"] = law.kind_name();
  if (law.is_none()) return j;
  if (law.kind() == JumpLaw::Kind::Mixture) {
    j["components"] = json::array();
    for (const auto& ph : law.phases())
      j["components"].push_back({{"weight", ph.weight}, {"shape", ph.shape}, {"jump_rate", ph.rate}});
  } else {
    j["shape"] = law.phases()[0].shape;
    j["jump_rate"] = law.phases()[0].rate;
  }
  return j;
}

template <class T>
std::vector<T> per_state(const json& doc, const char* key, int n, T fallback) {
  if (!doc.contains(key)) return std::vector<T>(static_cast<std::size_t>(n), fallback);
  auto v = doc.at(key).get<std::vector<T>>();
  if (static_cast<int>(v.size()) != n) throw ModelShapeMismatch(std::string("'") + key + "' needs one entry per state");
  return v;
}

}  // namespace

MapModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ModelParseError(e.what());
  }
  try {
    const int n = doc.at("states").get<int>();
    if (n < 1) throw ModelShapeMismatch("'states' must be >= 1");
    const auto flat = doc.at("Q").get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != n * n) throw ModelShapeMismatch("'Q' must hold states^2 entries");
    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = flat[static_cast<std::size_t>(i * n + j)];

    const auto drift = per_state<double>(doc, "drift", n, 0.0);
    const auto sigma2 = per_state<double>(doc, "sigma2", n, 0.0);
    std::vector<LevyComponent> comps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      comps[static_cast<std::size_t>(i)].drift = drift[static_cast<std::size_t>(i)];
      comps[static_cast<std::size_t>(i)].sigma2 = sigma2[static_cast<std::size_t>(i)];
    }
    if (doc.contains("jumps")) {
      const auto& jumps = doc.at("jumps");
      if (static_cast<int>(jumps.size()) != n) throw ModelShapeMismatch("'jumps' needs one list per state");
      for (int i = 0; i < n; ++i)
        for (const auto& jp : jumps[static_cast<std::size_t>(i)])
          comps[static_cast<std::size_t>(i)].jumps.push_back({jp.at("rate").get<double>(), parse_law(jp)});
    }

    std::vector<std::vector<JumpLaw>> sw(static_cast<std::size_t>(n), std::vector<JumpLaw>(static_cast<std::size_t>(n)));
    if (doc.contains("switch_jumps")) {
      for (const auto& s : doc.at("switch_jumps")) {
        const int from = s.at("from").get<int>();
        const int to = s.at("to").get<int>();
        if (from < 1 || from > n || to < 1 || to > n) throw ModelShapeMismatch("switch jump state out of range");
        sw[static_cast<std::size_t>(from - 1)][static_cast<std::size_t>(to - 1)] = parse_law(s);
      }
    }
    return MapModel(std::move(q), std::move(comps), std::move(sw));
  } catch (const json::exception& e) {
    throw ModelParseError(e.what());
  }
}

MapModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string dump_model(const MapModel& model) {
  const int n = model.states();
  json doc;
  doc["states"] = n;
  std::vector<double> flat;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) flat.push_back(model.generator()(i, j));
  doc["Q"] = flat;
  std::vector<double> drift, sigma2;
  json jumps = json::array();
  for (const auto& c : model.components()) {
    drift.push_back(c.drift);
    sigma2.push_back(c.sigma2);
    json list = json::array();
    for (const auto& jp : c.jumps) {
      json e = law_to_json(jp.law);
      e["rate"] = jp.rate;
      list.push_back(e);
    }
    jumps.push_back(list);
  }
  doc["drift"] = drift;
  doc["sigma2"] = sigma2;
  doc["jumps"] = jumps;
  json sw = json::array();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const JumpLaw& law = model.stored_switch_jump(i, j);
      if (law.is_none()) continue;
      json e = law_to_json(law);
      e["from"] = i + 1;
      e["to"] = j + 1;
      sw.push_back(e);
    }
  doc["switch_jumps"] = sw;
  return doc.dump(2);
}

}  // namespace snmap
