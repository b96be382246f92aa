#include "popdyn/config.hpp"

#include <fstream>

namespace popdyn {

namespace {

RateShapeFunction shape_from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  RateShapeFunction shape;
  if (kind == "linear") {
    shape = RateShapeFunction::linear(doc.at("gain").get<double>());
  } else if (kind == "power") {
    shape = RateShapeFunction::power(doc.at("gain").get<double>(),
                                     doc.at("exponent").get<double>());
  } else if (kind == "table") {
    shape = RateShapeFunction::table(
        doc.at("knots").get<std::vector<double>>(),
        doc.at("values").get<std::vector<double>>());
  } else {
    throw std::invalid_argument("unknown shape kind: " + kind);
  }
  if (doc.contains("rate_cap")) shape.rate_cap = doc["rate_cap"].get<double>();
  return shape;
}

nlohmann::json shape_to_json(const RateShapeFunction& shape) {
  nlohmann::json doc;
  switch (shape.kind) {
    case RateShapeFunction::Kind::Linear:
      doc = {{"kind", "linear"}, {"gain", shape.gain}};
      break;
    case RateShapeFunction::Kind::Power:
      doc = {{"kind", "power"},
             {"gain", shape.gain},
             {"exponent", shape.exponent}};
      break;
    case RateShapeFunction::Kind::Table:
      doc = {{"kind", "table"},
             {"knots", shape.knots},
             {"values", shape.values}};
      break;
  }
  doc["rate_cap"] = shape.rate_cap;
  return doc;
}

std::vector<RateShapeFunction> shapes_from_json(const nlohmann::json& doc) {
  std::vector<RateShapeFunction> shapes;
  if (doc.is_array()) {
    for (const auto& item : doc) shapes.push_back(shape_from_json(item));
  } else {
    shapes.push_back(shape_from_json(doc));  // one shared shape
  }
  return shapes;
}

nlohmann::json shapes_to_json(const std::vector<RateShapeFunction>& shapes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : shapes) arr.push_back(shape_to_json(s));
  return arr;
}

}  // namespace

LearningRule rule_from_json(const nlohmann::json& doc) {
  const std::string type = doc.at("type").get<std::string>();
  if (type == "br") return LearningRule::best_response();
  if (type == "logit") return LearningRule::logit(doc.at("beta").get<double>());
  if (type == "ipc") return LearningRule::ipc(shapes_from_json(doc.at("phi")));
  if (type == "sept") return LearningRule::sept(shapes_from_json(doc.at("phi")));
  if (type == "smith")
    return LearningRule::smith(doc.value("lambda", 1.0));
  if (type == "bnn") return LearningRule::bnn(doc.value("lambda", 1.0));
  if (type == "hybrid") {
    return LearningRule::hybrid(
        doc.value("w_br", 0.0), doc.value("w_sept", 0.0),
        doc.value("w_ipc", 0.0),
        doc.contains("sept") ? rule_from_json(doc["sept"])
                             : LearningRule::bnn(1.0),
        doc.contains("ipc") ? rule_from_json(doc["ipc"])
                            : LearningRule::smith(1.0));
  }
  throw std::invalid_argument("unknown rule type: " + type);
}

nlohmann::json rule_to_json(const LearningRule& rule) {
  switch (rule.kind) {
    case LearningRule::Kind::BestResponse:
      return {{"type", "br"}};
    case LearningRule::Kind::Logit:
      return {{"type", "logit"}, {"beta", rule.beta}};
    case LearningRule::Kind::Ipc:
      return {{"type", "ipc"}, {"phi", shapes_to_json(rule.phi)}};
    case LearningRule::Kind::Sept:
      return {{"type", "sept"}, {"phi", shapes_to_json(rule.phi)}};
    case LearningRule::Kind::Hybrid:
      return {{"type", "hybrid"},
              {"w_br", rule.w_br},
              {"w_sept", rule.w_sept},
              {"w_ipc", rule.w_ipc},
              {"sept", rule_to_json(*rule.sept_part)},
              {"ipc", rule_to_json(*rule.ipc_part)}};
  }
  throw std::logic_error("unreachable");
}

std::shared_ptr<Game> game_from_json(const nlohmann::json& doc) {
  const std::string type = doc.at("type").get<std::string>();
  if (type == "congestion") {
    if (!doc.contains("g1_slope")) {
      return std::make_shared<AffineCongestionGame>(
          AffineCongestionGame::standard());
    }
    return std::make_shared<AffineCongestionGame>(
        doc.at("g1_slope").get<double>(), doc.at("g1_intercept").get<double>(),
        doc.at("g2_slope").get<double>(), doc.at("g2_intercept").get<double>(),
        doc.at("r_slope").get<double>(), doc.at("r_intercept").get<double>(),
        doc.at("walk_cost").get<double>(), doc.at("bus_factor").get<double>());
  }
  if (type == "affine") {
    const auto rows = doc.at("matrix").get<std::vector<std::vector<double>>>();
    const auto off = doc.at("offset").get<std::vector<double>>();
    const int n = static_cast<int>(off.size());
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rows.at(i).at(j);
    Vector b = Eigen::Map<const Vector>(off.data(), n);
    return std::make_shared<AffineGame>(A, b);
  }
  throw std::invalid_argument("unknown game type: " + type);
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  cfg.game_json = doc.at("game");
  cfg.game = game_from_json(cfg.game_json);
  cfg.game_id = cfg.game_json.at("type").get<std::string>();

  for (const auto& item : doc.at("rules")) {
    const LearningRule rule = rule_from_json(item);
    cfg.rules.emplace_back(item.value("name", rule.name()), rule);
  }

  for (const auto& item : doc.at("initial_conditions")) {
    const auto values = item.get<std::vector<double>>();
    if (static_cast<int>(values.size()) != cfg.game->dim())
      throw std::invalid_argument("initial condition dimension mismatch");
    cfg.initial_conditions.push_back(
        Eigen::Map<const Vector>(values.data(), values.size()));
  }
  if (cfg.initial_conditions.empty())
    throw std::invalid_argument("at least one initial condition required");

  const auto& integ = doc.at("integrator");
  cfg.integrator.step = integ.value("step", 1e-3);
  cfg.integrator.horizon = integ.value("horizon", 10.0);
  const std::string method = integ.value("method", "rk4");
  if (method == "rk4") {
    cfg.integrator.method = IntegratorConfig::Method::Rk4;
  } else if (method == "euler") {
    cfg.integrator.method = IntegratorConfig::Method::Euler;
  } else {
    throw std::invalid_argument("unknown integrator method: " + method);
  }
  cfg.integrator.eps_tie = integ.value("eps_tie", 1e-9);
  cfg.integrator.smoothing_beta = integ.value("smoothing_beta", 0.0);
  cfg.integrator.record_stride = integ.value("record_stride", 1);
  cfg.integrator.filippov = integ.value("filippov", true);
  if (cfg.integrator.step <= 0.0 || cfg.integrator.horizon <= 0.0)
    throw std::invalid_argument("step and horizon must be positive");

  if (doc.contains("audit")) {
    cfg.audit.enabled = doc["audit"].value("enabled", true);
    cfg.audit.contractive_game = doc["audit"].value("contractive", false);
  }
  cfg.output_dir = doc.value("output_dir", "out");
  cfg.seed = doc.value("seed", std::uint64_t{1});
  cfg.field_resolution = doc.value("field_resolution", 10);
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  nlohmann::json doc;
  in >> doc;
  return from_json(doc);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc;
  doc["game"] = game_json;
  nlohmann::json rule_arr = nlohmann::json::array();
  for (const auto& [name, rule] : this->rules) {
    nlohmann::json r = rule_to_json(rule);
    r["name"] = name;
    rule_arr.push_back(std::move(r));
  }
  doc["rules"] = rule_arr;
  nlohmann::json ics = nlohmann::json::array();
  for (const auto& x0 : initial_conditions) {
    ics.push_back(std::vector<double>(x0.data(), x0.data() + x0.size()));
  }
  doc["initial_conditions"] = ics;
  doc["integrator"] = {
      {"step", integrator.step},
      {"horizon", integrator.horizon},
      {"method",
       integrator.method == IntegratorConfig::Method::Rk4 ? "rk4" : "euler"},
      {"eps_tie", integrator.eps_tie},
      {"smoothing_beta", integrator.smoothing_beta},
      {"record_stride", integrator.record_stride},
      {"filippov", integrator.filippov},
  };
  doc["audit"] = {{"enabled", audit.enabled},
                  {"contractive", audit.contractive_game}};
  doc["output_dir"] = output_dir;
  doc["seed"] = seed;
  doc["field_resolution"] = field_resolution;
  return doc;
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  return nlohmann::json{
      {"config_hash", manifest.config_hash},
      {"tool_version", manifest.tool_version},
      {"files", manifest.files},
      {"wall_seconds", manifest.wall_seconds},
  };
}

nlohmann::json bundled_congestion_config() {
  return nlohmann::json{
      {"game", {{"type", "congestion"}}},
      {"rules",
       nlohmann::json::array({
           {{"type", "br"}, {"name", "br"}},
           {{"type", "smith"}, {"lambda", 1.0}, {"name", "smith"}},
           {{"type", "bnn"}, {"lambda", 1.0}, {"name", "bnn"}},
           {{"type", "hybrid"},
            {"w_br", 1.0 / 3.0},
            {"w_sept", 1.0 / 3.0},
            {"w_ipc", 1.0 / 3.0},
            {"sept", {{"type", "bnn"}, {"lambda", 1.0}}},
            {"ipc", {{"type", "smith"}, {"lambda", 1.0}}},
            {"name", "hybrid"}},
       })},
      {"initial_conditions",
       nlohmann::json::array({
           {1.0, 0.0, 0.0},
           {0.0, 1.0, 0.0},
           {0.0, 0.0, 1.0},
           {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
       })},
      {"integrator",
       {{"step", 1e-3},
        {"horizon", 10.0},
        {"method", "rk4"},
        {"eps_tie", 1e-9},
        {"smoothing_beta", 0.0},
        {"record_stride", 1}}},
      {"audit", {{"enabled", true}, {"contractive", true}}},
      {"output_dir", "out"},
      {"seed", 1},
      {"field_resolution", 10},
  };
}

}  // namespace popdyn
