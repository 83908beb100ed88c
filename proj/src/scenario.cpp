#include "canesim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "canesim/rng.hpp"

namespace canesim {

namespace {

using nlohmann::json;

// Pulls fields out of one JSON object while tracking which keys were
// consumed, so anything left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_ + ": expected an object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw config_error(path_ + ": missing required key '" + key + "'");
    return convert<T>(key);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string child_path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw config_error(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  template <typename T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw config_error(path_ + "." + key + ": wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FarmerTypeParams parse_type_params(const json& j, const std::string& path,
                                   const FarmerTypeParams& defaults) {
  ObjectReader r(j, path);
  FarmerTypeParams p = defaults;
  p.per_person_charge = r.get("per_person_charge", p.per_person_charge);
  p.savings_mean = r.get("savings_mean", p.savings_mean);
  p.savings_sd = r.get("savings_sd", p.savings_sd);
  p.land_mean = r.get("land_mean", p.land_mean);
  p.land_sd = r.get("land_sd", p.land_sd);
  p.noise_sigma = r.get("noise_sigma", p.noise_sigma);
  r.finish();
  return p;
}

CropSpec parse_crop(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  CropSpec c;
  c.id = r.require<std::string>("id");
  c.end_cycle = r.get("end_cycle", 1);
  c.harvest_cycle = r.get("harvest_cycle", c.end_cycle);
  c.fert_pest_cost = r.get("fert_pest_cost", 0.0);
  c.labor_requirement = r.get("labor_requirement", 0.0);
  c.water_requirement = r.get("water_requirement", 0.0);
  c.labor_flexibility = r.get("labor_flexibility", 1.0);
  c.water_flexibility = r.get("water_flexibility", 1.0);
  c.prone_to_pest = r.get("prone_to_pest", 1);
  c.produce = r.get("produce", 0.0);
  c.initial_cost = r.get("initial_cost", 0.0);
  c.minimum_produce = r.get("minimum_produce", 0.0);
  c.crop_mult_factor = r.get("crop_mult_factor", 1.0);
  std::string channel = r.get<std::string>("channel", "market");
  if (channel == "market") {
    c.channel = Channel::Market;
  } else if (channel == "mill") {
    c.channel = Channel::Mill;
  } else {
    throw config_error(path + ".channel: must be 'market' or 'mill'");
  }
  r.finish();
  return c;
}

TradeParams parse_trade(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TradeParams t;
  t.factor_of_import = r.get("factor_of_import", 0.0);
  t.factor_of_export = r.get("factor_of_export", 0.0);
  t.maximum_import = r.get("maximum_import", 0.0);
  t.maximum_export = r.get("maximum_export", 0.0);
  t.import_tax = r.get("import_tax", 0.0);
  t.export_tax = r.get("export_tax", 0.0);
  t.import_price = r.get("import_price", 0.0);
  t.export_price = r.get("export_price", 0.0);
  r.finish();
  return t;
}

}  // namespace

int ScenarioConfig::commodity_index(const std::string& id) const {
  for (std::size_t i = 0; i < commodities.size(); ++i)
    if (commodities[i].id == id) return static_cast<int>(i);
  return -1;
}

int ScenarioConfig::crop_index(const std::string& id) const {
  for (std::size_t i = 0; i < crops.size(); ++i)
    if (crops[i].id == id) return static_cast<int>(i);
  return -1;
}

void ScenarioConfig::validate() const {
  if (months_per_step < 1) throw config_error("months_per_step: must be >= 1");
  if (steps < 0) throw config_error("steps: must be >= 0");
  if (inflation_rate < 0) throw config_error("inflation_rate: must be >= 0");
  if (demand_variation_limit < 0) throw config_error("demand_variation_limit: must be >= 0");
  if (frp < 0) throw config_error("frp: must be >= 0");
  if (population.size < 10) throw config_error("population.size: must be >= 10");
  double frac_sum = population.frac_type1 + population.frac_type2 + population.frac_type3;
  if (std::abs(frac_sum - 1.0) > 1e-9)
    throw config_error("population.fractions: must sum to 1, got " + std::to_string(frac_sum));
  if (population.frac_type1 < 0 || population.frac_type2 < 0 || population.frac_type3 < 0)
    throw config_error("population.fractions: must be >= 0");
  if (crops.empty()) throw config_error("crops: at least one crop is required");
  std::set<std::string> ids;
  for (const auto& c : crops) {
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("crops: ") + e.what());
    }
    if (!ids.insert(c.id).second) throw config_error("crops: duplicate id '" + c.id + "'");
  }
  if (wages.size() != crops.size()) throw config_error("labor.wages: must cover every crop");
  for (double w : wages)
    if (w <= 0) throw config_error("labor.wages: wages must be > 0");
  for (const auto& com : commodities) {
    if (com.has_market && com.initial_price <= 0)
      throw config_error("market." + com.id + ".initial_price: must be > 0");
    if (com.has_market && com.usual_demand <= 0)
      throw config_error("market." + com.id + ".usual_demand: must be > 0");
  }
  try {
    storage.validate(commodities.size());
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  if (mill.present) {
    if (mill.crop < 0 || crops[static_cast<std::size_t>(mill.crop)].channel != Channel::Mill)
      throw config_error("mill.crop: must name a crop with channel 'mill'");
    if (mill.commodity < 0 ||
        !commodities[static_cast<std::size_t>(mill.commodity)].has_market)
      throw config_error("mill.commodity: must name a market commodity");
    try {
      mill.yields.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("mill: ") + e.what());
    }
    if (mill.ethanol_requirement < 0) throw config_error("mill.ethanol_requirement: must be >= 0");
    if (mill.ethanol_price < 0) throw config_error("mill.ethanol_price: must be >= 0");
  }
  for (const auto& c : crops) {
    if (c.channel == Channel::Mill && !mill.present)
      throw config_error("crops: crop '" + c.id + "' sells to a mill but no mill is configured");
  }
  if (water.agent_present && water.agent_price < 0)
    throw config_error("water.agent_price: must be >= 0");
  if (water.lender_share < 0 || water.lender_share > 1)
    throw config_error("water.lender_share: must be in [0,1]");
  if (loans.term_steps < 1) throw config_error("loans.term_steps: must be >= 1");
  if (loans.credit_unit < 0) throw config_error("loans.credit_unit: must be >= 0");
  if (loans.land_value_per_ha < 0) throw config_error("loans.land_value_per_ha: must be >= 0");
  if (policy_delta < 0 || policy_delta >= 1) throw config_error("policy.delta: must be in [0,1)");
}

ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig cfg;
  ObjectReader root(j, "scenario");

  cfg.months_per_step = root.get("months_per_step", cfg.months_per_step);
  cfg.steps = root.get("steps", cfg.steps);
  cfg.seed = root.get("seed", cfg.seed);
  cfg.inflation_rate = root.get("inflation_rate", cfg.inflation_rate);
  cfg.per_cycle_costs = root.get("per_cycle_costs", cfg.per_cycle_costs);
  cfg.demand_variation_limit = root.get("demand_variation_limit", cfg.demand_variation_limit);
  cfg.frp = root.get("frp", cfg.frp);
  std::string mode = root.get<std::string>("pricing_mode", "absolute");
  if (mode == "absolute") {
    cfg.pricing_mode = PricingMode::Absolute;
  } else if (mode == "trend") {
    cfg.pricing_mode = PricingMode::Trend;
  } else {
    throw config_error("pricing_mode: must be 'absolute' or 'trend'");
  }

  if (root.has("population")) {
    ObjectReader r(root.raw("population"), "population");
    cfg.population.size = r.get("size", cfg.population.size);
    if (r.has("fractions")) {
      ObjectReader fr(r.raw("fractions"), "population.fractions");
      cfg.population.frac_type1 = fr.get("type1", cfg.population.frac_type1);
      cfg.population.frac_type2 = fr.get("type2", cfg.population.frac_type2);
      cfg.population.frac_type3 = fr.get("type3", cfg.population.frac_type3);
      fr.finish();
    }
    r.finish();
  }

  if (root.has("farmers")) {
    ObjectReader r(root.raw("farmers"), "farmers");
    if (r.has("type1")) cfg.farmers.type1 = parse_type_params(r.raw("type1"), "farmers.type1", cfg.farmers.type1);
    if (r.has("type2")) cfg.farmers.type2 = parse_type_params(r.raw("type2"), "farmers.type2", cfg.farmers.type2);
    if (r.has("type3")) cfg.farmers.type3 = parse_type_params(r.raw("type3"), "farmers.type3", cfg.farmers.type3);
    cfg.farmers.base_credit_rating = r.get("base_credit_rating", cfg.farmers.base_credit_rating);
    cfg.farmers.min_land = r.get("min_land", cfg.farmers.min_land);
    cfg.farmers.safety_buffer_fraction =
        r.get("safety_buffer_fraction", cfg.farmers.safety_buffer_fraction);
    r.finish();
  }

  if (!root.has("crops")) throw config_error("scenario: missing required key 'crops'");
  const json& crops_j = root.raw("crops");
  if (!crops_j.is_array()) throw config_error("crops: expected an array");
  for (std::size_t i = 0; i < crops_j.size(); ++i)
    cfg.crops.push_back(parse_crop(crops_j[i], "crops[" + std::to_string(i) + "]"));

  cfg.wages.assign(cfg.crops.size(), 1000.0);
  if (root.has("labor")) {
    ObjectReader r(root.raw("labor"), "labor");
    if (r.has("wages")) {
      const json& w = r.raw("wages");
      ObjectReader wr(w, "labor.wages");
      for (std::size_t i = 0; i < cfg.crops.size(); ++i)
        cfg.wages[i] = wr.get(cfg.crops[i].id, cfg.wages[i]);
      wr.finish();
    }
    r.finish();
  }

  // commodity table: crops first (in crop order), then processed goods
  for (std::size_t i = 0; i < cfg.crops.size(); ++i) {
    CommodityConfig com;
    com.id = cfg.crops[i].id;
    com.crop = static_cast<int>(i);
    com.has_market = cfg.crops[i].channel == Channel::Market;
    com.crop_mult_factor = cfg.crops[i].crop_mult_factor;
    com.initial_price = cfg.crops[i].crop_mult_factor;  // base-1 price
    cfg.commodities.push_back(com);
  }
  if (root.has("processed_commodities")) {
    const json& pc = root.raw("processed_commodities");
    if (!pc.is_array()) throw config_error("processed_commodities: expected an array");
    for (std::size_t i = 0; i < pc.size(); ++i) {
      ObjectReader r(pc[i], "processed_commodities[" + std::to_string(i) + "]");
      CommodityConfig com;
      com.id = r.require<std::string>("id");
      com.crop = -1;
      com.has_market = true;
      com.crop_mult_factor = r.get("crop_mult_factor", 1.0);
      com.initial_price = r.get("initial_price", com.crop_mult_factor);
      r.finish();
      cfg.commodities.push_back(com);
    }
  }

  if (root.has("market")) {
    ObjectReader r(root.raw("market"), "market");
    for (auto& com : cfg.commodities) {
      if (!r.has(com.id)) continue;
      ObjectReader cr(r.raw(com.id), "market." + com.id);
      com.has_market = true;
      com.initial_price = cr.get("initial_price", com.initial_price);
      com.usual_demand = cr.get("usual_demand", com.usual_demand);
      com.initial_stock = cr.get("initial_stock", com.initial_stock);
      com.crop_mult_factor = cr.get("crop_mult_factor", com.crop_mult_factor);
      cr.finish();
    }
    r.finish();
  }
  for (auto& com : cfg.commodities) {
    if (com.has_market && com.usual_demand == 0.0) com.usual_demand = 1000.0;
    if (com.has_market && com.initial_stock == 0.0) com.initial_stock = 4.0 * com.usual_demand;
  }

  if (root.has("trade")) {
    ObjectReader r(root.raw("trade"), "trade");
    for (auto& com : cfg.commodities) {
      if (!r.has(com.id)) continue;
      com.trade = parse_trade(r.raw(com.id), "trade." + com.id);
    }
    r.finish();
  }
  for (auto& com : cfg.commodities) com.trade.usual_price = com.initial_price;

  const std::size_t n_com = cfg.commodities.size();
  cfg.storage.capacity.assign(n_com, 0.0);
  cfg.storage.fee_multiplier.assign(n_com, 1.0);
  cfg.storage.loss_rate.assign(n_com, 0.0);
  cfg.storage.expiration.assign(n_com, 1);
  if (root.has("storage")) {
    ObjectReader r(root.raw("storage"), "storage");
    for (std::size_t i = 0; i < cfg.commodities.size(); ++i) {
      const std::string& id = cfg.commodities[i].id;
      if (!r.has(id)) continue;
      ObjectReader sr(r.raw(id), "storage." + id);
      cfg.storage.capacity[i] = sr.get("capacity", 0.0);
      cfg.storage.fee_multiplier[i] = sr.get("fee_multiplier", 1.0);
      cfg.storage.loss_rate[i] = sr.get("loss_rate", 0.0);
      cfg.storage.expiration[i] = sr.get("expiration", 1);
      sr.finish();
    }
    r.finish();
  }

  if (root.has("mill")) {
    ObjectReader r(root.raw("mill"), "mill");
    cfg.mill.present = true;
    std::string crop_id = r.require<std::string>("crop");
    std::string com_id = r.require<std::string>("commodity");
    cfg.mill.crop = cfg.crop_index(crop_id);
    if (cfg.mill.crop < 0) throw config_error("mill.crop: unknown crop '" + crop_id + "'");
    cfg.mill.commodity = cfg.commodity_index(com_id);
    if (cfg.mill.commodity < 0)
      throw config_error("mill.commodity: unknown commodity '" + com_id + "'");
    cfg.mill.yields.juice = r.get("yield_of_juice", 0.5);
    cfg.mill.yields.molasses = r.get("yield_of_molasses", 0.045);
    cfg.mill.yields.sugar = r.get("yield_of_sugar", 0.2);
    cfg.mill.yields.ethanol_from_molasses = r.get("yield_of_ethanol_from_molasses", 25.0);
    cfg.mill.yields.ethanol_from_juice = r.get("yield_of_ethanol_from_juice", 14.0);
    cfg.mill.costs.cane_processing = r.get("cane_processing_cost", 30.0);
    cfg.mill.costs.molasses_to_ethanol = r.get("molasses_to_ethanol_cost", 100.0);
    cfg.mill.costs.juice_to_ethanol = r.get("juice_to_ethanol_cost", 400.0);
    cfg.mill.initial_savings = r.get("initial_savings", 50000000.0);
    cfg.mill.maintenance_reserve = r.get("maintenance_reserve", 1000000.0);
    cfg.mill.collection_threshold = r.get("collection_threshold", 0.0);
    cfg.mill.credit_rating = r.get("credit_rating", 1000.0);
    cfg.mill.ethanol_requirement = r.get("ethanol_requirement", 0.0);
    cfg.mill.ethanol_price = r.get("ethanol_price", 51.0);
    cfg.mill.initial_sugar_demand = r.get("initial_sugar_demand", 0.0);
    cfg.mill.stock_cover = r.get("stock_cover", cfg.mill.stock_cover);
    r.finish();
  }
  if (cfg.mill.present && cfg.mill.initial_sugar_demand == 0.0)
    cfg.mill.initial_sugar_demand =
        cfg.commodities[static_cast<std::size_t>(cfg.mill.commodity)].usual_demand;

  if (root.has("water")) {
    ObjectReader r(root.raw("water"), "water");
    cfg.water.agent_present = r.get("agent_present", cfg.water.agent_present);
    cfg.water.agent_price = r.get("agent_price", cfg.water.agent_price);
    cfg.water.agent_capacity = r.get("agent_capacity", cfg.water.agent_capacity);
    cfg.water.lender_share = r.get("lender_share", cfg.water.lender_share);
    cfg.water.type3_surplus = r.get("type3_surplus", cfg.water.type3_surplus);
    r.finish();
  }
  cfg.farmers.type3_water_surplus = cfg.water.type3_surplus;

  if (root.has("loans")) {
    ObjectReader r(root.raw("loans"), "loans");
    cfg.loans.credit_unit = r.get("credit_unit", cfg.loans.credit_unit);
    cfg.loans.collateral_rate_annual = r.get("collateral_rate_annual", cfg.loans.collateral_rate_annual);
    cfg.loans.credit_rate_annual = r.get("credit_rate_annual", cfg.loans.credit_rate_annual);
    cfg.loans.term_steps = r.get("term_steps", cfg.loans.term_steps);
    cfg.loans.land_value_per_ha = r.get("land_value_per_ha", cfg.loans.land_value_per_ha);
    r.finish();
  }

  if (root.has("policy")) {
    ObjectReader r(root.raw("policy"), "policy");
    cfg.policy_delta = r.get("delta", cfg.policy_delta);
    r.finish();
  }

  root.finish();
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("scenario file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("scenario parse error in " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["months_per_step"] = c.months_per_step;
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  j["inflation_rate"] = c.inflation_rate;
  j["per_cycle_costs"] = c.per_cycle_costs;
  j["pricing_mode"] = c.pricing_mode == PricingMode::Absolute ? "absolute" : "trend";
  j["demand_variation_limit"] = c.demand_variation_limit;
  j["frp"] = c.frp;
  j["population"] = {{"size", c.population.size},
                     {"fractions",
                      {{"type1", c.population.frac_type1},
                       {"type2", c.population.frac_type2},
                       {"type3", c.population.frac_type3}}}};
  auto type_json = [](const FarmerTypeParams& p) {
    return json{{"per_person_charge", p.per_person_charge}, {"savings_mean", p.savings_mean},
                {"savings_sd", p.savings_sd},               {"land_mean", p.land_mean},
                {"land_sd", p.land_sd},                     {"noise_sigma", p.noise_sigma}};
  };
  j["farmers"] = {{"type1", type_json(c.farmers.type1)},
                  {"type2", type_json(c.farmers.type2)},
                  {"type3", type_json(c.farmers.type3)},
                  {"base_credit_rating", c.farmers.base_credit_rating},
                  {"min_land", c.farmers.min_land},
                  {"safety_buffer_fraction", c.farmers.safety_buffer_fraction}};
  j["crops"] = json::array();
  json wages = json::object();
  for (std::size_t i = 0; i < c.crops.size(); ++i) {
    const CropSpec& cr = c.crops[i];
    j["crops"].push_back({{"id", cr.id},
                          {"end_cycle", cr.end_cycle},
                          {"harvest_cycle", cr.harvest_cycle},
                          {"fert_pest_cost", cr.fert_pest_cost},
                          {"labor_requirement", cr.labor_requirement},
                          {"water_requirement", cr.water_requirement},
                          {"labor_flexibility", cr.labor_flexibility},
                          {"water_flexibility", cr.water_flexibility},
                          {"prone_to_pest", cr.prone_to_pest},
                          {"produce", cr.produce},
                          {"initial_cost", cr.initial_cost},
                          {"minimum_produce", cr.minimum_produce},
                          {"crop_mult_factor", cr.crop_mult_factor},
                          {"channel", cr.channel == Channel::Mill ? "mill" : "market"}});
    wages[cr.id] = c.wages[i];
  }
  j["labor"] = {{"wages", wages}};
  json market = json::object();
  json trade = json::object();
  json storage = json::object();
  json processed = json::array();
  for (std::size_t i = 0; i < c.commodities.size(); ++i) {
    const CommodityConfig& com = c.commodities[i];
    if (com.crop < 0)
      processed.push_back({{"id", com.id},
                           {"crop_mult_factor", com.crop_mult_factor},
                           {"initial_price", com.initial_price}});
    if (com.has_market)
      market[com.id] = {{"initial_price", com.initial_price},
                        {"usual_demand", com.usual_demand},
                        {"initial_stock", com.initial_stock},
                        {"crop_mult_factor", com.crop_mult_factor}};
    trade[com.id] = {{"factor_of_import", com.trade.factor_of_import},
                     {"factor_of_export", com.trade.factor_of_export},
                     {"maximum_import", com.trade.maximum_import},
                     {"maximum_export", com.trade.maximum_export},
                     {"import_tax", com.trade.import_tax},
                     {"export_tax", com.trade.export_tax},
                     {"import_price", com.trade.import_price},
                     {"export_price", com.trade.export_price}};
    storage[com.id] = {{"capacity", c.storage.capacity[i]},
                       {"fee_multiplier", c.storage.fee_multiplier[i]},
                       {"loss_rate", c.storage.loss_rate[i]},
                       {"expiration", c.storage.expiration[i]}};
  }
  j["processed_commodities"] = processed;
  j["market"] = market;
  j["trade"] = trade;
  j["storage"] = storage;
  if (c.mill.present) {
    j["mill"] = {{"crop", c.crops[static_cast<std::size_t>(c.mill.crop)].id},
                 {"commodity", c.commodities[static_cast<std::size_t>(c.mill.commodity)].id},
                 {"yield_of_juice", c.mill.yields.juice},
                 {"yield_of_molasses", c.mill.yields.molasses},
                 {"yield_of_sugar", c.mill.yields.sugar},
                 {"yield_of_ethanol_from_molasses", c.mill.yields.ethanol_from_molasses},
                 {"yield_of_ethanol_from_juice", c.mill.yields.ethanol_from_juice},
                 {"cane_processing_cost", c.mill.costs.cane_processing},
                 {"molasses_to_ethanol_cost", c.mill.costs.molasses_to_ethanol},
                 {"juice_to_ethanol_cost", c.mill.costs.juice_to_ethanol},
                 {"initial_savings", c.mill.initial_savings},
                 {"maintenance_reserve", c.mill.maintenance_reserve},
                 {"collection_threshold", c.mill.collection_threshold},
                 {"credit_rating", c.mill.credit_rating},
                 {"ethanol_requirement", c.mill.ethanol_requirement},
                 {"ethanol_price", c.mill.ethanol_price},
                 {"initial_sugar_demand", c.mill.initial_sugar_demand},
                 {"stock_cover", c.mill.stock_cover}};
  }
  j["water"] = {{"agent_present", c.water.agent_present},
                {"agent_price", c.water.agent_price},
                {"agent_capacity", c.water.agent_capacity},
                {"lender_share", c.water.lender_share},
                {"type3_surplus", c.water.type3_surplus}};
  j["loans"] = {{"credit_unit", c.loans.credit_unit},
                {"collateral_rate_annual", c.loans.collateral_rate_annual},
                {"credit_rate_annual", c.loans.credit_rate_annual},
                {"term_steps", c.loans.term_steps},
                {"land_value_per_ha", c.loans.land_value_per_ha}};
  j["policy"] = {{"delta", c.policy_delta}};
  return j;
}

std::uint64_t scenario_hash(const ScenarioConfig& config) {
  std::string dump = scenario_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

void set_scenario_value(nlohmann::json& doc, const std::string& dotted_path, double value) {
  json* node = &doc;
  std::stringstream ss(dotted_path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw config_error("sweep: empty parameter path");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i]))
      throw config_error("sweep: path component '" + parts[i] + "' not found in scenario");
    node = &(*node)[parts[i]];
  }
  const std::string& leaf = parts.back();
  if (!node->is_object() || !node->contains(leaf))
    throw config_error("sweep: path component '" + leaf + "' not found in scenario");
  if (!(*node)[leaf].is_number())
    throw config_error("sweep: parameter '" + dotted_path + "' is not a number");
  (*node)[leaf] = value;
}

}  // namespace canesim
