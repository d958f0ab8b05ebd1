#include "faillite/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace faillite {

using nlohmann::json;

std::string to_string(SizeClass c) {
  switch (c) {
    case SizeClass::Small:
      return "small";
    case SizeClass::Medium:
      return "medium";
    case SizeClass::Large:
      return "large";
  }
  return "unknown";
}

std::optional<std::size_t> ModelFamily::index_of(const std::string& variant_id) const {
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (variants[i].variant_id == variant_id) return i;
  }
  return std::nullopt;
}

LoadTimeModel LoadTimeModel::reference() { return fit(158.0, 441.0, 806.0, 2105.0); }

LoadTimeModel LoadTimeModel::fit(double mib_a, double ms_a, double mib_b, double ms_b) {
  if (mib_a == mib_b) throw CatalogError("load-time fit needs two distinct sizes");
  LoadTimeModel m;
  m.slope_ms_per_mib = (ms_b - ms_a) / (mib_b - mib_a);
  m.intercept_ms = ms_a - m.slope_ms_per_mib * mib_a;
  return m;
}

std::vector<double> normalize_family(std::span<const double> raw_accuracies) {
  if (raw_accuracies.empty()) throw CatalogError("family has no accuracies");
  for (double a : raw_accuracies) {
    if (!(a > 0.0 && a <= 1.0)) throw CatalogError("accuracy outside (0, 1]: " + std::to_string(a));
  }
  const double top = *std::max_element(raw_accuracies.begin(), raw_accuracies.end());
  std::vector<double> out;
  out.reserve(raw_accuracies.size());
  for (double a : raw_accuracies) out.push_back(a == top ? 1.0 : a / top);
  return out;
}

SizeClass classify_spread(double spread_mib, const SizeThresholds& t) {
  if (spread_mib < t.small_mib) return SizeClass::Small;
  if (spread_mib > t.large_mib) return SizeClass::Large;
  return SizeClass::Medium;
}

SizeClass classify_family(const ModelFamily& family, const SizeThresholds& thresholds) {
  return classify_spread(family.demand_spread(), thresholds);
}

double load_time_ms(const ModelVariant& variant, const LoadTimeModel& model) {
  if (variant.load_time_ms) return *variant.load_time_ms;
  return model.load_time_ms(variant.demand.mem_mib);
}

void Catalog::add_family(std::string family_id, std::vector<ModelVariant> variants) {
  if (family_id.empty()) throw CatalogError("empty family id");
  if (families_.count(family_id)) throw CatalogError("duplicate family '" + family_id + "'");
  if (variants.empty()) throw CatalogError("family '" + family_id + "' has no variants");

  std::set<std::string> ids;
  for (const auto& v : variants) {
    if (v.variant_id.empty()) throw CatalogError("family '" + family_id + "': empty variant id");
    if (!ids.insert(v.variant_id).second) {
      throw CatalogError("family '" + family_id + "': duplicate variant '" + v.variant_id + "'");
    }
    if (!(v.demand.mem_mib > 0.0)) {
      throw CatalogError("variant '" + v.variant_id + "': mem_demand must be positive");
    }
    if (v.demand.compute < 0.0 || v.demand.compute > 1.0) {
      throw CatalogError("variant '" + v.variant_id + "': compute fraction outside [0, 1]");
    }
  }
  std::sort(variants.begin(), variants.end(), [](const ModelVariant& a, const ModelVariant& b) {
    return a.demand.mem_mib < b.demand.mem_mib;
  });
  for (std::size_t i = 1; i < variants.size(); ++i) {
    if (variants[i].demand.mem_mib == variants[i - 1].demand.mem_mib) {
      throw CatalogError("family '" + family_id + "': variants '" + variants[i - 1].variant_id +
                         "' and '" + variants[i].variant_id + "' tie on memory");
    }
  }

  std::vector<double> raw;
  for (const auto& v : variants) raw.push_back(v.raw_accuracy);
  const auto norm = normalize_family(raw);
  for (std::size_t i = 0; i < variants.size(); ++i) {
    variants[i].family_id = family_id;
    variants[i].norm_accuracy = norm[i];
  }

  ModelFamily fam{family_id, std::move(variants), SizeClass::Small};
  fam.size_class = classify_family(fam, thresholds_);
  families_.emplace(family_id, std::move(fam));
}

const ModelFamily& Catalog::family(const std::string& family_id) const {
  auto it = families_.find(family_id);
  if (it == families_.end()) throw CatalogError("unknown family '" + family_id + "'");
  return it->second;
}

void Catalog::set_load_model(LoadTimeModel m) {
  if (!(m.slope_ms_per_mib > 0.0) || m.intercept_ms < 0.0) {
    throw CatalogError("load-time model must have positive slope and non-negative intercept");
  }
  load_model_ = m;
}

void Catalog::set_thresholds(SizeThresholds t) {
  if (!(t.small_mib < t.large_mib)) throw CatalogError("size thresholds need small < large");
  thresholds_ = t;
  reclassify();
}

void Catalog::reclassify() {
  for (auto& [_, fam] : families_) fam.size_class = classify_family(fam, thresholds_);
}

void require_known_keys(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

namespace {

template <typename T>
T get_required(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CatalogError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CatalogError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Catalog Catalog::from_json(const json& doc) {
  try {
    require_known_keys(doc, {"schema_version", "load_time", "size_thresholds", "families"}, "catalog");
  } catch (const ConfigError& e) {
    throw CatalogError(e.what());
  }
  const int version = get_required<int>(doc, "schema_version", "catalog");
  if (version != kCatalogSchemaVersion) {
    throw CatalogError("catalog: unsupported schema_version " + std::to_string(version));
  }

  Catalog cat;
  if (doc.contains("size_thresholds")) {
    const auto& t = doc["size_thresholds"];
    try {
      require_known_keys(t, {"small_mib", "large_mib"}, "catalog.size_thresholds");
    } catch (const ConfigError& e) {
      throw CatalogError(e.what());
    }
    cat.set_thresholds({get_required<double>(t, "small_mib", "size_thresholds"),
                        get_required<double>(t, "large_mib", "size_thresholds")});
  }
  if (doc.contains("load_time")) {
    const auto& lt = doc["load_time"];
    try {
      require_known_keys(lt, {"intercept_ms", "slope_ms_per_mib"}, "catalog.load_time");
    } catch (const ConfigError& e) {
      throw CatalogError(e.what());
    }
    cat.set_load_model({get_required<double>(lt, "intercept_ms", "load_time"),
                        get_required<double>(lt, "slope_ms_per_mib", "load_time")});
  }

  const auto& fams = doc.at("families");
  if (!fams.is_array()) throw CatalogError("catalog: 'families' must be an array");
  for (const auto& f : fams) {
    try {
      require_known_keys(f, {"family_id", "variants"}, "catalog.family");
    } catch (const ConfigError& e) {
      throw CatalogError(e.what());
    }
    const auto fid = get_required<std::string>(f, "family_id", "family");
    std::vector<ModelVariant> variants;
    for (const auto& v : f.at("variants")) {
      const std::string where = "family '" + fid + "' variant";
      try {
        require_known_keys(v,
                           {"variant_id", "raw_accuracy", "mem_demand_mib", "compute_fraction",
                            "service_latency_ms", "load_time_ms"},
                           where);
      } catch (const ConfigError& e) {
        throw CatalogError(e.what());
      }
      ModelVariant mv;
      mv.variant_id = get_required<std::string>(v, "variant_id", where);
      mv.raw_accuracy = get_required<double>(v, "raw_accuracy", where);
      mv.demand.mem_mib = get_required<double>(v, "mem_demand_mib", where);
      mv.demand.compute = get_required<double>(v, "compute_fraction", where);
      mv.service_latency_ms =
          get_required<std::map<std::string, double>>(v, "service_latency_ms", where);
      if (v.contains("load_time_ms")) mv.load_time_ms = get_required<double>(v, "load_time_ms", where);
      variants.push_back(std::move(mv));
    }
    cat.add_family(fid, std::move(variants));
  }
  return cat;
}

json Catalog::to_json() const {
  json fams = json::array();
  for (const auto& [fid, fam] : families_) {
    json vs = json::array();
    for (const auto& v : fam.variants) {
      json jv = {{"variant_id", v.variant_id},
                 {"raw_accuracy", v.raw_accuracy},
                 {"mem_demand_mib", v.demand.mem_mib},
                 {"compute_fraction", v.demand.compute},
                 {"service_latency_ms", v.service_latency_ms}};
      if (v.load_time_ms) jv["load_time_ms"] = *v.load_time_ms;
      vs.push_back(std::move(jv));
    }
    fams.push_back({{"family_id", fid}, {"variants", std::move(vs)}});
  }
  return {{"schema_version", kCatalogSchemaVersion},
          {"load_time",
           {{"intercept_ms", load_model_.intercept_ms},
            {"slope_ms_per_mib", load_model_.slope_ms_per_mib}}},
          {"size_thresholds",
           {{"small_mib", thresholds_.small_mib}, {"large_mib", thresholds_.large_mib}}},
          {"families", std::move(fams)}};
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CatalogError("catalog '" + path + "': " + e.what());
  }
  return from_json(doc);
}

namespace {

struct Row {
  const char* id;
  double acc;
  double mib;
};

ModelVariant make_variant(const Row& r) {
  ModelVariant v;
  v.variant_id = r.id;
  v.raw_accuracy = r.acc;
  v.demand.mem_mib = r.mib;
  // Compute scales with footprint so compute utilization tracks memory
  // utilization on a 16 GiB accelerator.
  v.demand.compute = std::round(r.mib / 16384.0 * 1e4) / 1e4;
  v.service_latency_ms["a2"] = std::round((1.0 + r.mib / 150.0) * 100.0) / 100.0;
  return v;
}

void add(Catalog& cat, const char* fid, std::initializer_list<Row> rows) {
  std::vector<ModelVariant> vs;
  for (const auto& r : rows) vs.push_back(make_variant(r));
  cat.add_family(fid, std::move(vs));
}

}  // namespace

Catalog reference_catalog() {
  Catalog cat;
  // The five testbed families.
  add(cat, "mobilenet", {{"mobilenet_v3_small", 0.6767, 140}, {"mobilenet_v2", 0.7188, 146},
                         {"mobilenet_v3_large", 0.7404, 152}});
  add(cat, "shufflenet", {{"shufflenet_v2_x0_5", 0.6055, 110}, {"shufflenet_v2_x1_0", 0.6936, 118},
                          {"shufflenet_v2_x1_5", 0.7300, 128}, {"shufflenet_v2_x2_0", 0.7623, 142}});
  add(cat, "convnext", {{"convnext_tiny", 0.824124, 158}, {"convnext_small", 0.8320, 290},
                        {"convnext_base", 0.8370, 470}, {"convnext_large", 0.8400, 806}});
  add(cat, "efficientnet", {{"efficientnet_b0", 0.7769, 180}, {"efficientnet_b1", 0.7864, 200},
                            {"efficientnet_b2", 0.8061, 220}, {"efficientnet_b3", 0.8201, 260},
                            {"efficientnet_b4", 0.8338, 330}, {"efficientnet_b5", 0.8344, 430},
                            {"efficientnet_b6", 0.8401, 530}, {"efficientnet_b7", 0.8412, 650}});
  add(cat, "regnet", {{"regnet_y_400mf", 0.7405, 150}, {"regnet_y_800mf", 0.7642, 175},
                      {"regnet_y_1_6gf", 0.7795, 210}, {"regnet_y_3_2gf", 0.7895, 270},
                      {"regnet_y_8gf", 0.8003, 400}, {"regnet_y_16gf", 0.8042, 560},
                      {"regnet_y_32gf", 0.8088, 760}});
  // Additional families for the large-scale runs.
  add(cat, "resnet", {{"resnet18", 0.6976, 170}, {"resnet34", 0.7331, 210}, {"resnet50", 0.7613, 240},
                      {"resnet101", 0.7737, 300}, {"resnet152", 0.7831, 350}});
  add(cat, "densenet", {{"densenet121", 0.7443, 150}, {"densenet169", 0.7560, 170},
                        {"densenet201", 0.7690, 195}, {"densenet161", 0.7714, 230}});
  add(cat, "wide_resnet", {{"wide_resnet50_2", 0.7847, 330}, {"wide_resnet101_2", 0.7884, 500}});
  add(cat, "mnasnet", {{"mnasnet0_5", 0.6760, 115}, {"mnasnet0_75", 0.7118, 120},
                       {"mnasnet1_0", 0.7346, 125}, {"mnasnet1_3", 0.7651, 135}});
  add(cat, "swin", {{"swin_t", 0.8147, 190}, {"swin_s", 0.8320, 260}, {"swin_b", 0.8358, 390}});
  add(cat, "vgg", {{"vgg11", 0.6902, 540}, {"vgg13", 0.6993, 545}, {"vgg16", 0.7159, 565},
                   {"vgg19", 0.7238, 585}});
  add(cat, "squeezenet", {{"squeezenet1_1", 0.5818, 102}, {"squeezenet1_0", 0.5810, 105}});
  return cat;
}

}  // namespace faillite
