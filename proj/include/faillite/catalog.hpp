#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faillite/units.hpp"

namespace faillite {

constexpr int kCatalogSchemaVersion = 1;

class CatalogError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class SizeClass { Small, Medium, Large };

std::string to_string(SizeClass c);

struct ModelVariant {
  std::string variant_id;
  std::string family_id;
  double raw_accuracy = 0.0;
  double norm_accuracy = 0.0;
  Resources demand;
  // Service latency per server class, milliseconds.
  std::map<std::string, double> service_latency_ms;
  // Measured load time; overrides the linear model when set.
  std::optional<double> load_time_ms;

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

struct ModelFamily {
  std::string family_id;
  std::vector<ModelVariant> variants;  // ascending mem_mib
  SizeClass size_class = SizeClass::Small;

  const ModelVariant& smallest() const { return variants.front(); }
  const ModelVariant& largest() const { return variants.back(); }
  double demand_spread() const { return largest().demand.mem_mib - smallest().demand.mem_mib; }
  std::optional<std::size_t> index_of(const std::string& variant_id) const;

  friend bool operator==(const ModelFamily&, const ModelFamily&) = default;
};

// load_time(m) = intercept + slope * m.
struct LoadTimeModel {
  double intercept_ms = 0.0;
  double slope_ms_per_mib = 0.0;

  // Line through (158 MiB, 441 ms) and (806 MiB, 2105 ms).
  static LoadTimeModel reference();
  static LoadTimeModel fit(double mib_a, double ms_a, double mib_b, double ms_b);

  double load_time_ms(double mem_mib) const { return intercept_ms + slope_ms_per_mib * mem_mib; }

  friend bool operator==(const LoadTimeModel&, const LoadTimeModel&) = default;
};

struct SizeThresholds {
  double small_mib = 50.0;
  double large_mib = 300.0;

  friend bool operator==(const SizeThresholds&, const SizeThresholds&) = default;
};

// Divides each accuracy by the family maximum. Throws CatalogError on empty
// input or accuracies outside (0, 1].
std::vector<double> normalize_family(std::span<const double> raw_accuracies);

SizeClass classify_spread(double spread_mib, const SizeThresholds& thresholds);
SizeClass classify_family(const ModelFamily& family, const SizeThresholds& thresholds);

double load_time_ms(const ModelVariant& variant, const LoadTimeModel& model);

class Catalog {
 public:
  Catalog() = default;

  // Validates and normalizes. Variants may be given in any order; they are
  // sorted by memory and duplicate memory sizes are rejected.
  void add_family(std::string family_id, std::vector<ModelVariant> variants);

  const ModelFamily& family(const std::string& family_id) const;
  bool has_family(const std::string& family_id) const { return families_.count(family_id) > 0; }
  const std::map<std::string, ModelFamily>& families() const { return families_; }

  const LoadTimeModel& load_model() const { return load_model_; }
  void set_load_model(LoadTimeModel m);
  const SizeThresholds& thresholds() const { return thresholds_; }
  void set_thresholds(SizeThresholds t);

  double load_time_ms(const ModelVariant& v) const { return faillite::load_time_ms(v, load_model_); }

  static Catalog from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  static Catalog load(const std::string& path);

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  void reclassify();

  std::map<std::string, ModelFamily> families_;
  LoadTimeModel load_model_ = LoadTimeModel::reference();
  SizeThresholds thresholds_;
};

// Rejects any key of `obj` not listed in `allowed`.
void require_known_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where);

// Built-in catalog with twelve torchvision-style families.
Catalog reference_catalog();

}  // namespace faillite
