#include "faillite/placement.hpp"

#include <algorithm>
#include <cmath>

namespace faillite {

double placement_latency_ms(const VariantOption& v, const CandidateServer& s, double network_latency_ms) {
  auto it = v.latency_ms.find(s.server_class);
  if (it == v.latency_ms.end()) return std::numeric_limits<double>::infinity();
  return it->second + network_latency_ms;
}

bool meets_slo(const PlacementApp& app, const VariantOption& v, const CandidateServer& s, double network_latency_ms) {
  const double lat = placement_latency_ms(v, s, network_latency_ms);
  return std::isfinite(lat) && lat <= app.slo_ms;
}

bool server_allowed(const PlacementApp& app, std::size_t server_index, const CandidateServer& s) {
  if (!s.alive) return false;
  if (app.primary_server && *app.primary_server == server_index) return false;
  if (std::find(app.excluded_servers.begin(), app.excluded_servers.end(), server_index) !=
      app.excluded_servers.end()) {
    return false;
  }
  return std::find(app.excluded_sites.begin(), app.excluded_sites.end(), s.site_id) == app.excluded_sites.end();
}

PlacementApp make_placement_app(const ClusterState& state, std::size_t i) {
  const Application& a = state.app(i);
  const ModelFamily& fam = state.family_of(i);
  PlacementApp pa;
  pa.app_id = a.app_id;
  pa.rate = a.rate;
  pa.slo_ms = a.slo_ms;
  pa.primary_server = a.primary_server;
  if (a.primary_server) {
    pa.primary_site = state.server(*a.primary_server).site_id;
    pa.excluded_servers.push_back(*a.primary_server);
  }
  for (std::size_t j = 0; j <= a.primary_variant; ++j) {
    const ModelVariant& v = fam.variants[j];
    pa.variants.push_back({v.variant_id, v.norm_accuracy, v.demand, v.service_latency_ms});
  }
  return pa;
}

std::vector<CandidateServer> make_candidate_servers(const ClusterState& state) {
  std::vector<CandidateServer> out;
  out.reserve(state.servers().size());
  for (std::size_t k = 0; k < state.servers().size(); ++k) {
    const Server& s = state.server(k);
    out.push_back({s.server_id, s.site_id, s.server_class, s.free(), state.alive(k)});
  }
  return out;
}

}  // namespace faillite
