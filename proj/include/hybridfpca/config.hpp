#pragma once

#include "hybridfpca/fofreg.hpp"
#include "hybridfpca/hpca.hpp"
#include "hybridfpca/simgen.hpp"

#include <nlohmann/json.hpp>

namespace hybridfpca {

/// JSON <-> config structs. Unknown keys and wrong types raise
/// InvalidConfig naming the offending key; missing keys keep defaults.
FofConfig fof_config_from_json(const nlohmann::json& j, FofConfig base = {});
nlohmann::json to_json(const FofConfig& c);

HybridGenConfig hybrid_config_from_json(const nlohmann::json& j, HybridGenConfig base = {});
nlohmann::json to_json(const HybridGenConfig& c);

FofGenConfig fof_gen_config_from_json(const nlohmann::json& j, FofGenConfig base = {});
nlohmann::json to_json(const FofGenConfig& c);

/// Keys: replicates, seed, fve_target, sample_sizes, omega_modes,
/// beta_modes, auto_component_cap, hybrid{...}, fof_generator{...}, fit{...}.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j, ScenarioConfig base = {});
nlohmann::json to_json(const ScenarioConfig& c);

/// Keys: fve_target, ranking ("variance" | "lexicographic"), resplits,
/// fit{...}.
struct SelectionConfig {
    HpcaOptions hpca;
    FofConfig fit;
    int resplits = 1;
};
SelectionConfig selection_config_from_json(const nlohmann::json& j, SelectionConfig base = {});
nlohmann::json to_json(const SelectionConfig& c);

OmegaSampling omega_sampling_from_string(const std::string& s);
CoefficientMode coefficient_mode_from_string(const std::string& s);
RankingOrder ranking_order_from_string(const std::string& s);
const char* to_string(RankingOrder r);

}  // namespace hybridfpca
