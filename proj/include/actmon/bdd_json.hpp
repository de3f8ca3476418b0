#pragma once

#include <map>

#include <nlohmann/json.hpp>

#include "actmon/bdd.hpp"

namespace actmon {

inline constexpr int kBddFormatVersion = 1;

nlohmann::ordered_json bdd_to_json(const BddStore& store,
                                   const std::map<ClassId, BddRef>& roots);
LoadedBdd bdd_from_json(const nlohmann::json& doc, BddLimits limits = {});

}  // namespace actmon
