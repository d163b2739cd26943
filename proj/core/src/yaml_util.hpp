#pragma once

#include <yaml-cpp/yaml.h>

#include <string>

#include "tapertpa/error.hpp"
#include "tapertpa/units.hpp"

namespace tpa::detail {

inline const YAML::Node require(const YAML::Node& node, const std::string& key,
                                const std::string& context) {
  const YAML::Node child = node[key];
  if (!child) throw ConfigError(context + ": missing key '" + key + "'");
  return child;
}

inline double quantity(const YAML::Node& node, const std::string& key,
                       units::Dimension dim, const std::string& context) {
  const YAML::Node child = require(node, key, context);
  try {
    return units::parse_quantity(child.as<std::string>(), dim);
  } catch (const ConfigError& e) {
    throw ConfigError(context + "." + key + ": " + e.what());
  } catch (const YAML::Exception& e) {
    throw ConfigError(context + "." + key + ": " + e.what());
  }
}

inline double quantity_or(const YAML::Node& node, const std::string& key, units::Dimension dim,
                          const std::string& context, double fallback) {
  if (!node || !node[key]) return fallback;
  return quantity(node, key, dim, context);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const std::string& context) {
  const YAML::Node child = require(node, key, context);
  try {
    return child.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(context + "." + key + ": " + e.what());
  }
}

template <typename T>
T scalar_or(const YAML::Node& node, const std::string& key, const std::string& context,
            T fallback) {
  if (!node || !node[key]) return fallback;
  return scalar<T>(node, key, context);
}

}  // namespace tpa::detail
