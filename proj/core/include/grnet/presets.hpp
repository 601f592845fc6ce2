// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "grnet/config.hpp"

namespace grnet {

/// Named component combinations of the ablation study, in study order.
std::vector<std::string> preset_names();

/// Flags for one named combination; unknown names raise ConfigError listing
/// the valid identifiers.
AblationFlags preset(const std::string& name);

}  // namespace grnet
