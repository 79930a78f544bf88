#pragma once

#include <map>
#include <string>
#include <vector>

#include "galint/mechanics.hpp"

namespace galint {

using ParamMap = std::map<std::string, double>;

// Builds one of the built-in systems by label. Unknown labels raise
// UnknownSystem, unknown parameter keys raise Error. When validate is set
// the analytic derivatives are cross-checked against finite differences
// at construction.
LagrangianSystem make_system(const std::string& label, const ParamMap& params = {},
                             bool validate = false);

std::vector<std::string> system_labels();

// one-line description per label, for CLI help output
std::string system_description(const std::string& label);

}  // namespace galint
