#pragma once

#include "mecsim/agents.hpp"

#include <iosfwd>
#include <string>

namespace mecsim {

/// Plain-text policy file. Values are written with 17 significant digits so
/// a save/load round trip reproduces every weight bit for bit.
void save_policy(const Policy& policy, std::ostream& os);
Policy load_policy(std::istream& is);

void save_policy_file(const Policy& policy, const std::string& path);
Policy load_policy_file(const std::string& path);

} // namespace mecsim
