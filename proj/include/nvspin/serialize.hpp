#pragma once

#include <string>

#include "json.hpp"

#include "nvspin/protocols.hpp"
#include "nvspin/spin_model.hpp"

namespace nvspin {

// Config parsing is strict: an unknown key anywhere is an error, never
// silently ignored (a typo in a physics parameter must not pass).
void require_known_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> allowed,
                        const std::string& where);

std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);
std::string engine_name(Engine e);
Engine engine_from_name(const std::string& name);

nlohmann::json spin_params_to_json(const SpinSystemParams& p);
SpinSystemParams spin_params_from_json(const nlohmann::json& j);

nlohmann::json protocol_config_to_json(const ProtocolConfig& c);
ProtocolConfig protocol_config_from_json(const nlohmann::json& j);

}  // namespace nvspin
