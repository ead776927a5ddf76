#pragma once

#include <json.hpp>  // vendored nlohmann/json

namespace vartsp {

// Insertion-ordered so grids expand and files print in the written order.
using Json = nlohmann::ordered_json;

}  // namespace vartsp
