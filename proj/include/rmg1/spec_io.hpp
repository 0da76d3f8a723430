#pragma once

#include "rmg1/model.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace rmg1::io {

/// Builds a model from
///   {"lambda0": x,
///    "service": {"family": "exponential", "mean": m} | {"family": "uniform", "a": a, "b": b}
///               | {"family": "table", "breakpoints": [...], "values": [...]},
///    "reshape": {"family": "constant", "value": v}
///               | {"family": "linear", "a": a, "b": b, "end": e, "beyond": w}
///               | {"family": "window", "t": t, "height": h}
///               | {"family": "table", "breakpoints": [...], "values": [...]}}.
/// Linear f is a + b r on [0, end) and `beyond` (default 0) afterwards.
/// Window t may be given as "inf"; height defaults to 1 / (1 - e^-t).
/// Throws ConfigError for malformed specs.
QueueModel model_from_json(const nlohmann::json& spec);

nlohmann::json read_json_file(const std::string& path);
QueueModel load_model(const std::string& path);

/// Copy of `spec` with a parameter replaced: "lambda0", or a reshape field
/// given as "reshape.<name>" or just "<name>".
nlohmann::json with_parameter(nlohmann::json spec, std::string_view param, double value);

}  // namespace rmg1::io
