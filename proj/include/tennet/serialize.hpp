#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "tennet/model.hpp"

namespace tennet {

using AnyModel = std::variant<TnnModel, FfnModel, RbnModel>;

ModelKind kind_of(const AnyModel& model);

// Versioned JSON container: format_version, kind, architecture widths,
// row-major weights, biases, optional normalization. 64-bit values
// round-trip bit-exactly (shortest-round-trip float formatting).
void save_model(const AnyModel& model, std::ostream& out);
void save_model(const AnyModel& model, const std::string& path);
void save_model(const TnnModel& model, const std::string& path);
void save_model(const FfnModel& model, const std::string& path);
void save_model(const RbnModel& model, const std::string& path);

// Throws ParseError on malformed content or unsupported format_version.
AnyModel load_model(std::istream& in, const std::string& name);
AnyModel load_model(const std::string& path);

// Convenience for call sites that require one concrete kind.
TnnModel load_tnn(const std::string& path);

}  // namespace tennet
