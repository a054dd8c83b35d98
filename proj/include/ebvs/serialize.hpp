#pragma once

#include <string>

#include "ebvs/selector.hpp"
#include "ebvs/simulate.hpp"

namespace ebvs {

// JSON round-trip for machine consumers.  Doubles use shortest-round-trip
// formatting, so decode(encode(r)) reproduces every field exactly and equal
// results serialize to identical bytes.
std::string to_json(const FitResult& result, int indent = 2);
FitResult fit_result_from_json(const std::string& text);

std::string to_json(const StudyResult& result, int indent = 2);

// Atomic file write: writes to `path` + ".tmp" then renames, so readers never
// observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace ebvs
