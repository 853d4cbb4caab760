#pragma once

#include <filesystem>
#include <vector>

#include "introspect/logit_record.hpp"

namespace introspect {

/// CSV interchange: header `tag,true_label,predicted,correct,logit_0,...`,
/// one record per row, true_label empty for unlabeled examples, floats at 9
/// significant digits (which round-trips float32 exactly). Any external
/// model can be scored by producing this file.
void write_logit_dump(const std::vector<LogitRecord>& records,
                      const std::filesystem::path& path);

/// Parses and validates a dump; failures name the 1-based line.
std::vector<LogitRecord> read_logit_dump(const std::filesystem::path& path);

}  // namespace introspect
