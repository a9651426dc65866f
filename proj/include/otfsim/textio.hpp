// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

// Line-oriented "key = value" parsing shared by profile and scenario files.

#pragma once

#include "otfsim/common.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace otfsim {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Calls fn for every non-blank, non-comment line. Text after '#' is dropped.
/// Lines without '=' raise ConfigError tagged with `context` and the line number.
void for_each_key_value(std::istream& in, const std::string& context,
                        const std::function<void(const KeyValue&)>& fn);

double parse_double(const KeyValue& kv, const std::string& context);
long long parse_int(const KeyValue& kv, const std::string& context);
std::uint64_t parse_u64(const KeyValue& kv, const std::string& context);
bool parse_bool(const KeyValue& kv, const std::string& context);
/// Comma- or space-separated list of numbers.
std::vector<double> parse_double_list(const KeyValue& kv, const std::string& context);

std::string trim(const std::string& s);

}  // namespace otfsim
