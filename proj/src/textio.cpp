// Copyright 2026 The otfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "otfsim/textio.hpp"

#include <charconv>
#include <cmath>
#include <istream>

namespace otfsim {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void for_each_key_value(std::istream& in, const std::string& context,
                        const std::function<void(const KeyValue&)>& fn) {
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(context + " line " + std::to_string(line) + ": expected 'key = value', got '" + text + "'");
    }
    KeyValue kv{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line};
    if (kv.key.empty()) throw ConfigError(context + " line " + std::to_string(line) + ": empty key");
    fn(kv);
  }
}

namespace {

[[noreturn]] void bad_value(const KeyValue& kv, const std::string& context, const char* what) {
  throw ConfigError(context + " line " + std::to_string(kv.line) + ": '" + kv.key + "' expects " + what +
                    ", got '" + kv.value + "'");
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace

double parse_double(const KeyValue& kv, const std::string& context) {
  double v = 0.0;
  if (!parse_number(kv.value, v) || !std::isfinite(v)) bad_value(kv, context, "a finite number");
  return v;
}

long long parse_int(const KeyValue& kv, const std::string& context) {
  long long v = 0;
  if (!parse_number(kv.value, v)) bad_value(kv, context, "an integer");
  return v;
}

std::uint64_t parse_u64(const KeyValue& kv, const std::string& context) {
  std::uint64_t v = 0;
  if (!parse_number(kv.value, v)) bad_value(kv, context, "an unsigned integer");
  return v;
}

bool parse_bool(const KeyValue& kv, const std::string& context) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
  bad_value(kv, context, "true or false");
}

std::vector<double> parse_double_list(const KeyValue& kv, const std::string& context) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    double v = 0.0;
    if (!parse_number(token, v) || !std::isfinite(v)) bad_value(kv, context, "a list of numbers");
    out.push_back(v);
    token.clear();
  };
  for (char c : kv.value) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (out.empty()) bad_value(kv, context, "a nonempty list of numbers");
  return out;
}

}  // namespace otfsim
