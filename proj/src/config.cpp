#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "eedc/error.hpp"
#include "eedc/model.hpp"

namespace eedc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse value '" + std::string(text) + "' for key '" +
                      std::string(key) + "'");
  }
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse integer '" + std::string(text) + "' for key '" +
                      std::string(key) + "'");
  }
  return v;
}

struct Field {
  const char* key;
  double ModelParams::*real;
  int ModelParams::*integer;
};

constexpr Field kFields[] = {
    {"lambda", &ModelParams::lambda, nullptr},
    {"mu1", &ModelParams::mu1, nullptr},
    {"mu2", &ModelParams::mu2, nullptr},
    {"n", nullptr, &ModelParams::n},
    {"m", nullptr, &ModelParams::m},
    {"p1_work", &ModelParams::p1_work, nullptr},
    {"p2_work", &ModelParams::p2_work, nullptr},
    {"p2_sleep", &ModelParams::p2_sleep, nullptr},
    {"c_energy", &ModelParams::c_energy, nullptr},
    {"c_hold_g1", &ModelParams::c_hold_g1, nullptr},
    {"c_hold_g2", &ModelParams::c_hold_g2, nullptr},
    {"c_transfer", &ModelParams::c_transfer, nullptr},
    {"c_loss", &ModelParams::c_loss, nullptr},
    {"price", &ModelParams::price, nullptr},
};

}  // namespace

ModelParams parse_model_config(std::string_view text) {
  ModelParams p;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    const Field* field = nullptr;
    for (const auto& f : kFields) {
      if (key == f.key) field = &f;
    }
    if (field == nullptr) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    if (field->real != nullptr) {
      p.*(field->real) = parse_double(key, value);
    } else {
      p.*(field->integer) = parse_int(key, value);
    }
  }
  for (const auto& f : kFields) {
    if (!seen.contains(f.key)) throw ConfigError(std::string("missing key '") + f.key + "'");
  }
  return p;
}

ModelParams load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

std::string format_model_config(const ModelParams& p) {
  std::string out;
  char buf[64];
  for (const auto& f : kFields) {
    if (f.real != nullptr) {
      std::snprintf(buf, sizeof buf, "%.17g", p.*(f.real));
    } else {
      std::snprintf(buf, sizeof buf, "%d", p.*(f.integer));
    }
    out += f.key;
    out += '=';
    out += buf;
    out += '\n';
  }
  return out;
}

std::uint64_t model_hash(const ModelParams& params) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : format_model_config(params)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Policy parse_policy(std::string_view text) {
  std::vector<int> actions;
  text = trim(text);
  if (text.empty()) throw ConfigError("empty policy");
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    actions.push_back(parse_int("policy", item));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return Policy(std::move(actions));
}

std::string format_policy(const Policy& d) {
  std::string out;
  for (int j = 1; j <= d.m(); ++j) {
    if (j > 1) out += ',';
    out += std::to_string(d[j]);
  }
  return out;
}

}  // namespace eedc
