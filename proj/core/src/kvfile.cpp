#include "bgdsa/kvfile.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bgdsa {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

void KvFile::fail(const std::string& message, int line) const {
  throw std::runtime_error(origin_ + ":" + std::to_string(line) + ": " + message);
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KvFile KvFile::parse_string(std::string text, std::string origin) {
  KvFile kv;
  kv.text_ = std::move(text);
  kv.origin_ = std::move(origin);

  std::istringstream in(kv.text_);
  std::string raw;
  int line_no = 0;
  Section* current = nullptr;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') kv.fail("unterminated section header", line_no);
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) kv.fail("empty section name", line_no);
      for (const Section& s : kv.sections_) {
        if (s.name == name) kv.fail("duplicate section [" + name + "]", line_no);
      }
      kv.sections_.push_back(Section{name, line_no, {}});
      current = &kv.sections_.back();
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) kv.fail("expected `key = value` or `[section]`", line_no);
    if (current == nullptr) kv.fail("entry before any [section]", line_no);
    Entry entry;
    entry.key = trim(line.substr(0, eq));
    entry.value = trim(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) kv.fail("empty key", line_no);
    if (entry.value.empty()) kv.fail("empty value for key `" + entry.key + "`", line_no);
    for (const Entry& e : current->entries) {
      if (e.key == entry.key)
        kv.fail("duplicate key `" + entry.key + "` in [" + current->name + "]", line_no);
    }
    current->entries.push_back(std::move(entry));
  }
  return kv;
}

bool KvFile::has_section(const std::string& section) const {
  return std::any_of(sections_.begin(), sections_.end(),
                     [&](const Section& s) { return s.name == section; });
}

bool KvFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const KvFile::Entry* KvFile::find(const std::string& section, const std::string& key) const {
  for (const Section& s : sections_) {
    if (s.name != section) continue;
    for (const Entry& e : s.entries) {
      if (e.key == key) return &e;
    }
  }
  return nullptr;
}

const KvFile::Entry& KvFile::require(const std::string& section, const std::string& key) {
  const Entry* e = find(section, key);
  if (e == nullptr) {
    throw std::runtime_error(origin_ + ": missing key `" + key + "` in section [" + section + "]");
  }
  e->consumed = true;
  return *e;
}

std::vector<std::string> KvFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  for (const Section& s : sections_) {
    if (s.name != section) continue;
    for (const Entry& e : s.entries) out.push_back(e.key);
  }
  return out;
}

std::vector<std::string> KvFile::sections() const {
  std::vector<std::string> out;
  out.reserve(sections_.size());
  for (const Section& s : sections_) out.push_back(s.name);
  return out;
}

std::string KvFile::get_string(const std::string& section, const std::string& key) {
  return require(section, key).value;
}

std::string KvFile::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) {
  return has(section, key) ? get_string(section, key) : fallback;
}

double KvFile::get_double(const std::string& section, const std::string& key) {
  const Entry& e = require(section, key);
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail("value of `" + key + "` is not a real number: " + e.value, e.line);
  }
}

double KvFile::get_double_or(const std::string& section, const std::string& key,
                             double fallback) {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t KvFile::get_int(const std::string& section, const std::string& key) {
  const Entry& e = require(section, key);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    fail("value of `" + key + "` is not an integer: " + e.value, e.line);
  }
  return v;
}

std::int64_t KvFile::get_int_or(const std::string& section, const std::string& key,
                                std::int64_t fallback) {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t KvFile::get_u64(const std::string& section, const std::string& key) {
  const Entry& e = require(section, key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    fail("value of `" + key + "` is not an unsigned integer: " + e.value, e.line);
  }
  return v;
}

std::uint64_t KvFile::get_u64_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) {
  return has(section, key) ? get_u64(section, key) : fallback;
}

bool KvFile::get_bool_or(const std::string& section, const std::string& key, bool fallback) {
  if (!has(section, key)) return fallback;
  const Entry& e = require(section, key);
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail("value of `" + key + "` is not a boolean: " + e.value, e.line);
}

std::vector<double> KvFile::get_doubles(const std::string& section, const std::string& key) {
  const Entry& e = require(section, key);
  std::string normalized = e.value;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail("list entry of `" + key + "` is not a real number: " + token, e.line);
    }
  }
  if (out.empty()) fail("list `" + key + "` is empty", e.line);
  return out;
}

void KvFile::check_consumed() const {
  std::string leftovers;
  for (const Section& s : sections_) {
    for (const Entry& e : s.entries) {
      if (!e.consumed) leftovers += "\n  [" + s.name + "] " + e.key + " (line " +
                                    std::to_string(e.line) + ")";
    }
  }
  if (!leftovers.empty()) {
    throw std::runtime_error(origin_ + ": unknown keys (typo?):" + leftovers);
  }
}

void KvFile::check_consumed(const std::string& section) const {
  if (!has_section(section)) {
    throw std::runtime_error(origin_ + ": missing section [" + section + "]");
  }
  std::string leftovers;
  for (const Section& s : sections_) {
    if (s.name != section) continue;
    for (const Entry& e : s.entries) {
      if (!e.consumed) leftovers += "\n  [" + s.name + "] " + e.key + " (line " +
                                    std::to_string(e.line) + ")";
    }
  }
  if (!leftovers.empty()) {
    throw std::runtime_error(origin_ + ": unknown keys (typo?):" + leftovers);
  }
}

void KvFile::consume_section(const std::string& section) {
  for (const Section& s : sections_) {
    if (s.name != section) continue;
    for (const Entry& e : s.entries) e.consumed = true;
  }
}

}  // namespace bgdsa
