#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bgdsa {

/// Sectioned key-value text: `[section]` headers, `key = value` entries,
/// `#` comments, blank lines ignored. Duplicate keys within a section are
/// errors. Readers mark keys consumed; check_consumed turns leftovers into
/// errors so config typos surface instead of being silently ignored.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_string(std::string text, std::string origin = "<string>");

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  /// Keys of a section in file order. Does not mark anything consumed.
  std::vector<std::string> keys(const std::string& section) const;
  std::vector<std::string> sections() const;

  std::string get_string(const std::string& section, const std::string& key);
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback);
  double get_double(const std::string& section, const std::string& key);
  double get_double_or(const std::string& section, const std::string& key, double fallback);
  std::int64_t get_int(const std::string& section, const std::string& key);
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback);
  std::uint64_t get_u64(const std::string& section, const std::string& key);
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback);
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback);

  /// Comma or whitespace separated list of reals.
  std::vector<double> get_doubles(const std::string& section, const std::string& key);

  /// Throws listing every present key never read through a getter. The
  /// section form restricts the check; the section must have been declared.
  void check_consumed() const;
  void check_consumed(const std::string& section) const;

  /// Marks a whole section consumed (for sections handed to another parser).
  void consume_section(const std::string& section);

  const std::string& text() const { return text_; }
  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };
  struct Section {
    std::string name;
    int line = 0;
    std::vector<Entry> entries;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& require(const std::string& section, const std::string& key);
  [[noreturn]] void fail(const std::string& message, int line) const;

  std::string text_;
  std::string origin_;
  std::vector<Section> sections_;
};

}  // namespace bgdsa
