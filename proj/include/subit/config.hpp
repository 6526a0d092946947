#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace subit {

// INI-style configuration: `[section]` headers, `key = value` lines,
// comments with '#' or ';'. Keys are addressed as "section.key"; keys before
// any section live in the "" section and are addressed bare.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // Stable serialization of every key=value pair; hashed into artifacts.
    std::string canonical() const;
    uint64_t hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace subit
