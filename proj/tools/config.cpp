#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace phicredit::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& text, const std::string& field) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw UsageError("invalid number for '" + field + "': '" + text + "'");
    return value;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str(), path);
}

RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw UsageError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw UsageError(origin + ":" + std::to_string(number) + ": empty key");
        config.set(key, trim(body.substr(eq + 1)));
    }
    return config;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::optional<double> RunConfig::find_double(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return parse_number(it->second, key);
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    return find_double(key).value_or(fallback);
}

std::uint64_t RunConfig::get_count(const std::string& key, std::uint64_t fallback) const {
    const auto value = find_double(key);
    if (!value) return fallback;
    if (!(*value >= 0.0) || *value != static_cast<double>(static_cast<std::uint64_t>(*value))) {
        throw UsageError("'" + key + "' must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(*value);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "on") return true;
    if (it->second == "false" || it->second == "0" || it->second == "off") return false;
    throw UsageError("'" + key + "' must be true or false");
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
    std::string spaced = text;
    for (char& c : spaced) {
        if (c == ',' || c == '[' || c == ']' || c == '(' || c == ')') c = ' ';
    }
    std::istringstream in(spaced);
    std::vector<double> out;
    std::string token;
    while (in >> token) out.push_back(parse_number(token, field));
    if (out.empty()) throw UsageError("'" + field + "' must list at least one number");
    return out;
}

std::vector<double> RunConfig::get_list(const std::string& key, std::vector<double> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_number_list(it->second, key);
}

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
    return out;
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

}  // namespace phicredit::cli
