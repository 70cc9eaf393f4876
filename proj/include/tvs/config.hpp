#pragma once

// Flat `key = value` configuration files with `#` comments.  Nested concepts
// use dotted keys (e.g. material.preset).  Parsing keeps line numbers so
// diagnostics can point at the offending entry.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tvs/errors.hpp"

namespace tvs {

class ConfigMap {
public:
    ConfigMap() = default;

    static ConfigMap parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigParse("cannot open config file: " + path);
        ConfigMap cfg;
        cfg.parse_stream(in, path);
        return cfg;
    }

    static ConfigMap parse_string(const std::string& text) {
        std::istringstream in(text);
        ConfigMap cfg;
        cfg.parse_stream(in, "<string>");
        return cfg;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? dflt : it->second.value;
    }
    std::string require_string(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigParse("missing required key '" + key + "'");
        return it->second.value;
    }

    double get_double(const std::string& key, double dflt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return dflt;
        return to_double(it->second, key);
    }
    int get_int(const std::string& key, int dflt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return dflt;
        const Entry& e = it->second;
        try {
            std::size_t pos = 0;
            const int v = std::stoi(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigParse(where(e, key) + ": expected an integer, got '" +
                              e.value + "'");
        }
    }
    unsigned long long get_u64(const std::string& key, unsigned long long dflt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return dflt;
        const Entry& e = it->second;
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigParse(where(e, key) + ": expected an unsigned integer, got '" +
                              e.value + "'");
        }
    }

    // comma-separated integer list, e.g. "32,64,128"
    std::vector<int> get_int_list(const std::string& key,
                                  const std::vector<int>& dflt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return dflt;
        std::vector<int> out;
        std::stringstream ss(it->second.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                out.push_back(std::stoi(tok));
            } catch (...) {
                throw ConfigParse(where(it->second, key) +
                                  ": expected a comma-separated integer list");
            }
        }
        if (out.empty())
            throw ConfigParse(where(it->second, key) + ": empty list");
        return out;
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? -1 : it->second.line;
    }

private:
    struct Entry {
        std::string value;
        std::string file;
        int line = 0;
    };
    std::map<std::string, Entry> entries_;

    static std::string where(const Entry& e, const std::string& key) {
        return e.file + ":" + std::to_string(e.line) + ": key '" + key + "'";
    }

    double to_double(const Entry& e, const std::string& key) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigParse(where(e, key) + ": expected a number, got '" +
                              e.value + "'");
        }
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    void parse_stream(std::istream& in, const std::string& file) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigParse(file + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigParse(file + ":" + std::to_string(lineno) +
                                  ": empty key");
            entries_[key] = Entry{value, file, lineno};
        }
    }
};

} // namespace tvs
