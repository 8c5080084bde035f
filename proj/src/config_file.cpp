#include "covlab/config_file.hpp"

#include <cctype>
#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "covlab/common.hpp"

namespace covlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& message) {
    throw ParameterError(name + ":" + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& name, int line, const std::string& key,
                    const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) fail(name, line, "empty value for '" + key + "'");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        fail(name, line, "cannot parse '" + t + "' as a number for '" + key + "'");
    }
    return v;
}

long long parse_int(const std::string& name, int line, const std::string& key,
                    const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) fail(name, line, "empty value for '" + key + "'");
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        fail(name, line, "cannot parse '" + t + "' as an integer for '" + key + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& name, int line, const std::string& key,
                        const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) fail(name, line, "empty value for '" + key + "'");
    if (t[0] == '-') fail(name, line, "'" + key + "' must be non-negative");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        fail(name, line, "cannot parse '" + t + "' as an unsigned integer for '" + key + "'");
    }
    return static_cast<std::uint64_t>(v);
}

// "[a, b, c]" or a bare scalar (one-element list). Empty brackets give an
// empty list; validation downstream decides whether that is acceptable.
std::vector<std::string> split_list(const std::string& name, int line, const std::string& key,
                                    const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) fail(name, line, "empty value for '" + key + "'");
    if (t.front() != '[') return {t};
    if (t.back() != ']') fail(name, line, "unterminated list for '" + key + "'");
    const std::string inner = trim(t.substr(1, t.size() - 2));
    std::vector<std::string> items;
    if (inner.empty()) return items;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = inner.find(',', start);
        const std::string item = trim(inner.substr(start, comma - start));
        if (item.empty()) fail(name, line, "empty list element for '" + key + "'");
        items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

std::vector<double> parse_double_list(const std::string& name, int line, const std::string& key,
                                      const std::string& text) {
    std::vector<double> out;
    for (const std::string& item : split_list(name, line, key, text)) {
        out.push_back(parse_double(name, line, key, item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& name, int line, const std::string& key,
                                const std::string& text) {
    std::vector<int> out;
    for (const std::string& item : split_list(name, line, key, text)) {
        const long long v = parse_int(name, line, key, item);
        if (v < INT_MIN || v > INT_MAX) fail(name, line, "'" + key + "' value out of range");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::string& name) {
    ExperimentConfig cfg;
    bool saw_kind = false;
    std::set<std::string> seen;

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;

        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) fail(name, line, "expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) fail(name, line, "missing key before '='");
        if (!seen.insert(key).second) fail(name, line, "duplicate key '" + key + "'");

        if (key == "kind") {
            if (value == "screening") {
                cfg.kind = ExperimentKind::Screening;
            } else if (value == "qq") {
                cfg.kind = ExperimentKind::QQ;
            } else {
                fail(name, line, "kind must be 'screening' or 'qq', got '" + value + "'");
            }
            saw_kind = true;
        } else if (key == "n") {
            cfg.n_values = parse_int_list(name, line, key, value);
        } else if (key == "p") {
            const long long v = parse_int(name, line, key, value);
            if (v < 1 || v > INT_MAX) fail(name, line, "'p' out of range");
            cfg.p = static_cast<int>(v);
        } else if (key == "rho") {
            cfg.rho = parse_double(name, line, key, value);
        } else if (key == "sigma") {
            cfg.sigma_values = parse_double_list(name, line, key, value);
        } else if (key == "replicates") {
            const long long v = parse_int(name, line, key, value);
            if (v < 1 || v > INT_MAX) fail(name, line, "'replicates' out of range");
            cfg.replicates = static_cast<int>(v);
        } else if (key == "base_seed") {
            cfg.base_seed = parse_u64(name, line, key, value);
        } else if (key == "c0") {
            cfg.c0_values = parse_double_list(name, line, key, value);
        } else if (key == "a") {
            cfg.a = parse_double(name, line, key, value);
        } else if (key == "c") {
            cfg.c_values = parse_double_list(name, line, key, value);
        } else if (key == "max_model_size") {
            const long long v = parse_int(name, line, key, value);
            if (v < 0 || v > INT_MAX) fail(name, line, "'max_model_size' out of range");
            cfg.max_model_size = static_cast<int>(v);
        } else if (key == "grid_size") {
            const long long v = parse_int(name, line, key, value);
            if (v < 2 || v > INT_MAX) fail(name, line, "'grid_size' out of range (need >= 2)");
            cfg.grid_size = static_cast<int>(v);
        } else {
            fail(name, line, "unknown key '" + key + "'");
        }
    }

    if (!saw_kind) {
        throw ParameterError(name + ": missing required key 'kind' (screening | qq)");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config file '" + path + "'");
    return parse_experiment_config(in, path);
}

}  // namespace covlab
