#pragma once

// Small ASCII string utilities shared across modules. All are
// locale-independent; only [A-Za-z] counts as alphabetic.

#include <cctype>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>

namespace vtgforge {

inline bool ascii_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(ascii_lower(c));
    return out;
}

inline std::string_view trim(std::string_view s) {
    auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
    };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Lowercase, trimmed, internal whitespace runs collapsed to one space.
inline std::string normalize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : trim(s)) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(ascii_lower(c));
    }
    return out;
}

// Canonical timestamp rendering: fixed one-decimal seconds. The training
// data factory and the reward parser must agree on this rendering.
inline std::string format_seconds(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", seconds);
    return buf;
}

// Replaces every `{name}` placeholder with its value. Unknown
// placeholders are left untouched.
inline std::string render_template(std::string_view tpl,
                                   const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            std::size_t close = tpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(tpl.substr(i + 1, close - i - 1));
                auto it = values.find(key);
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tpl[i]);
        ++i;
    }
    return out;
}

}  // namespace vtgforge
