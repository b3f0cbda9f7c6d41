#pragma once

// Shared helpers for the JSON-backed file formats. Every accessor reports
// failures as parse_error carrying the field path.

#include <istream>
#include <iterator>
#include <limits>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "cprrtc/errors.hpp"

namespace cprrtc::detail {

using json = nlohmann::json;

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline json parse_document(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        // nlohmann reports the byte *after* the offending token.
        std::size_t at = e.byte == 0 ? 0 : e.byte - 1;
        throw parse_error(line_column(text, at), e.what());
    }
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw parse_error(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw parse_error(path + "." + key, "missing required field");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) throw parse_error(path, "expected a number");
    return v.get<double>();
}

inline long long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw parse_error(path, "expected an integer");
    return v.get<long long>();
}

inline Eigen::VectorXd as_vector(const json& v, const std::string& path, long expected = -1) {
    if (!v.is_array()) throw parse_error(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<long>(v.size()) != expected)
        throw parse_error(path, "expected " + std::to_string(expected) + " entries, got " +
                                    std::to_string(v.size()));
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

inline Eigen::Vector3d as_vec3(const json& v, const std::string& path) {
    return as_vector(v, path, 3);
}

inline json to_array(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace cprrtc::detail
