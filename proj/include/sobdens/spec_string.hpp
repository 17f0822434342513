#pragma once

#include <map>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace sobdens {

/// Catalog entries are addressed as `name` or `name:key=value,key=value`.
/// A bare value after the colon (`const:5`) is stored under the key "value".
struct SpecString {
    std::string name;
    std::map<std::string, std::string> params;

    static SpecString parse(std::string_view text)
    {
        SpecString out;
        auto colon = text.find(':');
        out.name = std::string(text.substr(0, colon));
        if (out.name.empty())
            throw ConfigError("empty catalog name in '" + std::string(text) + "'");
        if (colon == std::string_view::npos)
            return out;
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            auto comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            auto eq = item.find('=');
            if (eq == std::string_view::npos)
                out.params["value"] = std::string(item);
            else
                out.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
            if (comma == std::string_view::npos)
                break;
            rest = rest.substr(comma + 1);
        }
        return out;
    }

    bool has(const std::string& key) const { return params.count(key) != 0; }

    double number(const std::string& key, double fallback) const
    {
        auto it = params.find(key);
        if (it == params.end())
            return fallback;
        return to_number(it->second);
    }

    double number(const std::string& key) const
    {
        auto it = params.find(key);
        if (it == params.end())
            throw ConfigError("catalog entry '" + name + "' requires parameter '" + key + "'");
        return to_number(it->second);
    }

private:
    double to_number(const std::string& s) const
    {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size())
                throw ConfigError("trailing characters in number '" + s + "'");
            return v;
        } catch (const std::invalid_argument&) {
            throw ConfigError("not a number: '" + s + "' in catalog entry '" + name + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("number out of range: '" + s + "'");
        }
    }
};

} // namespace sobdens
