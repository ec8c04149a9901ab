#include "dabp/instance_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dabp {

namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

} // namespace

std::string to_text(const COPInstance& instance) {
    validate_instance(instance);
    // hand-rolled writer: fixed field order and %.17g doubles keep the output
    // byte-stable for equal instances
    std::string out;
    out.reserve(64 + instance.functions.size() * 128);
    out += "{\n  \"version\": 1,\n  \"domains\": [";
    for (std::size_t i = 0; i < instance.domains.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(instance.domains[i]);
    }
    out += "],\n  \"functions\": [";
    for (std::size_t l = 0; l < instance.functions.size(); ++l) {
        const CostFunction& fn = instance.functions[l];
        out += l ? ",\n    " : "\n    ";
        out += "{\"scope\": [";
        for (std::size_t j = 0; j < fn.scope.size(); ++j) {
            if (j) out += ", ";
            out += std::to_string(fn.scope[j]);
        }
        out += "], \"table\": [";
        for (std::size_t j = 0; j < fn.table.size(); ++j) {
            if (j) out += ", ";
            append_double(out, fn.table[j]);
        }
        out += "]}";
    }
    out += instance.functions.empty() ? "],\n" : "\n  ],\n";
    out += "  \"meta\": {\"family\": \"" + instance.meta.family + "\", \"params\": {";
    bool first = true;
    for (const auto& [key, value] : instance.meta.params) {
        if (!first) out += ", ";
        first = false;
        out += "\"" + key + "\": ";
        append_double(out, value);
    }
    out += "}, \"seed\": " + std::to_string(instance.meta.seed) + "}\n}\n";
    return out;
}

COPInstance from_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("instance parse error: ") + e.what());
    }

    COPInstance inst;
    try {
        if (doc.value("version", 0) != 1)
            throw std::runtime_error("unsupported instance format version");
        inst.domains = doc.at("domains").get<std::vector<int>>();
        const auto& fns = doc.at("functions");
        if (!fns.is_array()) throw std::runtime_error("\"functions\" must be an array");
        for (std::size_t l = 0; l < fns.size(); ++l) {
            CostFunction fn;
            try {
                fn.scope = fns[l].at("scope").get<std::vector<int>>();
                fn.table = fns[l].at("table").get<std::vector<double>>();
            } catch (const nlohmann::json::exception& e) {
                throw std::runtime_error("function " + std::to_string(l) + ": " + e.what());
            }
            inst.functions.push_back(std::move(fn));
        }
        if (doc.contains("meta")) {
            const auto& meta = doc["meta"];
            inst.meta.family = meta.value("family", std::string{});
            inst.meta.seed = meta.value("seed", std::uint64_t{0});
            if (meta.contains("params"))
                for (const auto& [key, value] : meta["params"].items())
                    inst.meta.params[key] = value.get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed instance document: ") + e.what());
    }

    try {
        validate_instance(inst);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("invalid instance: ") + e.what());
    }
    return inst;
}

void save_instance(const COPInstance& instance, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << to_text(instance);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

COPInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_text(buf.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

} // namespace dabp
