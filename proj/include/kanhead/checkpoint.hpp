#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "kanhead/head.hpp"

namespace kanhead {

// Checkpoint layout:
//
//   line 1   "KANHEAD-CHECKPOINT 1"
//   line 2   one-line JSON: {"family", "spec", "seed", "params": [{name, rows, cols}...]}
//   rest     parameter values in declaration order, IEEE-754 binary64,
//            little-endian, row-major
//
// Values are written bit-for-bit so a load reproduces the head exactly.

inline constexpr std::string_view checkpoint_magic = "KANHEAD-CHECKPOINT 1";

inline nlohmann::json spec_to_json(const HeadSpec& s) {
    return {{"family", to_string(s.family)},
            {"in", s.in},
            {"out", s.out},
            {"hidden_dim", s.hidden_dim},
            {"activation", to_string(s.activation)},
            {"grid_size", s.grid_size},
            {"spline_order", s.spline_order},
            {"spline_scaler", s.spline_scaler},
            {"silu_path", s.silu_path},
            {"fourier_bias", s.fourier_bias},
            {"dropout", s.dropout},
            {"l1_strength", s.l1_strength}};
}

inline HeadSpec spec_from_json(const nlohmann::json& j) {
    HeadSpec s;
    s.family = parse_head_family(j.at("family").get<std::string>());
    s.in = j.at("in").get<std::size_t>();
    s.out = j.at("out").get<std::size_t>();
    s.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    s.activation = parse_activation(j.at("activation").get<std::string>());
    s.grid_size = j.at("grid_size").get<std::size_t>();
    s.spline_order = j.at("spline_order").get<std::size_t>();
    s.spline_scaler = j.at("spline_scaler").get<bool>();
    s.silu_path = j.at("silu_path").get<bool>();
    s.fourier_bias = j.at("fourier_bias").get<bool>();
    s.dropout = j.at("dropout").get<double>();
    s.l1_strength = j.at("l1_strength").get<double>();
    return s;
}

namespace detail {

inline void put_le64(std::string& buf, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

inline double get_le64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

} // namespace detail

inline std::string serialize_checkpoint(Head& head) {
    nlohmann::json header{{"family", to_string(head.family())}, {"spec", spec_to_json(head.spec())}, {"seed", head.seed()}};
    auto params = head.params();
    nlohmann::json plist = nlohmann::json::array();
    for (const auto& p : params) plist.push_back({{"name", p.name}, {"rows", p.value->rows()}, {"cols", p.value->cols()}});
    header["params"] = plist;

    std::string out(checkpoint_magic);
    out += '\n';
    out += header.dump();
    out += '\n';
    for (const auto& p : params)
        for (double v : p.value->data()) detail::put_le64(out, v);
    return out;
}

inline Head deserialize_checkpoint(const std::string& bytes, const std::string& source = "<checkpoint>") {
    const auto nl1 = bytes.find('\n');
    if (nl1 == std::string::npos || bytes.compare(0, nl1, checkpoint_magic) != 0) {
        throw FormatError(source + ": not a head checkpoint");
    }
    const auto nl2 = bytes.find('\n', nl1 + 1);
    if (nl2 == std::string::npos) throw FormatError(source + ": truncated header");

    nlohmann::json header;
    HeadSpec spec;
    std::uint64_t seed = 0;
    try {
        header = nlohmann::json::parse(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
        spec = spec_from_json(header.at("spec"));
        seed = header.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(source + ": bad header: " + e.what());
    } catch (const ArgumentError& e) {
        throw FormatError(source + ": bad header: " + e.what());
    }

    Head head(spec, seed);
    auto params = head.params();
    const auto& plist = header.at("params");
    if (!plist.is_array() || plist.size() != params.size()) throw FormatError(source + ": parameter list mismatch");

    std::size_t offset = nl2 + 1;
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t n = 0; n < params.size(); ++n) {
        const auto& entry = plist[n];
        auto& p = params[n];
        if (entry.at("name").get<std::string>() != p.name || entry.at("rows").get<std::size_t>() != p.value->rows() ||
            entry.at("cols").get<std::size_t>() != p.value->cols()) {
            throw FormatError(source + ": parameter '" + p.name + "' does not match the recorded architecture");
        }
        const std::size_t need = p.value->size() * 8;
        if (offset + need > bytes.size()) throw FormatError(source + ": truncated parameter data");
        for (double& v : p.value->data()) {
            v = detail::get_le64(raw + offset);
            offset += 8;
        }
    }
    if (offset != bytes.size()) throw FormatError(source + ": trailing bytes after parameters");
    return head;
}

inline void save_checkpoint(Head& head, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write checkpoint '" + path.string() + "'");
    const std::string bytes = serialize_checkpoint(head);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Head load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes, path.string());
}

} // namespace kanhead
