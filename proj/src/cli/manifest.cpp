#include "manifest.hpp"

#include "topospat/text_io.hpp"

#include <cstdio>
#include <filesystem>

namespace topospat::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Manifest::Manifest(std::string subcommand) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["version"] = TOPOSPAT_VERSION;
    doc_["parameters"] = nlohmann::ordered_json::object();
    doc_["seed"] = nullptr;
    doc_["inputs"] = nlohmann::ordered_json::array();
    doc_["outputs"] = nlohmann::ordered_json::array();
    doc_["timings_seconds"] = nlohmann::ordered_json::object();
}

void Manifest::add_input(const std::string& role, const std::string& path) {
    const auto bytes = text::read_file(path);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    doc_["inputs"].push_back({{"role", role}, {"path", path}, {"bytes", bytes.size()}, {"fnv1a64", hex}});
}

void Manifest::add_output(const std::string& path) {
    doc_["outputs"].push_back(std::filesystem::path(path).filename().string());
}

void Manifest::write(const std::string& dir) const {
    text::write_file_atomic((std::filesystem::path(dir) / "manifest.json").string(), doc_.dump(2) + "\n");
}

} // namespace topospat::cli
