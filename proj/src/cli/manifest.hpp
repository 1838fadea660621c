#ifndef TOPOSPAT_CLI_MANIFEST_HPP
#define TOPOSPAT_CLI_MANIFEST_HPP

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace topospat::cli {

std::uint64_t fnv1a64(std::string_view bytes);

/// Run record written as `manifest.json` next to a subcommand's outputs.
class Manifest {
public:
    explicit Manifest(std::string subcommand);

    nlohmann::ordered_json& parameters() { return doc_["parameters"]; }
    void set_seed(std::uint64_t seed) { doc_["seed"] = seed; }
    void add_input(const std::string& role, const std::string& path);
    void add_output(const std::string& path);

    /// Time `fn` as the named stage; the stage name stays current if it throws.
    template <typename Fn>
    decltype(auto) stage(const std::string& name, Fn&& fn) {
        current_ = name;
        const auto start = std::chrono::steady_clock::now();
        struct Record {
            Manifest& m;
            const std::string& name;
            std::chrono::steady_clock::time_point start;
            ~Record() {
                m.doc_["timings_seconds"][name] =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
        } record{*this, name, start};
        return fn();
    }

    const std::string& current_stage() const { return current_; }
    void write(const std::string& dir) const;

private:
    nlohmann::ordered_json doc_;
    std::string current_;
};

} // namespace topospat::cli

#endif
