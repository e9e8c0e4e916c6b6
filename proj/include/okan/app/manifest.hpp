#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "okan/errors.hpp"

namespace okan::app {

/// A pipeline stage failed; what() is prefixed with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Writes `text` to `path` in binary mode; throws ParseError on failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

inline constexpr const char* kCleanupPolicy =
    "retain-partial: artifacts written before a failing stage are kept and listed; "
    "the manifest records status=failed and the failing stage";

/// Run record: inputs, per-stage wall-clock timings and hashed artifacts.
class Manifest {
public:
    Manifest(std::string subcommand, std::filesystem::path out_dir);

    void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
    /// Runs `fn` as a named stage; on failure writes the manifest and rethrows
    /// a StageError naming the stage.
    void stage(const std::string& name, const std::function<void()>& fn);
    /// Records a file relative to the output directory.
    void add_artifact(const std::filesystem::path& path);
    void write(const std::string& status = "ok", const std::string& failed_stage = {},
               const std::string& error = {});

    const std::filesystem::path& out_dir() const { return out_dir_; }
    const std::vector<std::filesystem::path>& artifacts() const { return artifacts_; }

private:
    std::string subcommand_;
    std::filesystem::path out_dir_;
    nlohmann::json extra_ = nlohmann::json::object();
    nlohmann::json timings_ = nlohmann::json::object();
    std::vector<std::filesystem::path> artifacts_;
};

}  // namespace okan::app
