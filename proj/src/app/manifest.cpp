#include "okan/app/manifest.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <array>
#include <fstream>
#include <sstream>


namespace okan::app {

namespace {

std::string to_hex(const unsigned char* bytes, unsigned len) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += digits[bytes[i] >> 4];
        out += digits[bytes[i] & 15];
    }
    return out;
}

std::string digest(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    return to_hex(md.data(), len);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) { return digest(bytes); }

std::string sha256_file(const std::filesystem::path& path) { return digest(read_text(path)); }

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ParseError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Manifest::Manifest(std::string subcommand, std::filesystem::path out_dir)
    : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)) {
    std::filesystem::create_directories(out_dir_);
}

void Manifest::stage(const std::string& name, const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fn();
    } catch (const std::exception& e) {
        timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write("failed", name, e.what());
        throw StageError(name, e.what());
    }
    timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void Manifest::add_artifact(const std::filesystem::path& path) { artifacts_.push_back(path); }

void Manifest::write(const std::string& status, const std::string& failed_stage, const std::string& error) {
    nlohmann::json j;
    j["subcommand"] = subcommand_;
    j["output_dir"] = out_dir_.string();
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    j["versions"] = {{"okan", OKAN_VERSION}, {"openssl", OPENSSL_VERSION_TEXT},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    j["timings_seconds"] = timings_;
    j["status"] = status;
    if (!failed_stage.empty()) {
        j["failed_stage"] = failed_stage;
        j["error"] = error;
    }
    j["cleanup_policy"] = kCleanupPolicy;
    auto& arts = j["artifacts"];
    arts = nlohmann::json::array();
    for (const auto& rel : artifacts_) {
        const auto full = out_dir_ / rel;
        if (!std::filesystem::exists(full)) continue;
        arts.push_back({{"path", rel.generic_string()},
                        {"sha256", sha256_file(full)},
                        {"bytes", std::filesystem::file_size(full)}});
    }
    write_text(out_dir_ / "manifest.json", j.dump(2) + "\n");
}

}  // namespace okan::app
