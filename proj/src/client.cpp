#include "trialmeta/client.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

namespace trialmeta::extraction {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string cache_file_name(const std::string& model_name, const std::string& prompt) {
    return sha256_hex(model_name + prompt) + ".txt";
}

static std::optional<std::string> read_cache(const std::string& dir, const ModelConfig& config,
                                             const std::string& prompt) {
    if (dir.empty()) return std::nullopt;
    fs::path path = fs::path(dir) / cache_file_name(config.model_name, prompt);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string ReplayClient::complete(const ModelConfig& config, const std::string& prompt) {
    auto cached = read_cache(cache_dir_, config, prompt);
    if (!cached)
        throw TransportError("replay miss for prompt hash " +
                             sha256_hex(config.model_name + prompt) + " in " + cache_dir_);
    return *cached;
}

void prime_replay_cache(const std::string& cache_dir, const std::string& model_name,
                        const std::string& prompt, const std::string& response) {
    fs::create_directories(cache_dir);
    fs::path path = fs::path(cache_dir) / cache_file_name(model_name, prompt);
    std::ofstream out(path, std::ios::binary);
    out << response;
}

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw UsageError("endpoint URL lacks a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string HttpChatClient::complete(const ModelConfig& config, const std::string& prompt) {
    if (auto cached = read_cache(cache_dir_, config, prompt)) return *cached;

    const char* key = config.api_key_env.empty() ? nullptr : std::getenv(config.api_key_env.c_str());
    if (!key || !*key)
        throw UsageError("API key environment variable not set: " + config.api_key_env);

    ParsedUrl url = split_url(config.endpoint);
    nlohmann::json body = {
        {"model", config.model_name},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
        {"temperature", config.temperature},
    };
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(500) * (1 << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client http(url.origin);
        http.set_read_timeout(config.request_timeout_seconds, 0);
        http.set_connection_timeout(config.request_timeout_seconds, 0);
        httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
        auto res = http.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("chat completion failed with HTTP " +
                                 std::to_string(res->status) + ": " + res->body);
        try {
            auto j = nlohmann::json::parse(res->body);
            std::string text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (!cache_dir_.empty())
                prime_replay_cache(cache_dir_, config.model_name, prompt, text);
            return text;
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed chat-completion response: ") + e.what());
        }
    }
    throw TransportError("chat completion failed after " + std::to_string(config.max_retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace trialmeta::extraction
