#ifndef TRIALMETA_CLIENT_HPP
#define TRIALMETA_CLIENT_HPP

#include <functional>
#include <string>

#include "trialmeta/types.hpp"

namespace trialmeta::extraction {

struct ModelConfig {
    std::string model_name = "gpt-4-0125-preview";
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string api_key_env = "OPENAI_API_KEY";
    int max_context_tokens = 8192;
    double temperature = 0.0;
    int max_retries = 2;
    int request_timeout_seconds = 120;
};

/// Hex-encoded SHA-256, used for replay-cache file names.
std::string sha256_hex(const std::string& data);

/// Cache/replay file name for a prompt under a given model.
std::string cache_file_name(const std::string& model_name, const std::string& prompt);

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ModelConfig& config, const std::string& prompt) = 0;
};

/// Serves responses from a directory of <sha256(model+prompt)>.txt files.
/// A miss raises TransportError naming the prompt hash.
class ReplayClient final : public ChatClient {
public:
    explicit ReplayClient(std::string cache_dir) : cache_dir_(std::move(cache_dir)) {}
    std::string complete(const ModelConfig& config, const std::string& prompt) override;

private:
    std::string cache_dir_;
};

/// OpenAI-compatible chat-completions client with retry/backoff and a
/// write-through response cache (same layout the ReplayClient reads).
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(std::string cache_dir = "") : cache_dir_(std::move(cache_dir)) {}
    std::string complete(const ModelConfig& config, const std::string& prompt) override;

private:
    std::string cache_dir_;
};

/// Test double backed by an arbitrary function.
class FunctionClient final : public ChatClient {
public:
    using Fn = std::function<std::string(const ModelConfig&, const std::string&)>;
    explicit FunctionClient(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const ModelConfig& config, const std::string& prompt) override {
        ++calls;
        return fn_(config, prompt);
    }
    int calls = 0;

private:
    Fn fn_;
};

/// Writes a canned response into a replay cache directory.
void prime_replay_cache(const std::string& cache_dir, const std::string& model_name,
                        const std::string& prompt, const std::string& response);

}  // namespace trialmeta::extraction

#endif
