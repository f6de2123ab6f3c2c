#include "reportkg/compliance.hpp"
#include "reportkg/error.hpp"
#include "reportkg/llm.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace reportkg::llm {

// ---------------------------------------------------------------------------
// HTTP

HttpBackend::HttpBackend(std::string endpoint, std::string credential_env, std::chrono::seconds timeout)
    : credential_env_(std::move(credential_env)), timeout_(timeout) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::InvalidBackendConfig, "endpoint must be an absolute http(s) URL: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
}

std::string HttpBackend::id() const { return "http:" + scheme_host_port_ + path_; }

std::optional<std::string> HttpBackend::extract_text(std::string_view body) {
    const auto json = nlohmann::json::parse(body, nullptr, false);
    if (json.is_discarded() || !json.is_object()) {
        return std::nullopt;
    }
    const auto string_at = [](const nlohmann::json& node, const nlohmann::json::json_pointer& pointer)
        -> std::optional<std::string> {
        if (node.contains(pointer) && node.at(pointer).is_string()) {
            return node.at(pointer).get<std::string>();
        }
        return std::nullopt;
    };
    for (const char* pointer :
         {"/choices/0/message/content", "/choices/0/text", "/message/content", "/response", "/content", "/text"}) {
        if (auto text = string_at(json, nlohmann::json::json_pointer(pointer))) {
            return text;
        }
    }
    return std::nullopt;
}

std::string HttpBackend::complete(const ChatRequest& request) {
    const char* credential = std::getenv(credential_env_.c_str());
    if (credential == nullptr || *credential == '\0') {
        throw Error(ErrorKind::InvalidBackendConfig, "credential variable " + credential_env_ + " is not set");
    }
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_bearer_token_auth(credential);
    const auto result = client.Post(path_, request.to_json(), "application/json");
    if (!result) {
        throw Error(ErrorKind::BackendUnavailable, id() + ": " + httplib::to_string(result.error()));
    }
    if (result->status == 429) {
        throw Error(ErrorKind::RateLimited, id() + ": HTTP 429");
    }
    if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorKind::BackendUnavailable, id() + ": HTTP " + std::to_string(result->status));
    }
    auto text = extract_text(result->body);
    if (!text) {
        throw Error(ErrorKind::BackendUnavailable, id() + ": response carries no generated text");
    }
    return *text;
}

// ---------------------------------------------------------------------------
// Replay

std::string prompt_hash(std::string_view prompt) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(prompt.data(), prompt.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::IoError, "SHA-256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

ReplayBackend::ReplayBackend(const std::filesystem::path& fixture) : name_(fixture.filename().string()) {
    std::ifstream in(fixture);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open replay fixture " + fixture.string());
    }
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("prompt_hash") || !record.contains("response_text") ||
            !record["prompt_hash"].is_string() || !record["response_text"].is_string()) {
            throw Error(ErrorKind::IoError,
                        fixture.string() + ":" + std::to_string(line_number) + ": malformed replay record");
        }
        responses_[record["prompt_hash"].get<std::string>()] = record["response_text"].get<std::string>();
    }
}

ReplayBackend::ReplayBackend(std::string name, std::unordered_map<std::string, std::string> responses)
    : name_(std::move(name)), responses_(std::move(responses)) {}

std::string ReplayBackend::complete(const ChatRequest& request) {
    const auto it = responses_.find(prompt_hash(request.prompt));
    if (it == responses_.end()) {
        throw Error(ErrorKind::BackendUnavailable, id() + ": no recorded response for prompt");
    }
    return it->second;
}

void write_replay_fixture(const std::filesystem::path& path,
                          std::span<const std::pair<std::string, std::string>> prompt_responses) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot write replay fixture " + path.string());
    }
    for (const auto& [prompt, response] : prompt_responses) {
        out << nlohmann::json{{"prompt_hash", prompt_hash(prompt)}, {"response_text", response}}.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Mock

namespace {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, double flip_rate_in_range, double flip_rate_out_of_range,
                         PromptTemplate prompt_template, const units::UnitRegistry& registry)
    : seed_(seed),
      flip_in_(flip_rate_in_range),
      flip_out_(flip_rate_out_of_range),
      template_(std::move(prompt_template)),
      registry_(registry) {
    for (double rate : {flip_in_, flip_out_}) {
        if (rate < 0.0 || rate > 1.0) {
            throw Error(ErrorKind::InvalidBackendConfig, "mock flip rates must lie in [0, 1]");
        }
    }
}

std::string MockBackend::id() const {
    std::ostringstream out;
    out << "mock:seed=" << seed_ << ",flip_in=" << flip_in_ << ",flip_out=" << flip_out_;
    return out.str();
}

double MockBackend::flip_draw(std::uint64_t seed, std::string_view prompt) {
    return static_cast<double>(splitmix64(seed ^ fnv1a64(prompt)) >> 11) * 0x1.0p-53;
}

std::string MockBackend::complete(const ChatRequest& request) {
    std::optional<compliance::Verdict> verdict;
    for (const auto& [measured, limits] : template_.candidate_splits(request.prompt)) {
        try {
            const auto quantity = registry_.parse_quantity(measured);
            const auto range = registry_.parse_acceptance_limits(limits);
            verdict = compliance::oracle_check(quantity, range);
            break;
        } catch (const Error&) {
            continue;
        }
    }
    if (!verdict || *verdict == compliance::Verdict::Unknown) {
        return "I cannot evaluate this statement with the information given.";
    }
    bool in_range = *verdict == compliance::Verdict::InRange;
    const double rate = in_range ? flip_in_ : flip_out_;
    if (flip_draw(seed_, request.prompt) < rate) {
        in_range = !in_range;
    }
    return in_range ? "True. The measured value lies within the acceptance limits."
                    : "False. The measured value lies outside the acceptance limits.";
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config, const PromptTemplate& prompt_template,
                                          const units::UnitRegistry& registry) {
    config.validate();
    switch (config.kind) {
        case BackendKind::Http: return std::make_unique<HttpBackend>(config.endpoint, config.credential_env);
        case BackendKind::Replay: return std::make_unique<ReplayBackend>(config.replay_path);
        case BackendKind::Mock:
            return std::make_unique<MockBackend>(config.seed, config.flip_rate_in_range, config.flip_rate_out_of_range,
                                                 prompt_template, registry);
    }
    throw Error(ErrorKind::InvalidBackendConfig, "unknown backend kind");
}

}  // namespace reportkg::llm
