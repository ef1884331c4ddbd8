#ifndef GREEDYFOOL_REMOTE_ORACLE_HPP
#define GREEDYFOOL_REMOTE_ORACLE_HPP

// HTTP client for an external classifier.
//
//   POST {endpoint}/v1/predict
//   {"height": H, "width": W, "channels": 3, "data_b64": "<row-major RGB bytes>"}
//
//   200 {"probabilities": [p_0, ..., p_{K-1}], "labels": [...]}   (labels optional)
//
// Connection failures, timeouts, 429 and 5xx responses are retried with
// exponential backoff. Other statuses and malformed bodies fail immediately.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "greedyfool/errors.hpp"
#include "greedyfool/image.hpp"
#include "greedyfool/oracle.hpp"

namespace greedyfool {

inline std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

/// Strict decoder: rejects lengths that are not a multiple of 4 and invalid characters.
inline std::optional<std::vector<std::uint8_t>> base64_decode(const std::string& text)
{
    if (text.size() % 4 != 0)
        return std::nullopt;
    std::vector<std::uint8_t> out(text.size() / 4 * 3);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0)
        return std::nullopt;
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=')
        ++padding;
    if (text.size() > 1 && text[text.size() - 2] == '=')
        ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

inline nlohmann::json predict_request_body(const ImageTensor& image)
{
    return {{"height", image.height()},
            {"width", image.width()},
            {"channels", ImageTensor::kChannelCount},
            {"data_b64", base64_encode(image.bytes())}};
}

/// Parses and validates a 200 response body.
inline ProbabilityVector parse_predict_response(const std::string& body)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw OracleProtocolError(std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("probabilities") || !j["probabilities"].is_array())
        throw OracleProtocolError("response lacks a \"probabilities\" array");
    std::vector<double> p;
    for (const auto& v : j["probabilities"]) {
        if (!v.is_number())
            throw OracleProtocolError("non-numeric probability in response");
        p.push_back(v.get<double>());
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) {
        if (!j["labels"].is_array())
            throw OracleProtocolError("\"labels\" must be an array of strings");
        for (const auto& v : j["labels"]) {
            if (!v.is_string())
                throw OracleProtocolError("\"labels\" must be an array of strings");
            labels.push_back(v.get<std::string>());
        }
    }
    return ProbabilityVector(std::move(p), std::move(labels));
}

struct RemoteOracleOptions {
    std::string endpoint; // http://host[:port][/base]
    std::chrono::milliseconds timeout{10'000};
    int retries = 3; // extra attempts after the first
    std::chrono::milliseconds initial_backoff{100};
    std::optional<std::string> bearer_token;
    std::optional<InputShape> input_shape;
    std::ptrdiff_t max_in_flight = 8;
};

class RemoteOracle final : public Oracle {
public:
    explicit RemoteOracle(RemoteOracleOptions options)
        : options_(std::move(options)), in_flight_(validated_cap(options_.max_in_flight))
    {
        const std::string scheme = "http://";
        if (options_.endpoint.rfind(scheme, 0) != 0)
            throw InvalidArgument("remote oracle endpoint must start with http://, got '" + options_.endpoint + "'");
        const auto slash = options_.endpoint.find('/', scheme.size());
        host_ = options_.endpoint.substr(0, slash);
        base_path_ = slash == std::string::npos ? "" : options_.endpoint.substr(slash);
        while (!base_path_.empty() && base_path_.back() == '/')
            base_path_.pop_back();
        if (host_.size() == scheme.size())
            throw InvalidArgument("remote oracle endpoint has no host");
        if (options_.retries < 0)
            throw InvalidArgument("retry count must be non-negative");
    }

    const RemoteOracleOptions& options() const noexcept { return options_; }

    ProbabilityVector predict(const ImageTensor& image) override
    {
        if (options_.input_shape)
            require_input_shape(image, *options_.input_shape);
        calls_.fetch_add(1, std::memory_order_relaxed);

        const std::string body = predict_request_body(image).dump();
        auto backoff = options_.initial_backoff;
        for (int attempt = 0;; ++attempt) {
            try {
                return attempt_once(body);
            }
            catch (const OracleProtocolError&) {
                failures_.fetch_add(1, std::memory_order_relaxed);
                throw;
            }
            catch (const OracleError& e) {
                failures_.fetch_add(1, std::memory_order_relaxed);
                if (!retriable(e) || attempt >= options_.retries)
                    throw;
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }

    OracleStats stats() const override
    {
        OracleStats s;
        s.total_calls = calls_.load();
        s.attempts = attempts_.load();
        s.failures = failures_.load();
        s.cumulative_latency = std::chrono::nanoseconds(latency_ns_.load());
        return s;
    }

private:
    static std::ptrdiff_t validated_cap(std::ptrdiff_t cap)
    {
        if (cap < 1)
            throw InvalidArgument("max in-flight requests must be at least 1");
        return cap;
    }

    static bool retriable(const OracleError& e)
    {
        if (const auto* s = dynamic_cast<const OracleStatusError*>(&e))
            return s->status() == 429 || s->status() >= 500;
        return dynamic_cast<const OracleTransportError*>(&e) || dynamic_cast<const OracleTimeoutError*>(&e);
    }

    ProbabilityVector attempt_once(const std::string& body)
    {
        in_flight_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{in_flight_};

        attempts_.fetch_add(1, std::memory_order_relaxed);
        httplib::Client client(host_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        httplib::Headers headers;
        if (options_.bearer_token)
            headers.emplace("Authorization", "Bearer " + *options_.bearer_token);

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(base_path_ + "/v1/predict", headers, body, "application/json");
        const auto elapsed = std::chrono::steady_clock::now() - start;
        latency_ns_.fetch_add(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count(),
                              std::memory_order_relaxed);

        if (!res) {
            const auto err = res.error();
            const std::string what = "request to " + host_ + base_path_ + "/v1/predict failed: " + httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= options_.timeout))
                throw OracleTimeoutError(what);
            throw OracleTransportError(what);
        }
        if (res->status != 200)
            throw OracleStatusError(res->status, "oracle answered HTTP " + std::to_string(res->status));
        return parse_predict_response(res->body);
    }

    RemoteOracleOptions options_;
    std::string host_;
    std::string base_path_;
    std::counting_semaphore<> in_flight_;
    std::atomic<std::uint64_t> calls_{0};
    std::atomic<std::uint64_t> attempts_{0};
    std::atomic<std::uint64_t> failures_{0};
    std::atomic<std::int64_t> latency_ns_{0};
};

} // namespace greedyfool

#endif // GREEDYFOOL_REMOTE_ORACLE_HPP
