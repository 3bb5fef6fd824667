#pragma once

#include "ehi/entities.hpp"
#include "ehi/json_io.hpp"
#include "ehi/metric.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace ehi {

inline constexpr std::string_view kServiceVersion = "1.0.0";
inline constexpr std::uint16_t kDefaultServicePort = 7431;

/// Request-level failure reported back to the client as {code, message}.
class RpcError : public std::runtime_error {
public:
    RpcError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct ServiceConfig {
    MetricConfig metric;
    std::size_t max_batch = 1024;
};

/// Newline-delimited JSON request handler.
///
/// Request:  {"id": "...", "method": "ping" | "score" | "score_batch" | "extract",
///            "params": {...}}
/// Response: {"id": "...", "ok": true, "result": {...}}
///       or  {"id": "...", "ok": false, "error": {"code": "...", "message": "..."}}
///
/// Error codes: parse_error, invalid_request, method_not_found,
/// invalid_params, batch_too_large, internal_error. When the request id
/// cannot be recovered the response carries "id": "".
///
/// score params: source | entities_source, summary | entities_summary,
/// optional reference | entities_reference. Entity lists bypass the built-in
/// extractor and are normalized like gazetteer keys.
class RewardService {
public:
    RewardService(const Gazetteer& gazetteer, ServiceConfig config);

    /// Handles one request line; returns the response without a newline.
    /// Never throws.
    std::string handle_line(std::string_view line) const;

    Json handle(const Json& request) const;

    /// Scores one params object. Throws RpcError.
    EhiReport score(const Json& params) const;

    /// Reads requests until EOF, answering each line in order.
    void serve_stream(std::istream& in, std::ostream& out) const;

    const ServiceConfig& config() const noexcept { return config_; }

private:
    const Gazetteer* gazetteer_;
    ServiceConfig config_;
};

/// Listening TCP endpoint; one thread per connection, responses in request
/// order within a connection.
class TcpServer {
public:
    TcpServer(const RewardService& service, std::string host, std::uint16_t port);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    /// Binds and listens. Throws Error(Io) naming the address.
    void start();

    /// Actual bound port (useful with port 0).
    std::uint16_t port() const noexcept { return port_; }

    /// Accepts connections until stop() is called or `external_stop` (if
    /// given) becomes true, then joins all connection threads.
    void run(const std::atomic<bool>* external_stop = nullptr);

    void stop() noexcept { stopping_ = true; }

private:
    void serve_connection(int fd);

    const RewardService* service_;
    std::string host_;
    std::uint16_t port_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::mutex threads_mutex_;
    std::vector<std::thread> threads_;
};

/// Parses "host:port" or ":port" or "port". Throws Error(InvalidConfig).
std::pair<std::string, std::uint16_t> parse_listen_address(std::string_view address);

} // namespace ehi
