#include "ehi/service.hpp"

#include "ehi/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>

namespace ehi {

namespace {

Json ok_response(const std::string& id, Json result) {
    Json j;
    j["id"] = id;
    j["ok"] = true;
    j["result"] = std::move(result);
    return j;
}

Json error_response(const std::string& id, std::string_view code, std::string_view message) {
    Json j;
    j["id"] = id;
    j["ok"] = false;
    j["error"] = Json{{"code", code}, {"message", message}};
    return j;
}

std::optional<std::string> text_param(const Json& params, const char* name) {
    if (!params.contains(name) || params.at(name).is_null()) return std::nullopt;
    if (!params.at(name).is_string()) {
        throw RpcError("invalid_params", std::string("'") + name + "' must be a string");
    }
    return params.at(name).get<std::string>();
}

std::optional<std::vector<std::string>> list_param(const Json& params, const char* name) {
    if (!params.contains(name) || params.at(name).is_null()) return std::nullopt;
    const auto& v = params.at(name);
    if (!v.is_array()) throw RpcError("invalid_params", std::string("'") + name + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) {
            throw RpcError("invalid_params", std::string("'") + name + "' must contain only strings");
        }
        out.push_back(e.get<std::string>());
    }
    return out;
}

} // namespace

RewardService::RewardService(const Gazetteer& gazetteer, ServiceConfig config)
    : gazetteer_(&gazetteer), config_(config) {
    config_.metric.validate();
}

EhiReport RewardService::score(const Json& params) const {
    if (!params.is_object()) throw RpcError("invalid_params", "params must be an object");
    const GazetteerExtractor extractor(*gazetteer_, config_.metric.heuristics_enabled);
    const auto& opts = gazetteer_->normalize_options();

    auto side = [&](const char* text_name, const char* list_name,
                    bool required) -> std::optional<EntitySet> {
        if (auto list = list_param(params, list_name)) return EntitySet::from_surfaces(*list, opts);
        if (auto text = text_param(params, text_name)) return extractor.extract(*text);
        if (required) {
            throw RpcError("invalid_params", std::string("missing '") + text_name + "' or '" +
                                                 list_name + "'");
        }
        return std::nullopt;
    };

    const auto source = side("source", "entities_source", true);
    const auto summary = side("summary", "entities_summary", true);
    const auto reference = side("reference", "entities_reference", false);
    return score_entities(*source, *summary, reference ? &*reference : nullptr, config_.metric);
}

Json RewardService::handle(const Json& request) const {
    if (!request.is_object()) return error_response("", "invalid_request", "request must be an object");
    if (!request.contains("id") || !request.at("id").is_string() ||
        request.at("id").get<std::string>().empty()) {
        return error_response("", "invalid_request", "'id' must be a non-empty string");
    }
    const auto id = request.at("id").get<std::string>();
    if (!request.contains("method") || !request.at("method").is_string()) {
        return error_response(id, "invalid_request", "'method' must be a string");
    }
    const auto method = request.at("method").get<std::string>();
    const Json params = request.contains("params") ? request.at("params") : Json::object();
    if (!params.is_object()) return error_response(id, "invalid_params", "params must be an object");

    try {
        if (method == "ping") {
            return ok_response(id, Json{{"version", kServiceVersion}});
        }
        if (method == "score") {
            return ok_response(id, report_to_json(score(params)));
        }
        if (method == "score_batch") {
            if (!params.contains("pairs") || !params.at("pairs").is_array()) {
                throw RpcError("invalid_params", "'pairs' must be an array");
            }
            const auto& pairs = params.at("pairs");
            if (pairs.size() > config_.max_batch) {
                throw RpcError("batch_too_large", "batch of " + std::to_string(pairs.size()) +
                                                      " exceeds max_batch " +
                                                      std::to_string(config_.max_batch));
            }
            Json reports = Json::array();
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                try {
                    reports.push_back(report_to_json(score(pairs[i])));
                } catch (const RpcError& e) {
                    throw RpcError(e.code(), "pair " + std::to_string(i) + ": " + e.what());
                }
            }
            return ok_response(id, Json{{"reports", std::move(reports)}});
        }
        if (method == "extract") {
            const auto text = text_param(params, "text");
            if (!text) throw RpcError("invalid_params", "missing 'text'");
            const auto set = extract_entities(*text, *gazetteer_, config_.metric.heuristics_enabled);
            return ok_response(id, Json{{"entities", mentions_to_json(set)}});
        }
        return error_response(id, "method_not_found", "unknown method '" + method + "'");
    } catch (const RpcError& e) {
        return error_response(id, e.code(), e.what());
    } catch (const std::exception& e) {
        return error_response(id, "internal_error", e.what());
    }
}

std::string RewardService::handle_line(std::string_view line) const {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    try {
        Json request;
        try {
            request = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            return dump_line(error_response(
                "", "parse_error", "malformed JSON at byte " + std::to_string(e.byte)));
        }
        return dump_line(handle(request));
    } catch (const std::exception& e) {
        return dump_line(error_response("", "internal_error", e.what()));
    }
}

void RewardService::serve_stream(std::istream& in, std::ostream& out) const {
    std::string line;
    while (std::getline(in, line)) {
        out << handle_line(line) << '\n';
        out.flush();
    }
}

// --- TCP ---------------------------------------------------------------------

std::pair<std::string, std::uint16_t> parse_listen_address(std::string_view address) {
    std::string host = "127.0.0.1";
    std::string_view port_text = address;
    if (const auto colon = address.rfind(':'); colon != std::string_view::npos) {
        if (colon > 0) host = std::string(address.substr(0, colon));
        port_text = address.substr(colon + 1);
    }
    unsigned value = 0;
    const auto* end = port_text.data() + port_text.size();
    const auto [ptr, ec] = std::from_chars(port_text.data(), end, value);
    if (port_text.empty() || ec != std::errc() || ptr != end || value > 65535) {
        throw Error(ErrorCode::InvalidConfig, "invalid listen address '" + std::string(address) + "'");
    }
    return {host, static_cast<std::uint16_t>(value)};
}

TcpServer::TcpServer(const RewardService& service, std::string host, std::uint16_t port)
    : service_(&service), host_(std::move(host)), port_(port) {}

TcpServer::~TcpServer() {
    stop();
    {
        std::lock_guard lock(threads_mutex_);
        for (auto& t : threads_) {
            if (t.joinable()) t.join();
        }
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::start() {
    const std::string where = host_ + ":" + std::to_string(port_);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* found = nullptr;
    if (::getaddrinfo(host_.c_str(), std::to_string(port_).c_str(), &hints, &found) != 0 ||
        found == nullptr) {
        throw Error(ErrorCode::Io, "cannot resolve listen address " + where);
    }
    int fd = -1;
    std::string reason = "no usable address";
    for (auto* ai = found; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int yes = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) break;
        reason = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) throw Error(ErrorCode::Io, "cannot listen on " + where + ": " + reason);

    sockaddr_storage bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) == 0) {
        if (bound.ss_family == AF_INET) {
            port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
        } else if (bound.ss_family == AF_INET6) {
            port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
        }
    }
    listen_fd_ = fd;
}

void TcpServer::run(const std::atomic<bool>* external_stop) {
    auto should_stop = [&] {
        return stopping_.load() || (external_stop != nullptr && external_stop->load());
    };
    while (!should_stop()) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 100);
        if (ready <= 0) continue;
        const int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) continue;
        std::lock_guard lock(threads_mutex_);
        threads_.emplace_back([this, client] { serve_connection(client); });
    }
    stopping_ = true;
    std::lock_guard lock(threads_mutex_);
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
    threads_.clear();
}

namespace {

bool write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

} // namespace

void TcpServer::serve_connection(int fd) {
    std::string pending;
    char buf[8192];
    bool open = true;
    while (open && !stopping_) {
        pollfd pfd{fd, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 100);
        if (ready < 0 && errno != EINTR) break;
        if (ready <= 0) continue;
        const auto n = ::recv(fd, buf, sizeof(buf), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            open = false;
        } else {
            pending.append(buf, static_cast<std::size_t>(n));
        }
        std::size_t start = 0;
        for (auto nl = pending.find('\n', start); nl != std::string::npos;
             nl = pending.find('\n', start)) {
            auto response = service_->handle_line(std::string_view(pending).substr(start, nl - start));
            response.push_back('\n');
            if (!write_all(fd, response)) {
                open = false;
                break;
            }
            start = nl + 1;
        }
        pending.erase(0, start);
    }
    if (!pending.empty() && !stopping_) {
        auto response = service_->handle_line(pending);
        response.push_back('\n');
        write_all(fd, response);
    }
    ::close(fd);
}

} // namespace ehi
