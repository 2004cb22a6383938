#include <cstdlib>

#include <httplib.h>

#include "channelscope/source.hpp"

namespace channelscope::ingest {

struct HttpTelemetrySource::Impl {
    explicit Impl(std::string url) : base_url(std::move(url)), client(base_url) {
        client.set_connection_timeout(10);
        client.set_read_timeout(10);
        if (const char* token = std::getenv("CHANNELSCOPE_API_TOKEN")) {
            client.set_default_headers({{"Authorization", std::string("Bearer ") + token}});
        }
    }

    std::string base_url;
    httplib::Client client;
};

HttpTelemetrySource::HttpTelemetrySource(std::string base_url)
    : impl_(std::make_unique<Impl>(std::move(base_url))) {}

HttpTelemetrySource::~HttpTelemetrySource() = default;

std::optional<ChannelState> HttpTelemetrySource::fetch(const std::string& user_id) {
    auto res = impl_->client.Get("/channels/" + user_id);
    if (!res) throw SourceUnavailable("no response from " + impl_->base_url);
    if (res->status == 404) return std::nullopt;
    if (res->status >= 500 || res->status == 429) {
        throw SourceUnavailable("status " + std::to_string(res->status) + " for " + user_id);
    }
    if (res->status != 200) {
        throw MalformedPayload("unexpected status " + std::to_string(res->status) + " for " + user_id);
    }
    return parse_channel_state(res->body);
}

}  // namespace channelscope::ingest
