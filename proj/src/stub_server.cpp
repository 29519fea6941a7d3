#include "refine/stub_server.hpp"

#include <mutex>
#include <stdexcept>
#include <thread>

#include "httplib.h"

namespace refine {

struct StubServer::Impl {
    httplib::Server server;
    std::thread runner;
    int port = -1;

    mutable std::mutex mutex;
    std::vector<StubFixture> fixtures;
    std::vector<std::string> bodies;
    std::size_t next = 0;
};

StubServer::StubServer(std::vector<StubFixture> fixtures) : impl_(std::make_unique<Impl>()) {
    if (fixtures.empty()) {
        throw std::invalid_argument("stub server needs at least one fixture");
    }
    impl_->fixtures = std::move(fixtures);

    impl_->server.Post("/chat/completions",
                       [impl = impl_.get()](const httplib::Request& req,
                                            httplib::Response& res) {
                           std::scoped_lock lock(impl->mutex);
                           impl->bodies.push_back(req.body);
                           if (impl->next >= impl->fixtures.size()) {
                               res.status = 500;
                               res.set_content("{\"error\":\"stub fixtures exhausted after " +
                                                   std::to_string(impl->fixtures.size()) +
                                                   " requests\"}",
                                               "application/json");
                               return;
                           }
                           const StubFixture& fixture = impl->fixtures[impl->next++];
                           res.status = fixture.status;
                           res.set_content(fixture.body, fixture.content_type);
                       });

    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port < 0) {
        throw std::runtime_error("stub server failed to bind a local port");
    }
    impl_->runner = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->runner.joinable()) impl_->runner.join();
}

int StubServer::port() const {
    return impl_->port;
}

std::string StubServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::vector<std::string> StubServer::recorded_bodies() const {
    std::scoped_lock lock(impl_->mutex);
    return impl_->bodies;
}

std::size_t StubServer::request_count() const {
    std::scoped_lock lock(impl_->mutex);
    return impl_->bodies.size();
}

} // namespace refine
