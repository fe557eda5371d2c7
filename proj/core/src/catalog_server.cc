/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "edsp/catalog.h"

namespace edsp {

struct CatalogServer::Impl {
  explicit Impl(const Catalog& catalog) : catalog(catalog) {}

  const Catalog& catalog;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

namespace {

void SendJson(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(2), "application/json");
}

void SendError(httplib::Response& res, int status, const Error& error) {
  SendJson(res, status,
           {{"error", std::string(ToString(error.kind))}, {"message", error.message}});
}

}  // namespace

CatalogServer::CatalogServer(const Catalog& catalog)
    : impl_(std::make_unique<Impl>(catalog)) {
  httplib::Server& server = impl_->server;
  const Catalog* cat = &impl_->catalog;

  server.Get("/tables", [cat](const httplib::Request&, httplib::Response& res) {
    auto entries = cat->List();
    if (!entries.has_value()) return SendError(res, 500, entries.error());
    nlohmann::json body = nlohmann::json::array();
    for (const auto& entry : *entries) body.push_back(entry.ToJson());
    SendJson(res, 200, body);
  });
  server.Get(R"(/tables/([^/]+))", [cat](const httplib::Request& req,
                                         httplib::Response& res) {
    auto described = cat->Describe(req.matches[1].str());
    if (!described.has_value()) {
      int status = described.error().kind == ErrorKind::kUnknownEntry ? 404 : 500;
      return SendError(res, status, described.error());
    }
    SendJson(res, 200, *described);
  });
  auto not_allowed = [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Allow", "GET");
    SendJson(res, 405, {{"error", "method-not-allowed"}});
  };
  server.Post(".*", not_allowed);
  server.Put(".*", not_allowed);
  server.Patch(".*", not_allowed);
  server.Delete(".*", not_allowed);
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      SendJson(res, 404, {{"error", "not-found"}});
    }
  });
}

CatalogServer::~CatalogServer() { Stop(); }

Status CatalogServer::Start(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    impl_->port = port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) return IoFailure("cannot bind {}:{}", host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return Ok();
}

int CatalogServer::port() const { return impl_->port; }

void CatalogServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

Status CatalogServer::Run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    return IoFailure("cannot bind {}:{}", host, port);
  }
  impl_->port = port;
  if (!impl_->server.listen_after_bind()) return IoFailure("server stopped with an error");
  return Ok();
}

}  // namespace edsp
