#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <vector>

#include "lexrule/reasoner.hpp"
#include "lexrule/rule_model.hpp"

namespace lexrule::http {

struct RuleBaseHandle {
    std::string id;
    std::string name;
    std::size_t head_count = 0;
};

struct Request {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> query;
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Transport-independent request handling over an in-memory rule-base store.
///
///   GET    /health               -> 200 "ok"
///   GET    /rulebases            -> 200 [handle...]
///   POST   /rulebases[?name=]    -> 201 handle | 400 parse error | 422 diagnostics
///   GET    /rulebases/{id}       -> 200 {id,name,head_count,rules,leaves} | 404
///   DELETE /rulebases/{id}       -> 204 | 404
///   POST   /evaluate             -> 200 {holds,status,proof,stats} | 400 | 404 | 422
///
/// Facts exist only inside an /evaluate request; nothing per-case is stored.
class Service {
public:
    explicit Service(EvalOptions options = {}) : options_(options) {}

    RuleBaseHandle add(std::string name, RuleBase rb);
    bool remove(const std::string& id);
    std::vector<RuleBaseHandle> list() const;

    /// Loads every *.json rule file in `dir`; files that fail to parse or
    /// validate are reported to `log` and skipped. Returns the number loaded.
    std::size_t preload(const std::string& dir, std::ostream& log);

    Response handle(const Request& req);

private:
    struct Entry {
        std::string name;
        std::shared_ptr<const RuleBase> rule_base;
    };

    Response post_rulebase(const Request& req);
    Response get_rulebase(const std::string& id) const;
    Response post_evaluate(const Request& req) const;
    std::shared_ptr<const RuleBase> lookup(const std::string& id) const;

    EvalOptions options_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, Entry> store_;
    unsigned long next_id_ = 1;
};

/// HTTP listener bound to a Service, with CORS headers on every response.
class Server {
public:
    explicit Server(Service& service, std::string allowed_origin = "*");
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Returns the bound port (port 0 picks a free one) or -1 on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called. Requires a successful bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace lexrule::http
