#include "lexrule/http_service.hpp"

#include <filesystem>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "lexrule/loader.hpp"

namespace lexrule::http {

using ordered_json = nlohmann::ordered_json;

namespace {

Response json_response(int status, const ordered_json& body) {
    return {status, body.dump(), "application/json"};
}

Response error_response(int status, const std::string& message) {
    ordered_json body;
    body["error"] = message;
    return json_response(status, body);
}

ordered_json handle_json(const RuleBaseHandle& h) {
    ordered_json j;
    j["id"] = h.id;
    j["name"] = h.name;
    j["head_count"] = h.head_count;
    return j;
}

ordered_json diagnostics_json(const std::vector<Diagnostic>& diags) {
    ordered_json arr = ordered_json::array();
    for (const auto& d : diags) {
        ordered_json j;
        j["severity"] = std::string(to_string(d.severity));
        j["code"] = d.code;
        j["subject"] = d.subject;
        j["message"] = d.message;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

RuleBaseHandle Service::add(std::string name, RuleBase rb) {
    std::unique_lock lock(mutex_);
    std::string id = "rb" + std::to_string(next_id_++);
    RuleBaseHandle h{id, name, rb.size()};
    store_.emplace(id, Entry{std::move(name), std::make_shared<const RuleBase>(std::move(rb))});
    return h;
}

bool Service::remove(const std::string& id) {
    std::unique_lock lock(mutex_);
    return store_.erase(id) != 0;
}

std::vector<RuleBaseHandle> Service::list() const {
    std::shared_lock lock(mutex_);
    std::vector<RuleBaseHandle> out;
    for (const auto& [id, e] : store_)
        out.push_back({id, e.name, e.rule_base->size()});
    return out;
}

std::shared_ptr<const RuleBase> Service::lookup(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = store_.find(id);
    return it == store_.end() ? nullptr : it->second.rule_base;
}

std::size_t Service::preload(const std::string& dir, std::ostream& log) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::size_t loaded = 0;
    for (const auto& file : files) {
        try {
            auto checked = validate(parse_rule_file(read_file(file.string())));
            if (!checked.rule_base) {
                log << "skipping " << file.string() << ": rule base has errors\n";
                continue;
            }
            // "contract.rules.json" is listed as "contract".
            auto name = file.filename().string();
            name = name.substr(0, name.find('.'));
            add(name, std::move(*checked.rule_base));
            ++loaded;
        } catch (const std::exception& e) {
            log << "skipping " << file.string() << ": " << e.what() << "\n";
        }
    }
    return loaded;
}

Response Service::handle(const Request& req) {
    const std::string& path = req.path;
    static const std::string prefix = "/rulebases/";

    if (path == "/health" && req.method == "GET")
        return {200, "ok", "text/plain"};
    if (path == "/rulebases") {
        if (req.method == "GET") {
            ordered_json arr = ordered_json::array();
            for (const auto& h : list())
                arr.push_back(handle_json(h));
            return json_response(200, arr);
        }
        if (req.method == "POST")
            return post_rulebase(req);
        return error_response(405, "method not allowed");
    }
    if (path.rfind(prefix, 0) == 0 && path.size() > prefix.size()) {
        const std::string id = path.substr(prefix.size());
        if (req.method == "GET")
            return get_rulebase(id);
        if (req.method == "DELETE")
            return remove(id) ? Response{204, "", "text/plain"}
                              : error_response(404, "no rule base '" + id + "'");
        return error_response(405, "method not allowed");
    }
    if (path == "/evaluate") {
        if (req.method == "POST")
            return post_evaluate(req);
        return error_response(405, "method not allowed");
    }
    return error_response(404, "not found");
}

Response Service::post_rulebase(const Request& req) {
    std::vector<Rule> rules;
    try {
        rules = parse_rule_file(req.body);
    } catch (const Error& e) {
        return error_response(400, e.what());
    }
    auto checked = validate(rules);
    if (!checked.rule_base) {
        ordered_json body;
        body["diagnostics"] = diagnostics_json(checked.diagnostics);
        return json_response(422, body);
    }
    auto name_it = req.query.find("name");
    auto h = add(name_it == req.query.end() ? "unnamed" : name_it->second,
                 std::move(*checked.rule_base));
    return json_response(201, handle_json(h));
}

Response Service::get_rulebase(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = store_.find(id);
    if (it == store_.end())
        return error_response(404, "no rule base '" + id + "'");
    const auto& rb = *it->second.rule_base;
    ordered_json body = handle_json({id, it->second.name, rb.size()});
    body["rules"] = ordered_json::parse(serialize_rule_base(rb));
    body["leaves"] = ordered_json::array();
    for (const auto& leaf : leaves(rb))
        body["leaves"].push_back(leaf.str());
    return json_response(200, body);
}

Response Service::post_evaluate(const Request& req) const {
    nlohmann::json in;
    try {
        in = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        return error_response(400, e.what());
    }
    if (!in.is_object() || !in.contains("rulebase_id") || !in["rulebase_id"].is_string() ||
        !in.contains("goal") || !in["goal"].is_string())
        return error_response(400, "body needs string fields rulebase_id and goal");
    if (in.contains("facts") && !in["facts"].is_array())
        return error_response(400, "facts must be an array");
    if (in.contains("strategy") && !in["strategy"].is_string())
        return error_response(400, "strategy must be a string");

    auto rb = lookup(in["rulebase_id"].get<std::string>());
    if (!rb)
        return error_response(404, "no rule base '" + in["rulebase_id"].get<std::string>() + "'");

    try {
        PropositionId goal(in["goal"].get<std::string>());
        FactBase facts;
        for (const auto& f : in.value("facts", nlohmann::json::array())) {
            if (!f.is_string())
                return error_response(422, "facts must be identifier strings");
            facts.insert(PropositionId(f.get<std::string>()));
        }
        Strategy strategy = in.contains("strategy")
                                ? parse_strategy(in["strategy"].get<std::string>())
                                : Strategy::ExceptionFirst;
        auto v = evaluate(*rb, facts, goal, strategy, options_);

        ordered_json out;
        out["holds"] = v.holds;
        out["status"] = std::string(to_string(v.root.status));
        out["proof"] = ordered_json::parse(explain(v, ExplainFormat::Structured));
        ordered_json stats;
        stats["propositions_evaluated"] = v.stats.propositions_evaluated;
        stats["rule_expansions"] = v.stats.rule_expansions;
        stats["fact_lookups"] = v.stats.fact_lookups;
        stats["strategy"] = std::string(to_string(v.stats.strategy));
        out["stats"] = std::move(stats);
        return json_response(200, out);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::GuardTripped)
            return error_response(500, e.what());
        return error_response(422, e.what());
    }
}

struct Server::Impl {
    Service& service;
    std::string origin;
    httplib::Server server;

    Impl(Service& s, std::string o) : service(s), origin(std::move(o)) {}

    void dispatch(const httplib::Request& in, httplib::Response& out) {
        Request req{in.method, in.path, in.body, {}};
        for (const auto& [k, v] : in.params)
            req.query.emplace(k, v);
        auto r = service.handle(req);
        out.status = r.status;
        if (!r.body.empty() || r.status != 204)
            out.set_content(r.body, r.content_type);
    }
};

Server::Server(Service& service, std::string allowed_origin)
    : impl_(std::make_unique<Impl>(service, std::move(allowed_origin))) {
    auto& srv = impl_->server;
    auto* impl = impl_.get();
    // SO_REUSEADDR only: a second listener on a busy port must fail to bind.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    srv.set_default_headers({{"Access-Control-Allow-Origin", impl->origin},
                             {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    auto handler = [impl](const httplib::Request& in, httplib::Response& out) {
        impl->dispatch(in, out);
    };
    const char* any = R"(/.*)";
    srv.Get(any, handler);
    srv.Post(any, handler);
    srv.Delete(any, handler);
    srv.Options(any, [](const httplib::Request&, httplib::Response& out) { out.status = 204; });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
    if (port == 0)
        return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void Server::run() { impl_->server.listen_after_bind(); }

void Server::stop() {
    if (impl_)
        impl_->server.stop();
}

void Server::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace lexrule::http
