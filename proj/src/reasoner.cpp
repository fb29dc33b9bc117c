#include "lexrule/reasoner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <future>
#include <mutex>
#include <unordered_map>

#include <json.hpp>

namespace lexrule {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::ExceptionFirst: return "EXCEPTION_FIRST";
        case Strategy::ConditionsFirst: return "CONDITIONS_FIRST";
        case Strategy::Racing: return "RACING";
    }
    return "?";
}

Strategy parse_strategy(std::string_view text) {
    std::string norm;
    for (char c : text)
        norm += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto s : {Strategy::ExceptionFirst, Strategy::ConditionsFirst, Strategy::Racing})
        if (norm == to_string(s))
            return s;
    throw Error(ErrorCode::UnknownStrategy, "unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(NodeStatus s) {
    switch (s) {
        case NodeStatus::EstablishedFact: return "ESTABLISHED_FACT";
        case NodeStatus::Proved: return "PROVED";
        case NodeStatus::Failed: return "FAILED";
        case NodeStatus::Defeated: return "DEFEATED";
        case NodeStatus::NoDerivation: return "NO_DERIVATION";
        case NodeStatus::CycleGuard: return "CYCLE_GUARD";
    }
    return "?";
}

std::optional<NodeStatus> parse_node_status(std::string_view text) {
    for (auto s : {NodeStatus::EstablishedFact, NodeStatus::Proved, NodeStatus::Failed,
                   NodeStatus::Defeated, NodeStatus::NoDerivation, NodeStatus::CycleGuard})
        if (text == to_string(s))
            return s;
    return std::nullopt;
}

std::string Via::text() const {
    switch (kind) {
        case Kind::Fact: return "FACT";
        case Kind::Rule: return "RULE(" + std::string(to_string(op)) + ")";
        case Kind::None: return "NONE";
    }
    return "?";
}

std::optional<Via> Via::parse(std::string_view text) {
    if (text == "FACT")
        return fact();
    if (text == "NONE")
        return none();
    if (text == "RULE(ALL)")
        return rule(Operator::All);
    if (text == "RULE(ANY)")
        return rule(Operator::Any);
    return std::nullopt;
}

std::string_view to_string(OrderNote n) {
    switch (n) {
        case OrderNote::None: return "NONE";
        case OrderNote::ExceptionsFirst: return "EXCEPTIONS_FIRST";
        case OrderNote::ConditionsFirst: return "CONDITIONS_FIRST";
        case OrderNote::Raced: return "RACED";
    }
    return "?";
}

std::optional<OrderNote> parse_order_note(std::string_view text) {
    for (auto n : {OrderNote::None, OrderNote::ExceptionsFirst, OrderNote::ConditionsFirst,
                   OrderNote::Raced})
        if (text == to_string(n))
            return n;
    return std::nullopt;
}

namespace {

// Propositions currently being expanded on the path from the goal. Frames live
// on the stack of the evaluating thread and outlive every child evaluation.
struct PathFrame {
    const PropositionId* prop;
    const PathFrame* parent;
};

// Cancellation is inherited: a token reads as cancelled when any ancestor is.
struct CancelToken {
    std::atomic<bool> flag{false};
    const CancelToken* parent = nullptr;

    bool cancelled() const {
        for (auto* t = this; t; t = t->parent)
            if (t->flag.load(std::memory_order_relaxed))
                return true;
        return false;
    }
    void cancel() { flag.store(true, std::memory_order_relaxed); }
};

struct Outcome {
    std::optional<ProofNode> node;  // empty when the evaluation was abandoned
    bool guard = false;             // a cycle guard fired somewhere below
};

struct Branch {
    std::vector<ProofNode> children;
    bool aborted = false;
    bool guard = false;
    // exceptions: some exception holds; conditions: the operator is satisfied
    bool decisive = false;
};

class Evaluator {
public:
    Evaluator(const RuleBase& rb, const FactBase& facts, Strategy strategy,
              const EvalOptions& options)
        : rb_(rb), facts_(facts), strategy_(strategy), options_(options) {}

    Outcome eval(const PropositionId& p, const PathFrame* path, const CancelToken* token) {
        if (token && token->cancelled())
            return {};
        for (auto* f = path; f; f = f->parent) {
            if (*f->prop == p) {
                if (options_.cycle_policy == CyclePolicy::Throw)
                    throw Error(ErrorCode::GuardTripped,
                                "proposition '" + p.str() + "' re-entered while being evaluated",
                                {p.str()});
                return {ProofNode{p, NodeStatus::CycleGuard, Via::none()}, true};
            }
        }
        {
            std::lock_guard lock(cache_mutex_);
            if (auto it = cache_.find(p); it != cache_.end()) {
                ProofNode hit{p, it->second.first, it->second.second};
                hit.cached = true;
                return {std::move(hit)};
            }
        }

        ++evaluated_;
        ++fact_lookups_;
        if (facts_.contains(p))
            return remember({ProofNode{p, NodeStatus::EstablishedFact, Via::fact()}});
        const Rule* rule = rb_.find(p);
        if (!rule)
            return remember({ProofNode{p, NodeStatus::NoDerivation, Via::none()}});

        ++expansions_;
        const PathFrame frame{&p, path};
        Outcome out;
        switch (strategy_) {
            case Strategy::ExceptionFirst: out = exceptions_first(*rule, &frame, token); break;
            case Strategy::ConditionsFirst: out = conditions_first(*rule, &frame, token); break;
            case Strategy::Racing: out = racing(*rule, &frame, token); break;
        }
        return remember(std::move(out));
    }

    EvalStats stats() const {
        return {evaluated_.load(), expansions_.load(), fact_lookups_.load(), strategy_};
    }

private:
    Outcome remember(Outcome out) {
        if (out.node && !out.guard) {
            std::lock_guard lock(cache_mutex_);
            cache_.emplace(out.node->proposition, std::pair{out.node->status, out.node->via});
        }
        return out;
    }

    Branch run_exceptions(const Rule& rule, const PathFrame* path, const CancelToken* token) {
        Branch b;
        for (const auto& e : rule.exceptions) {
            auto o = eval(e, path, token);
            b.guard |= o.guard;
            if (!o.node) {
                b.aborted = true;
                return b;
            }
            const bool h = o.node->holds();
            b.children.push_back(std::move(*o.node));
            if (h) {
                b.decisive = true;
                return b;
            }
        }
        return b;
    }

    Branch run_conditions(const Rule& rule, const PathFrame* path, const CancelToken* token) {
        Branch b;
        const bool all = rule.op == Operator::All;
        // ALL stops on the first failure, ANY on the first success.
        b.decisive = all;
        for (const auto& c : rule.conditions) {
            auto o = eval(c, path, token);
            b.guard |= o.guard;
            if (!o.node) {
                b.aborted = true;
                return b;
            }
            const bool h = o.node->holds();
            b.children.push_back(std::move(*o.node));
            if (h != all) {
                b.decisive = h;
                return b;
            }
        }
        return b;
    }

    static Outcome finish(const Rule& rule, NodeStatus status, OrderNote note, Branch conds,
                          Branch excs) {
        ProofNode n{rule.p, status, Via::rule(rule.op), note};
        n.conditions = std::move(conds.children);
        n.exceptions = std::move(excs.children);
        return {std::move(n), conds.guard || excs.guard};
    }

    Outcome exceptions_first(const Rule& rule, const PathFrame* path, const CancelToken* token) {
        auto excs = run_exceptions(rule, path, token);
        if (excs.aborted)
            return {std::nullopt, excs.guard};
        if (excs.decisive)
            return finish(rule, NodeStatus::Defeated, OrderNote::ExceptionsFirst, {}, std::move(excs));
        auto conds = run_conditions(rule, path, token);
        if (conds.aborted)
            return {std::nullopt, conds.guard};
        auto status = conds.decisive ? NodeStatus::Proved : NodeStatus::Failed;
        return finish(rule, status, OrderNote::ExceptionsFirst, std::move(conds), std::move(excs));
    }

    Outcome conditions_first(const Rule& rule, const PathFrame* path, const CancelToken* token) {
        auto conds = run_conditions(rule, path, token);
        if (conds.aborted)
            return {std::nullopt, conds.guard};
        if (!conds.decisive)
            return finish(rule, NodeStatus::Failed, OrderNote::ConditionsFirst, std::move(conds), {});
        auto excs = run_exceptions(rule, path, token);
        if (excs.aborted)
            return {std::nullopt, excs.guard};
        auto status = excs.decisive ? NodeStatus::Defeated : NodeStatus::Proved;
        return finish(rule, status, OrderNote::ConditionsFirst, std::move(conds), std::move(excs));
    }

    bool try_acquire_worker() {
        auto active = active_workers_.load();
        while (active < options_.max_workers)
            if (active_workers_.compare_exchange_weak(active, active + 1))
                return true;
        return false;
    }

    // The exception branch runs on a helper thread while this thread walks the
    // conditions. A holding exception settles DEFEATED and a failed condition
    // branch settles FAILED, each cancelling the other side; PROVED needs both.
    Outcome racing(const Rule& rule, const PathFrame* path, const CancelToken* token) {
        if (rule.exceptions.empty() || rule.conditions.empty() || !try_acquire_worker())
            return exceptions_first(rule, path, token);

        CancelToken stop;
        stop.parent = token;
        auto helper = std::async(std::launch::async, [&] {
            struct Release {
                std::atomic<std::size_t>& n;
                ~Release() { --n; }
            } release{active_workers_};
            auto b = run_exceptions(rule, path, &stop);
            if (!b.aborted && b.decisive)
                stop.cancel();
            return b;
        });

        Branch conds;
        try {
            conds = run_conditions(rule, path, &stop);
        } catch (...) {
            stop.cancel();
            helper.wait();
            throw;
        }
        if (!conds.aborted && !conds.decisive)
            stop.cancel();
        Branch excs = helper.get();

        // Whatever the losing side completed before cancellation stays in the trace.
        if (!excs.aborted && excs.decisive)
            return finish(rule, NodeStatus::Defeated, OrderNote::Raced, std::move(conds),
                          std::move(excs));
        if (!conds.aborted && !conds.decisive)
            return finish(rule, NodeStatus::Failed, OrderNote::Raced, std::move(conds),
                          std::move(excs));
        if (!conds.aborted && !excs.aborted)
            return finish(rule, NodeStatus::Proved, OrderNote::Raced, std::move(conds),
                          std::move(excs));
        return {std::nullopt, conds.guard || excs.guard};
    }

    const RuleBase& rb_;
    const FactBase& facts_;
    Strategy strategy_;
    EvalOptions options_;

    std::mutex cache_mutex_;
    std::unordered_map<PropositionId, std::pair<NodeStatus, Via>> cache_;

    std::atomic<std::uint64_t> evaluated_{0};
    std::atomic<std::uint64_t> expansions_{0};
    std::atomic<std::uint64_t> fact_lookups_{0};
    std::atomic<std::size_t> active_workers_{1};
};

}  // namespace

Verdict evaluate(const RuleBase& rb, const FactBase& facts, const PropositionId& goal,
                 Strategy strategy, const EvalOptions& options) {
    switch (strategy) {
        case Strategy::ExceptionFirst:
        case Strategy::ConditionsFirst:
        case Strategy::Racing: break;
        default: throw Error(ErrorCode::UnknownStrategy, "unknown strategy value");
    }
    if (options.max_workers == 0)
        throw Error(ErrorCode::InvalidArgument, "max_workers must be at least 1");

    Evaluator ev(rb, facts, strategy, options);
    auto out = ev.eval(goal, nullptr, nullptr);
    // The root carries no cancellation token, so it always completes.
    ProofNode root = std::move(*out.node);
    const bool h = root.holds();
    return Verdict{goal, h, std::move(root), ev.stats()};
}

namespace {

ordered_json to_json(const ProofNode& n) {
    ordered_json j;
    j["proposition"] = n.proposition.str();
    j["status"] = std::string(to_string(n.status));
    j["via"] = n.via.text();
    j["order_note"] = std::string(to_string(n.order_note));
    j["cached"] = n.cached;
    j["conditions"] = ordered_json::array();
    for (const auto& c : n.conditions)
        j["conditions"].push_back(to_json(c));
    j["exceptions"] = ordered_json::array();
    for (const auto& e : n.exceptions)
        j["exceptions"].push_back(to_json(e));
    return j;
}

template <class T>
T required(std::optional<T> v, const char* what) {
    if (!v)
        throw Error(ErrorCode::SchemaError, std::string("bad proof node field: ") + what);
    return *v;
}

ProofNode from_json(const ordered_json& j) {
    if (!j.is_object())
        throw Error(ErrorCode::SchemaError, "proof node must be an object");
    try {
        ProofNode n{PropositionId(j.at("proposition").get<std::string>()),
                    required(parse_node_status(j.at("status").get<std::string>()), "status"),
                    required(Via::parse(j.at("via").get<std::string>()), "via"),
                    required(parse_order_note(j.at("order_note").get<std::string>()), "order_note")};
        n.cached = j.value("cached", false);
        for (const auto& c : j.at("conditions"))
            n.conditions.push_back(from_json(c));
        for (const auto& e : j.at("exceptions"))
            n.exceptions.push_back(from_json(e));
        return n;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, e.what());
    }
}

void render_text(const ProofNode& n, int depth, bool exception, std::string& out) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (exception)
        out += "unless ";
    out += n.proposition.str();
    out += " [";
    out += to_string(n.status);
    out += "] (";
    switch (n.via.kind) {
        case Via::Kind::Fact: out += "fact"; break;
        case Via::Kind::Rule: out += "rule "; out += to_string(n.via.op); break;
        case Via::Kind::None: out += "no rule"; break;
    }
    switch (n.order_note) {
        case OrderNote::ExceptionsFirst: out += ", exceptions first"; break;
        case OrderNote::ConditionsFirst: out += ", conditions first"; break;
        case OrderNote::Raced: out += ", raced"; break;
        case OrderNote::None: break;
    }
    if (n.cached)
        out += ", cached";
    out += ")\n";
    // Children in evaluation order.
    if (n.order_note == OrderNote::ConditionsFirst) {
        for (const auto& c : n.conditions)
            render_text(c, depth + 1, false, out);
        for (const auto& e : n.exceptions)
            render_text(e, depth + 1, true, out);
    } else {
        for (const auto& e : n.exceptions)
            render_text(e, depth + 1, true, out);
        for (const auto& c : n.conditions)
            render_text(c, depth + 1, false, out);
    }
}

}  // namespace

std::string proof_to_json(const ProofNode& node) { return to_json(node).dump(); }

ProofNode proof_from_json(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError, e.what());
    }
    return from_json(j);
}

std::string explain(const Verdict& v, ExplainFormat format) {
    if (format == ExplainFormat::Structured)
        return proof_to_json(v.root);
    std::string out;
    render_text(v.root, 0, false, out);
    return out;
}

}  // namespace lexrule
