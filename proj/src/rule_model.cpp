#include "lexrule/rule_model.hpp"

#include <algorithm>
#include <unordered_map>

namespace lexrule {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadIdentifier: return "BadIdentifier";
        case ErrorCode::DuplicateEntry: return "DuplicateEntry";
        case ErrorCode::SelfReference: return "SelfReference";
        case ErrorCode::DuplicateHead: return "DuplicateHead";
        case ErrorCode::CyclicDependency: return "CyclicDependency";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::UnknownStrategy: return "UnknownStrategy";
        case ErrorCode::GuardTripped: return "GuardTripped";
        case ErrorCode::DegenerateParams: return "DegenerateParams";
        case ErrorCode::NonPropositional: return "NonPropositional";
        case ErrorCode::UnsupportedShape: return "UnsupportedShape";
        case ErrorCode::OrphanException: return "OrphanException";
        case ErrorCode::TooManyLeaves: return "TooManyLeaves";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

PropositionId::PropositionId(std::string text) : value_(std::move(text)) {
    if (!is_valid(value_))
        throw Error(ErrorCode::BadIdentifier, "invalid proposition identifier '" + value_ + "'",
                    {value_});
}

bool PropositionId::is_valid(std::string_view text) noexcept {
    if (text.empty() || text.front() < 'a' || text.front() > 'z')
        return false;
    return std::all_of(text.begin(), text.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

PropositionList to_propositions(const std::vector<std::string>& names) {
    PropositionList out;
    out.reserve(names.size());
    for (const auto& n : names)
        out.emplace_back(n);
    return out;
}

PropositionList to_propositions(std::initializer_list<std::string_view> names) {
    PropositionList out;
    out.reserve(names.size());
    for (auto n : names)
        out.emplace_back(std::string(n));
    return out;
}

std::string_view to_string(Operator op) {
    return op == Operator::All ? "ALL" : "ANY";
}

std::optional<Operator> parse_operator(std::string_view text) {
    if (text == "ALL")
        return Operator::All;
    if (text == "ANY")
        return Operator::Any;
    return std::nullopt;
}

namespace {

void check_list(const PropositionId& head, const PropositionList& list, std::string_view field) {
    std::set<PropositionId> seen;
    for (const auto& id : list) {
        if (id == head)
            throw Error(ErrorCode::SelfReference,
                        "rule '" + head.str() + "' references itself in " + std::string(field),
                        {head.str()});
        if (!seen.insert(id).second)
            throw Error(ErrorCode::DuplicateEntry,
                        "'" + id.str() + "' repeated in " + std::string(field) + " of '" +
                            head.str() + "'",
                        {head.str(), id.str()});
    }
}

PropositionList edges_of(const Rule& r) {
    PropositionList out;
    for (const auto* list : {&r.conditions, &r.exceptions})
        for (const auto& id : *list)
            if (std::find(out.begin(), out.end(), id) == out.end())
                out.push_back(id);
    return out;
}

}  // namespace

Rule make_rule(PropositionId p, Operator op, PropositionList conditions,
               PropositionList exceptions) {
    check_list(p, conditions, "conditions");
    check_list(p, exceptions, "exceptions");
    return Rule{std::move(p), op, std::move(conditions), std::move(exceptions)};
}

std::vector<std::vector<PropositionId>> find_cycles(const std::vector<Rule>& rules) {
    // First rule wins for duplicated heads; duplicates are reported elsewhere.
    std::unordered_map<PropositionId, PropositionList> graph;
    std::vector<PropositionId> order;
    for (const auto& r : rules)
        if (graph.emplace(r.p, edges_of(r)).second)
            order.push_back(r.p);

    enum class Color { White, Gray, Black };
    std::unordered_map<PropositionId, Color> color;
    std::vector<PropositionId> stack;
    std::vector<std::vector<PropositionId>> cycles;

    // Iterative DFS; each frame remembers the next edge to follow.
    struct Frame {
        PropositionId node;
        std::size_t next = 0;
    };
    for (const auto& root : order) {
        if (color[root] != Color::White)
            continue;
        std::vector<Frame> frames{{root}};
        color[root] = Color::Gray;
        stack.push_back(root);
        while (!frames.empty()) {
            auto& f = frames.back();
            auto it = graph.find(f.node);
            const bool has_edges = it != graph.end() && f.next < it->second.size();
            if (!has_edges) {
                color[f.node] = Color::Black;
                stack.pop_back();
                frames.pop_back();
                continue;
            }
            PropositionId child = it->second[f.next++];
            auto c = color[child];
            if (c == Color::Gray) {
                auto start = std::find(stack.begin(), stack.end(), child);
                std::vector<PropositionId> cycle(start, stack.end());
                cycle.push_back(child);
                cycles.push_back(std::move(cycle));
            } else if (c == Color::White) {
                color[child] = Color::Gray;
                stack.push_back(child);
                frames.push_back({std::move(child)});
            }
        }
    }
    return cycles;
}

RuleBase RuleBase::from_rules(std::vector<Rule> rules) {
    std::set<PropositionId> heads;
    for (const auto& r : rules)
        if (!heads.insert(r.p).second)
            throw Error(ErrorCode::DuplicateHead, "more than one rule for '" + r.p.str() + "'",
                        {r.p.str()});
    auto cycles = find_cycles(rules);
    if (!cycles.empty()) {
        std::vector<std::string> path;
        std::string text;
        for (const auto& id : cycles.front()) {
            path.push_back(id.str());
            text += (text.empty() ? "" : " -> ") + id.str();
        }
        throw Error(ErrorCode::CyclicDependency, "dependency cycle " + text, std::move(path));
    }
    return unchecked(std::move(rules));
}

RuleBase RuleBase::unchecked(std::vector<Rule> rules) {
    RuleBase rb;
    for (auto& r : rules) {
        auto edges = edges_of(r);
        auto head = r.p;
        if (rb.rules_.emplace(head, std::move(r)).second)
            rb.graph_.emplace(std::move(head), std::move(edges));
    }
    return rb;
}

const Rule* RuleBase::find(const PropositionId& head) const {
    auto it = rules_.find(head);
    return it == rules_.end() ? nullptr : &it->second;
}

std::vector<PropositionId> RuleBase::heads() const {
    std::vector<PropositionId> out;
    out.reserve(rules_.size());
    for (const auto& [head, _] : rules_)
        out.push_back(head);
    return out;
}

const PropositionList& RuleBase::dependencies(const PropositionId& head) const {
    static const PropositionList none;
    auto it = graph_.find(head);
    return it == graph_.end() ? none : it->second;
}

std::set<PropositionId> leaves(const RuleBase& rb) {
    std::set<PropositionId> out;
    for (const auto& [head, rule] : rb.rules())
        for (const auto* list : {&rule.conditions, &rule.exceptions})
            for (const auto& id : *list)
                if (!rb.has_rule(id))
                    out.insert(id);
    return out;
}

std::size_t dependency_depth(const RuleBase& rb) {
    std::map<PropositionId, std::size_t> memo;
    // Acyclic by construction, so plain recursion terminates.
    std::function<std::size_t(const PropositionId&)> depth = [&](const PropositionId& p) {
        if (auto it = memo.find(p); it != memo.end())
            return it->second;
        std::size_t d = 0;
        for (const auto& child : rb.dependencies(p))
            d = std::max(d, 1 + depth(child));
        memo.emplace(p, d);
        return d;
    };
    std::size_t best = 0;
    for (const auto& head : rb.heads())
        best = std::max(best, depth(head));
    return best;
}

FactBase::FactBase(std::initializer_list<std::string_view> names) {
    for (auto n : names)
        facts_.emplace(std::string(n));
}

}  // namespace lexrule
