#include "lexrule/strategy_lab.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace lexrule::lab {

namespace {

// Bounded draws built on the raw engine output so sequences do not depend on
// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0,1]");
}

std::size_t index_of(Strategy s) {
    return static_cast<std::size_t>(std::find(all_strategies.begin(), all_strategies.end(), s) -
                                    all_strategies.begin());
}

}  // namespace

RuleBase generate_rulebase(const GenParams& params) {
    check_probability(params.p_any, "p_any");
    check_probability(params.p_fact, "p_fact");
    if (params.n_rules == 0)
        return {};
    if (params.max_depth == 0)
        throw Error(ErrorCode::DegenerateParams, "rules requested with max_depth 0");

    Rng rng(params.seed);
    const std::size_t levels = std::min(params.max_depth, params.n_rules);
    std::vector<std::size_t> per_level(levels + 1, 0);
    for (std::size_t l = 1; l <= levels; ++l)
        per_level[l] = 1;
    for (std::size_t i = levels; i < params.n_rules; ++i)
        ++per_level[1 + rng.below(levels)];

    std::vector<std::vector<PropositionId>> by_level(levels + 1);
    for (std::size_t i = 0; i < params.n_leaves; ++i)
        by_level[0].emplace_back("f" + std::to_string(i));
    for (std::size_t l = 1; l <= levels; ++l)
        for (std::size_t k = 0; k < per_level[l]; ++k)
            by_level[l].emplace_back("r" + std::to_string(l) + "_" + std::to_string(k));

    std::vector<Rule> rules;
    std::vector<PropositionId> pool;  // everything strictly below the current level
    for (std::size_t l = 1; l <= levels; ++l) {
        pool.insert(pool.end(), by_level[l - 1].begin(), by_level[l - 1].end());
        for (const auto& head : by_level[l]) {
            const Operator op = rng.chance(params.p_any) ? Operator::Any : Operator::All;
            std::size_t n_cond = rng.between(0, params.max_conditions);
            std::size_t n_exc = rng.between(0, params.max_exceptions);

            // Partial Fisher-Yates over a copy: distinct picks across both lists.
            std::vector<PropositionId> picks = pool;
            std::size_t take = std::min(picks.size(), n_cond + n_exc);
            for (std::size_t i = 0; i < take; ++i)
                std::swap(picks[i], picks[i + rng.below(picks.size() - i)]);
            picks.erase(picks.begin() + static_cast<std::ptrdiff_t>(take), picks.end());
            n_cond = std::min(n_cond, take);

            // Lead with a proposition from the level just below so depth is reachable.
            if (n_cond > 0 && l > 1 && !by_level[l - 1].empty()) {
                const auto& prev = by_level[l - 1];
                auto it = std::find_first_of(picks.begin(), picks.end(), prev.begin(), prev.end());
                if (it == picks.end())
                    picks[0] = prev[rng.below(prev.size())];
                else
                    std::iter_swap(picks.begin(), it);
            }
            PropositionList conds(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(n_cond));
            PropositionList excs(picks.begin() + static_cast<std::ptrdiff_t>(n_cond), picks.end());
            rules.push_back(make_rule(head, op, std::move(conds), std::move(excs)));
        }
    }
    return RuleBase::from_rules(std::move(rules));
}

PropositionId select_goal(const RuleBase& rb) {
    if (rb.empty())
        throw Error(ErrorCode::DegenerateParams, "no rule head available as a goal");
    std::map<PropositionId, std::size_t> depth;
    // rules() iterates in id order; a post-order walk fills the memo.
    std::function<std::size_t(const PropositionId&)> measure = [&](const PropositionId& p) {
        if (auto it = depth.find(p); it != depth.end())
            return it->second;
        std::size_t d = 0;
        for (const auto& c : rb.dependencies(p))
            d = std::max(d, 1 + measure(c));
        depth.emplace(p, d);
        return d;
    };
    const PropositionId* best = nullptr;
    std::size_t best_depth = 0;
    for (const auto& [head, _] : rb.rules()) {
        auto d = measure(head);
        if (!best || d > best_depth) {
            best = &head;
            best_depth = d;
        }
    }
    return *best;
}

FactBase sample_facts(const RuleBase& rb, double p_fact, std::uint64_t seed) {
    check_probability(p_fact, "p_fact");
    Rng rng(seed);
    FactBase out;
    for (const auto& leaf : leaves(rb))
        if (rng.chance(p_fact))
            out.insert(leaf);
    return out;
}

const StrategyRun& DiffResult::of(Strategy s) const { return runs[index_of(s)]; }

DiffResult differential_run(const RuleBase& rb, const FactBase& facts, const PropositionId& goal,
                            const EvalOptions& options) {
    DiffResult out;
    for (std::size_t i = 0; i < all_strategies.size(); ++i) {
        auto v = evaluate(rb, facts, goal, all_strategies[i], options);
        out.runs[i] = {all_strategies[i], v.holds, v.root.status, v.stats};
    }
    out.mismatch = std::any_of(out.runs.begin(), out.runs.end(),
                               [&](const StrategyRun& r) { return r.holds != out.runs[0].holds; });
    return out;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t index) {
    return splitmix(base + static_cast<std::uint64_t>(index));
}

DiffReport bench(const GenParams& params, std::size_t trials, unsigned threads) {
    if (trials == 0)
        throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");

    struct Slot {
        TrialRow row;
        bool mismatch = false;
        std::array<bool, 3> holds{};
    };
    std::vector<Slot> slots(trials);

    auto run_trial = [&](std::size_t t) {
        GenParams p = params;
        p.seed = trial_seed(params.seed, t);
        auto rb = generate_rulebase(p);
        auto goal = select_goal(rb);
        auto facts = sample_facts(rb, p.p_fact, splitmix(p.seed));
        auto diff = differential_run(rb, facts, goal);
        auto& s = slots[t];
        s.row = {t, p.seed, goal.str(), diff.runs[0].holds, {}};
        for (std::size_t i = 0; i < 3; ++i) {
            s.row.stats[i] = diff.runs[i].stats;
            s.holds[i] = diff.runs[i].holds;
        }
        s.mismatch = diff.mismatch;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
    if (workers == 1) {
        for (std::size_t t = 0; t < trials; ++t)
            run_trial(t);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < trials; t += workers)
                    run_trial(t);
            });
        for (auto& th : pool)
            th.join();
    }

    DiffReport report;
    report.trials = trials;
    for (std::size_t i = 0; i < 3; ++i)
        report.stats_by_strategy[i].min = std::numeric_limits<std::uint64_t>::max();
    for (auto& s : slots) {
        if (s.mismatch)
            report.mismatches.push_back({s.row.seed, s.row.goal, s.holds});
        for (std::size_t i = 0; i < 3; ++i) {
            auto n = s.row.stats[i].propositions_evaluated;
            auto& c = report.stats_by_strategy[i];
            c.mean += static_cast<double>(n) / static_cast<double>(trials);
            c.min = std::min(c.min, n);
            c.max = std::max(c.max, n);
        }
        report.rows.push_back(std::move(s.row));
    }
    return report;
}

std::string to_csv(const DiffReport& report) {
    std::ostringstream out;
    out << "trial,seed,goal,holds";
    for (auto s : all_strategies) {
        std::string name(to_string(s));
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        out << ',' << name << "_propositions_evaluated," << name << "_rule_expansions," << name
            << "_fact_lookups";
    }
    out << '\n';
    for (const auto& r : report.rows) {
        out << r.trial << ',' << r.seed << ',' << r.goal << ',' << (r.holds ? "true" : "false");
        for (const auto& st : r.stats)
            out << ',' << st.propositions_evaluated << ',' << st.rule_expansions << ','
                << st.fact_lookups;
        out << '\n';
    }
    return out.str();
}

Fixture cheap_exception_fixture() {
    std::vector<Rule> rules;
    rules.push_back(make_rule(PropositionId("claim_succeeds"), Operator::All,
                              to_propositions({"step_1"}), to_propositions({"waiver_signed"})));
    for (int i = 1; i <= 20; ++i) {
        auto next = i == 20 ? std::string("base_fact") : "step_" + std::to_string(i + 1);
        rules.push_back(make_rule(PropositionId("step_" + std::to_string(i)), Operator::All,
                                  {PropositionId(next)}, {}));
    }
    return {RuleBase::from_rules(std::move(rules)), FactBase{"waiver_signed", "base_fact"},
            PropositionId("claim_succeeds")};
}

Fixture no_exceptions_deep_fixture() {
    std::vector<Rule> rules;
    rules.push_back(make_rule(PropositionId("liable"), Operator::All,
                              to_propositions({"duty_owed", "duty_breached", "damage_caused"}), {}));
    rules.push_back(make_rule(PropositionId("duty_owed"), Operator::Any,
                              to_propositions({"contract_duty", "statutory_duty"}), {}));
    rules.push_back(make_rule(PropositionId("contract_duty"), Operator::All,
                              to_propositions({"offer", "acceptance", "consideration"}), {}));
    rules.push_back(make_rule(PropositionId("statutory_duty"), Operator::Any,
                              to_propositions({"occupier", "employer"}), {}));
    rules.push_back(make_rule(PropositionId("duty_breached"), Operator::Any,
                              to_propositions({"negligent_act", "negligent_omission"}), {}));
    rules.push_back(make_rule(PropositionId("negligent_act"), Operator::All,
                              to_propositions({"act_performed", "below_standard"}), {}));
    rules.push_back(make_rule(PropositionId("damage_caused"), Operator::All,
                              to_propositions({"loss_suffered", "causation"}), {}));
    rules.push_back(make_rule(PropositionId("causation"), Operator::Any,
                              to_propositions({"but_for_test", "material_contribution"}), {}));
    return {RuleBase::from_rules(std::move(rules)),
            FactBase{"offer", "acceptance", "employer", "negligent_omission", "act_performed",
                     "loss_suffered", "material_contribution"},
            PropositionId("liable")};
}

}  // namespace lexrule::lab
