#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lexrule/reasoner.hpp"
#include "lexrule/rule_model.hpp"

namespace lexrule::lab {

/// Shape of a generated rule base. Rules sit on levels 1..max_depth and only
/// reference propositions on strictly lower levels; level 0 holds `n_leaves`
/// fact-only propositions.
struct GenParams {
    std::size_t n_rules = 20;
    std::size_t max_conditions = 4;
    std::size_t max_exceptions = 2;
    std::size_t max_depth = 5;
    double p_any = 0.5;
    double p_fact = 0.5;
    std::size_t n_leaves = 10;
    std::uint64_t seed = 1;
};

/// Throws InvalidArgument for probabilities outside [0,1] and DegenerateParams
/// when rules are requested with max_depth 0.
RuleBase generate_rulebase(const GenParams& params);

/// Head with the deepest dependency chain (ties: smallest id). Throws
/// DegenerateParams for an empty rule base.
PropositionId select_goal(const RuleBase& rb);

/// Random subset of leaves(rb); never contains a rule head.
FactBase sample_facts(const RuleBase& rb, double p_fact, std::uint64_t seed);

inline constexpr std::array<Strategy, 3> all_strategies{
    Strategy::ExceptionFirst, Strategy::ConditionsFirst, Strategy::Racing};

struct StrategyRun {
    Strategy strategy;
    bool holds;
    NodeStatus status;
    EvalStats stats;
};

struct DiffResult {
    std::array<StrategyRun, 3> runs;  // in all_strategies order
    bool mismatch = false;

    const StrategyRun& of(Strategy s) const;
};

DiffResult differential_run(const RuleBase& rb, const FactBase& facts, const PropositionId& goal,
                            const EvalOptions& options = {});

struct Mismatch {
    std::uint64_t seed;
    std::string goal;
    std::array<bool, 3> holds;
};

struct CostSummary {
    double mean = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
};

struct TrialRow {
    std::size_t trial;
    std::uint64_t seed;
    std::string goal;
    bool holds;  // EXCEPTION_FIRST's answer
    std::array<EvalStats, 3> stats;
};

struct DiffReport {
    std::size_t trials = 0;
    std::vector<Mismatch> mismatches;
    std::array<CostSummary, 3> stats_by_strategy;  // propositions_evaluated
    std::vector<TrialRow> rows;

    bool passed() const { return mismatches.empty(); }
};

/// Seed used for trial `index` of a run seeded with `base`.
std::uint64_t trial_seed(std::uint64_t base, std::size_t index);

/// Runs `trials` generated instances through differential_run. `threads` > 1
/// spreads trials over workers; the report is identical to a sequential run
/// apart from RACING counts. Throws InvalidArgument when trials == 0.
DiffReport bench(const GenParams& params, std::size_t trials, unsigned threads = 1);

/// trial,seed,goal,holds followed by propositions_evaluated, rule_expansions
/// and fact_lookups for each strategy.
std::string to_csv(const DiffReport& report);

struct Fixture {
    RuleBase rule_base;
    FactBase facts;
    PropositionId goal;
};

/// Goal with one immediately satisfied exception and a 20-rule condition chain.
Fixture cheap_exception_fixture();
/// Several levels of ALL/ANY rules with no exceptions anywhere.
Fixture no_exceptions_deep_fixture();

}  // namespace lexrule::lab
