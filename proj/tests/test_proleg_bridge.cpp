#include <doctest.h>

#include "lexrule/proleg_bridge.hpp"
#include "lexrule/strategy_lab.hpp"
#include "support.hpp"

using namespace lexrule;
using namespace lexrule::proleg;

namespace {

ErrorCode import_error(std::string_view text) {
    try {
        import_proleg(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an import error");
    return ErrorCode::InvalidArgument;
}

const PropositionId kContract("contract_voidable");

}  // namespace

TEST_CASE("export: contract matches the golden clause file") {
    auto text = export_proleg(support::contract());
    CHECK(text == read_file(support::fixture_path("proleg/contract.proleg")));
    CHECK(text ==
          "contract_voidable :- minor.\n"
          "contract_voidable :- incapable.\n"
          "exception(contract_voidable, for_necessities).\n");
}

TEST_CASE("export: edge shapes") {
    CHECK(export_proleg(RuleBase::from_rules({make_rule(PropositionId("x"), Operator::All, {}, {})})) ==
          "x.\n");
    CHECK(export_proleg(RuleBase{}).empty());
    CHECK(export_proleg(RuleBase::from_rules({make_rule(PropositionId("x"), Operator::All,
                                                        to_propositions({"a", "b", "c"}),
                                                        to_propositions({"d"}))})) ==
          "x :- a, b, c.\nexception(x, d).\n");
    // ANY over nothing is unsatisfiable: nothing is emitted for it.
    CHECK(export_proleg(RuleBase::from_rules({make_rule(PropositionId("x"), Operator::Any, {},
                                                        to_propositions({"d"}))}))
              .empty());
}

TEST_CASE("import") {
    SUBCASE("contract round-trip") {
        auto imported = import_proleg(read_file(support::fixture_path("proleg/contract.proleg")));
        CHECK(imported.rule_base == support::contract());
        CHECK_FALSE(has_errors(imported.diagnostics));
        for (const auto& d : imported.diagnostics)
            CHECK(d.severity == Severity::Info);
    }
    SUBCASE("first-order clauses are refused") {
        CHECK(import_error(read_file(support::fixture_path("proleg/contract_first_order.proleg"))) ==
              ErrorCode::NonPropositional);
        CHECK(import_error("contract_voidable(C) :- minor(P), party_to(P, C).\n") ==
              ErrorCode::NonPropositional);
        CHECK(import_error("p :- X.\n") == ErrorCode::NonPropositional);
        CHECK(import_error("exception(p(C), e).\n") == ErrorCode::NonPropositional);
    }
    SUBCASE("empty and comment-only input") {
        CHECK(import_proleg("").rule_base.empty());
        CHECK(import_proleg("% nothing here\n\n   \n").rule_base.empty());
    }
    SUBCASE("comments and whitespace") {
        auto rb = import_proleg(
                      "% contract rules\n"
                      "contract_voidable :- minor.   % first ground\n"
                      "  contract_voidable:-incapable.\n"
                      "exception( contract_voidable ,for_necessities ).\n")
                      .rule_base;
        CHECK(rb == support::contract());
    }
    SUBCASE("shapes") {
        auto all = import_proleg("x :- a, b.\n").rule_base;
        CHECK(all.find(PropositionId("x"))->op == Operator::All);
        auto unit = import_proleg("x.\n").rule_base;
        CHECK(unit.find(PropositionId("x"))->op == Operator::All);
        CHECK(unit.find(PropositionId("x"))->conditions.empty());
        auto single = import_proleg("x :- a.\n").rule_base;
        CHECK(single.find(PropositionId("x"))->op == Operator::Any);
        CHECK(import_error("x :- a, b.\nx :- c.\n") == ErrorCode::UnsupportedShape);
        CHECK(import_error("x.\nx :- c.\n") == ErrorCode::UnsupportedShape);
        CHECK(import_error("exception(x, e).\n") == ErrorCode::OrphanException);
    }
    SUBCASE("syntax errors") {
        CHECK(import_error("x :- a") == ErrorCode::SyntaxError);
        CHECK(import_error("x :- .\n") == ErrorCode::SyntaxError);
        CHECK(import_error("x :- a,, b.\n") == ErrorCode::SyntaxError);
        CHECK(import_error("exception(x).\n") == ErrorCode::SyntaxError);
        CHECK(import_error("x :- (a.\n") == ErrorCode::SyntaxError);
        CHECK(import_error("9x.\n") == ErrorCode::SyntaxError);
    }
    SUBCASE("cycles are rejected") {
        CHECK(import_error("a :- b.\nb :- a.\n") == ErrorCode::CyclicDependency);
    }
}

TEST_CASE("export then import then export is a fixed point") {
    auto first = export_proleg(support::contract());
    CHECK(export_proleg(import_proleg(first).rule_base) == first);
    auto gdpr = export_proleg(support::gdpr());
    CHECK(export_proleg(import_proleg(gdpr).rule_base) == gdpr);
}

TEST_CASE("semantic_equivalence") {
    auto contract = support::contract();
    CHECK(semantic_equivalence(contract, import_proleg(export_proleg(contract)).rule_base, kContract));
    CHECK(semantic_equivalence(contract, contract, kContract));

    auto no_exc = RuleBase::from_rules({make_rule(kContract, Operator::Any,
                                                  to_propositions({"minor", "incapable"}), {})});
    CHECK_FALSE(semantic_equivalence(contract, no_exc, kContract));
    auto witness = find_disagreement(contract, no_exc, kContract);
    REQUIRE(witness.has_value());
    CHECK(witness->contains(PropositionId("for_necessities")));
    // the witness named for the rule also disagrees
    FactBase s{"minor", "for_necessities"};
    CHECK(evaluate(contract, s, kContract).holds != evaluate(no_exc, s, kContract).holds);

    CHECK_THROWS_AS(semantic_equivalence(support::gdpr(), support::gdpr(),
                                         PropositionId("art17_erasure_applicable"), 8),
                    Error);
}

TEST_CASE("round-trip preserves meaning for generated rule bases") {
    lab::GenParams p;
    p.n_rules = 10;
    p.n_leaves = 7;
    p.max_depth = 4;
    p.max_exceptions = 2;
    for (std::size_t i = 0; i < 40; ++i) {
        p.seed = lab::trial_seed(404, i);
        auto rb = lab::generate_rulebase(p);
        auto text = export_proleg(rb);
        auto back = import_proleg(text);
        CHECK_FALSE(has_errors(back.diagnostics));
        CHECK(export_proleg(back.rule_base) == text);
        for (const auto& goal : rb.heads())
            CHECK(semantic_equivalence(rb, back.rule_base, goal));
    }
}
