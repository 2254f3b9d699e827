#include "kbviz/features.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace kbviz;

namespace {

ConstraintSet extract(const std::string& src) { return extract_constraints(parse_program(src), src); }

Feature var(const std::string& name) { return Feature{FeatureKind::Variable, name, std::nullopt}; }
Feature pred(const std::string& name, std::size_t arity) { return Feature{FeatureKind::Predicate, name, arity}; }

std::map<Feature, std::size_t> counts_of(const std::vector<FeatureIncidence>& incs) {
  std::map<Feature, std::size_t> out;
  for (const auto& i : incs) out[i.feature] = i.occurrence_count;
  return out;
}

} // namespace

TEST(ExtractFeatures, BinHighVariables) {
  auto set = extract("soft(bin_high,E) :- bin(E,B), B > 12.");
  auto incs = extract_features(set, FeatureKinds{false, true});
  EXPECT_EQ(counts_of(incs), (std::map<Feature, std::size_t>{{var("E"), 1}, {var("B"), 2}}));
  for (const auto& i : incs) EXPECT_EQ(i.constraint.str(), "soft/bin_high");
}

TEST(ExtractFeatures, BinHighPredicates) {
  auto set = extract("soft(bin_high,E) :- bin(E,B), B > 12.");
  auto incs = extract_features(set, FeatureKinds{true, false});
  EXPECT_EQ(counts_of(incs), (std::map<Feature, std::size_t>{{pred("bin", 2), 1}}));
}

TEST(ExtractFeatures, GroundBodyHasNoVariables) {
  auto set = extract("hard(x) :- mark(bar), channel(e0,x), not zero(e0).");
  EXPECT_TRUE(extract_features(set, FeatureKinds{false, true}).empty());
}

TEST(ExtractFeatures, AnonymousAndHeadExcluded) {
  auto set = extract("soft(a,F) :- field(_,F), f(g(X)), not p(X), X != F.");
  auto incs = extract_features(set);
  EXPECT_EQ(counts_of(incs), (std::map<Feature, std::size_t>{
                                 {pred("f", 1), 1}, {pred("field", 2), 1}, {pred("p", 1), 1}, {var("F"), 2},
                                 {var("X"), 3}}));
}

TEST(ExtractFeatures, RequiresAKind) {
  EXPECT_THROW(extract_features(ConstraintSet{}, FeatureKinds{false, false}), std::invalid_argument);
}

TEST(FeatureKinds, ParseAndPrint) {
  EXPECT_EQ(FeatureKinds::parse("predicates,variables"), (FeatureKinds{true, true}));
  EXPECT_EQ(FeatureKinds::parse("variables"), (FeatureKinds{false, true}));
  EXPECT_EQ(FeatureKinds::parse("predicates").str(), "predicates");
  EXPECT_EQ(FeatureKinds{}.str(), "predicates,variables");
  EXPECT_THROW(FeatureKinds::parse("constants"), std::invalid_argument);
  EXPECT_THROW(FeatureKinds::parse(""), std::invalid_argument);
}

TEST(FeatureRefs, RoundTrip) {
  EXPECT_EQ(pred("bin", 2).ref(), "predicate:bin/2");
  EXPECT_EQ(var("EN").ref(), "variable:EN");
  EXPECT_EQ(parse_feature_ref("predicate:bin/2"), pred("bin", 2));
  EXPECT_EQ(parse_feature_ref("variable:EN"), var("EN"));
  EXPECT_FALSE(parse_feature_ref("predicate:bin").has_value());
  EXPECT_FALSE(parse_feature_ref("soft/bin_high").has_value());
}

TEST(SharedFeatures, DegreeFiveTopology) {
  std::string src;
  for (int i = 0; i < 5; ++i) src += "soft(c" + std::to_string(i) + ",E) :- encoding(E), entropy(E,EN), EN > 2.\n";
  src += "soft(other) :- mark(bar).\n";
  auto shared = shared_features(extract_features(extract(src), FeatureKinds{false, true}), 2);
  auto it = std::find_if(shared.begin(), shared.end(), [](const SharedFeature& s) { return s.feature == var("EN"); });
  ASSERT_NE(it, shared.end());
  EXPECT_EQ(it->degree(), 5u);
  EXPECT_TRUE(std::is_sorted(it->constraints.begin(), it->constraints.end()));
}

TEST(SharedFeatures, Thresholds) {
  auto set = extract("soft(a) :- p(X).\nsoft(b) :- q(X).\nsoft(c) :- r(Y).\n");
  auto incs = extract_features(set);
  auto two = shared_features(incs, 2);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].feature, var("X"));
  auto one = shared_features(incs, 1);
  EXPECT_EQ(one.size(), 5u);
  EXPECT_THROW(shared_features(incs, 0), std::invalid_argument);
}

// ---- properties -----------------------------------------------------------------

TEST(FeaturesProperty, VariableConservationAgainstTokenScan) {
  auto check = [](const ConstraintSet& set) {
    std::size_t total = 0, scanned = 0;
    for (const auto& inc : extract_features(set, FeatureKinds{false, true})) total += inc.occurrence_count;
    for (const auto& c : set.constraints) scanned += oracle::scan_body_variables(c.source);
    EXPECT_EQ(total, scanned);
  };
  check(fixtures::mini_model());
  gen::Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    std::string src;
    for (std::size_t k = 0, n = 1 + rng.below(6); k < n; ++k) {
      kbviz::Rule r;
      r.head = Atom{"soft", {Term::constant("c" + std::to_string(k))}};
      for (std::size_t m = 0, b = 1 + rng.below(4); m < b; ++m) r.body.push_back(gen::random_literal(rng));
      src += to_string(r) + "\n";
    }
    check(extract(src));
  }
}

TEST(FeaturesProperty, DracoConservationSkipsUnsupportedBodies) {
  auto set = fixtures::draco_model();
  std::size_t total = 0, scanned = 0;
  for (const auto& inc : extract_features(set, FeatureKinds{false, true})) {
    const Constraint* c = set.find(inc.constraint);
    if (!c->unsupported) total += inc.occurrence_count;
  }
  for (const auto& c : set.constraints)
    if (!c.unsupported) scanned += oracle::scan_body_variables(c.source);
  EXPECT_EQ(total, scanned);
}

TEST(FeaturesProperty, RaisingMinDegreeNeverAddsFeatures) {
  auto incs = extract_features(fixtures::draco_model());
  std::set<Feature> previous;
  for (const auto& s : shared_features(incs, 1)) previous.insert(s.feature);
  for (std::size_t d = 2; d < 40; ++d) {
    std::set<Feature> now;
    for (const auto& s : shared_features(incs, d)) now.insert(s.feature);
    EXPECT_TRUE(std::includes(previous.begin(), previous.end(), now.begin(), now.end())) << d;
    previous = std::move(now);
  }
}

TEST(FeaturesProperty, Deterministic) {
  auto set = fixtures::draco_model();
  auto a = extract_features(set);
  auto b = extract_features(set);
  EXPECT_EQ(a, b);
}
