// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "kbviz/workspace.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/layout_checks.hpp"
#include "support/oracles.hpp"

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace kbviz;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Collects failure reasons for one criterion.
class Check {
public:
  void expect(bool ok, const std::string& why) {
    if (!ok && failures_.size() < 5) failures_.push_back(why);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string detail() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) s += "; ... " + std::to_string(count_ - failures_.size()) + " more";
    return s;
  }

private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

ConstraintSet model_of(const std::string& kb, const std::string& weights = "") {
  return build_model(kb, "kb.lp", weights.empty() ? std::nullopt : std::optional<std::string>(weights), "weights.lp");
}

// ---- criteria -------------------------------------------------------------------

std::string extraction_counts(Check& c) {
  std::string all = fixtures::text("draco/soft.lp") + "\n" + fixtures::text("draco/hard.lp");
  auto start = Clock::now();
  auto draco = fixtures::draco_model();
  double secs = seconds_since(start);
  long soft = static_cast<long>(draco.count(ConstraintKind::Soft));
  long hard = static_cast<long>(draco.count(ConstraintKind::Hard));
  c.expect(soft == static_cast<long>(oracle::grep_heads(all, "soft")), "soft count differs from line scan");
  c.expect(hard == static_cast<long>(oracle::grep_heads(all, "hard")), "hard count differs from line scan");
  c.expect(std::abs(soft - 150) <= 10, "soft count far from 150");
  c.expect(std::abs(hard - 70) <= 10, "hard count far from 70");
  c.expect(std::abs(soft + hard - 230) <= 10, "total far from 230");
  c.expect(secs < 1.0, "extraction took " + std::to_string(secs) + " s");
  auto mini = fixtures::mini_model();
  c.expect(mini.count(ConstraintKind::Soft) == 20 && mini.count(ConstraintKind::Hard) == 10, "mini counts");
  std::ostringstream s;
  s << "draco soft=" << soft << " hard=" << hard << " in " << secs << " s; mini soft="
    << mini.count(ConstraintKind::Soft) << " hard=" << mini.count(ConstraintKind::Hard);
  return s.str();
}

std::string star(std::size_t n) {
  std::string src;
  for (std::size_t i = 0; i < n; ++i) {
    std::string k = std::to_string(i);
    src += "soft(c" + k + ",E) :- p" + k + "(E,V" + k + ").\n";
  }
  return src;
}

std::string hyperedge_reduction(Check& c) {
  auto ten = model_of(star(10));
  auto g = build_hypergraph(ten, ConstraintKind::Soft, FeatureKinds{}, 2);
  std::vector<std::vector<BodyLiteral>> bodies;
  for (const auto& con : ten.constraints) bodies.push_back(con.body);
  std::size_t pairwise = oracle::pairs_sharing_feature(bodies, true, true).size();
  c.expect(g.edges.size() == 10, "n=10 gives " + std::to_string(g.edges.size()) + " edges");
  c.expect(pairwise == 45, "n=10 pairwise " + std::to_string(pairwise));
  gen::Rng rng(4242);
  for (int i = 0; i < 100; ++i) {
    std::size_t n = static_cast<std::size_t>(rng.between(3, 100));
    auto h = build_hypergraph(model_of(star(n)), ConstraintKind::Soft, FeatureKinds{}, 2);
    c.expect(h.edges.size() == n, "n=" + std::to_string(n) + " gives " + std::to_string(h.edges.size()) + " edges");
  }
  return "n=10: " + std::to_string(g.edges.size()) + " edges vs " + std::to_string(pairwise) + " pairs; 100 random n";
}

std::string evaluator_oracle(Check& c) {
  gen::Rng rng(1000);
  auto start = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    auto pool = gen::value_pool(rng, 1 + rng.below(20));
    auto atoms = gen::random_facts(rng, pool, 50);
    auto body = gen::random_body(rng, pool, 4);
    FactSet facts("spec", atoms);
    std::size_t expected = oracle::brute_force_count(body, atoms);
    std::size_t got = evaluate_body(body, facts).count;
    c.expect(got == expected, to_string(Rule{Atom{"soft", {Term::constant("x")}}, body}) + " counted " +
                                  std::to_string(got) + " not " + std::to_string(expected));
  }
  double secs = seconds_since(start);
  c.expect(secs < 30.0, "took " + std::to_string(secs) + " s");
  return "1000 instances in " + std::to_string(secs) + " s";
}

std::string fixture_costs(Check& c) {
  auto ws = Workspace::from_sources(fixtures::data("mini/kb.lp"), fixtures::data("mini/weights.lp"),
                                    fixtures::data("mini/specs"));
  const auto& reports = ws.reports();
  std::string order, costs;
  for (const auto& r : reports) {
    order += r.spec_name;
    costs += (costs.empty() ? "" : ",") + std::to_string(r.cost);
  }
  c.expect(order == "ABC", "rank " + order);
  c.expect(costs == "30,30,32", "costs " + costs);
  if (reports.size() == 3) {
    const auto& a = reports[0];
    const auto& cc = reports[2];
    std::int64_t extra_weight = 0;
    std::size_t extra_count = 0;
    for (const auto& con : ws.set().constraints) {
      auto da = a.count_of(con.ref()), dc = cc.count_of(con.ref());
      c.expect(dc >= da, con.ref().str() + " violated less in C");
      if (dc > da) {
        extra_count += dc - da;
        extra_weight += con.weight.value_or(0) * static_cast<std::int64_t>(dc - da);
      }
    }
    c.expect(extra_count == 1 && extra_weight == 2, "C differs by " + std::to_string(extra_count) +
                                                        " violations of total weight " + std::to_string(extra_weight));
  }
  return "rank " + order + ", costs " + costs;
}

std::string layout_invariants(Check& c) {
  gen::Rng rng(2718);
  int graphs = 0;
  while (graphs < 200) {
    auto kb = gen::random_kb(rng);
    auto set = model_of(kb.kb, kb.weights);
    LayoutConfig cfg = LayoutConfig::for_radius(rng.uniform(50, 2000));
    cfg.start_angle = rng.uniform(-10, 10);
    auto kind = rng.chance(0.5) ? ConstraintKind::Soft : ConstraintKind::Hard;
    auto g = build_hypergraph(set, kind, FeatureKinds{}, 1 + rng.below(3));
    if (g.empty()) continue;
    ++graphs;
    auto m = compute_layout(g, set.hierarchy_of(kind), cfg);
    std::vector<std::vector<std::string>> paths;
    for (const auto& p : m.constraints) paths.push_back(g.constraints.at(p.node).hierarchy_path);
    for (const auto& v : checks::containment(m)) c.expect(false, "containment: " + v);
    for (const auto& v : checks::uniform_angles(m, 1e-9)) c.expect(false, "angles: " + v);
    for (const auto& v : checks::arc_nesting(m, paths)) c.expect(false, "nesting: " + v);
    for (const auto& v : checks::mirroring(m)) c.expect(false, "mirroring: " + v);
  }
  LayoutConfig cfg;
  c.expect(weight_color(std::optional<std::int64_t>(0), cfg).hex() == "#2166ac", "color at 0");
  c.expect(weight_color(std::optional<std::int64_t>(25), cfg).hex() == "#ffffff", "color at 25");
  c.expect(weight_color(std::optional<std::int64_t>(50), cfg).hex() == "#b2182b", "color at 50");
  const double half = kPi / 2;
  c.expect(!label_transform(half).mirrored && !label_transform(3 * half).mirrored, "boundary angles mirrored");
  c.expect(label_transform(std::nextafter(half, 4.0)).mirrored, "just above 90 degrees not mirrored");
  c.expect(label_transform(std::nextafter(3 * half, 0.0)).mirrored, "just below 270 degrees not mirrored");
  c.expect(!label_transform(std::nextafter(half, 0.0)).mirrored, "just below 90 degrees mirrored");
  return std::to_string(graphs) + " random graphs";
}

struct Output {
  int status = -1;
  std::string out;
};

Output run_cli(const std::string& args) {
  Output o;
  std::string command = std::string("'") + KBVIZ_CLI + "' " + args + " 2>/dev/null";
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), n);
  int raw = ::pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string determinism(Check& c) {
  auto dir = fixtures::temp_dir("acceptance-determinism");
  write_file(dir / "kb.lp", fixtures::text("draco/soft.lp") + "\n" + fixtures::text("draco/hard.lp"));
  auto model = dir / "model.json";
  std::string model_args = "model " + q(dir / "kb.lp") + " -w " + q(fixtures::data("draco/weights.lp"));
  c.expect(run_cli(model_args + " -o " + q(model)).status == 0, "model command failed");
  std::vector<std::string> commands{model_args,
                                    "layout " + q(model),
                                    "layout " + q(model) + " --type hard",
                                    "layout " + q(model) + " --out svg",
                                    "layout " + q(model) + " --out svg --type hard",
                                    "eval " + q(model) + " " + q(fixtures::data("mini/specs"))};
  for (const auto& args : commands) {
    auto first = run_cli(args);
    c.expect(first.status == 0 && !first.out.empty(), "'" + args + "' failed");
    for (int k = 1; k < 3; ++k) c.expect(run_cli(args).out == first.out, "'" + args + "' differs on run " + std::to_string(k + 1));
  }
  return std::to_string(commands.size()) + " commands x 3 runs";
}

std::string parser_robustness(Check& c) {
  gen::Rng rng(10000);
  double slowest = 0;
  std::size_t with_errors = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string input = gen::fuzz_input(rng);
    auto start = Clock::now();
    ParseResult r;
    try {
      r = parse_program(input);
    } catch (const std::exception& e) {
      c.expect(false, std::string("threw ") + e.what());
      continue;
    }
    double secs = seconds_since(start);
    slowest = std::max(slowest, secs);
    c.expect(secs < 1.0, "input " + std::to_string(i) + " took " + std::to_string(secs) + " s");
    if (r.error_count() > 0) ++with_errors;
    for (const auto& d : r.diagnostics) {
      c.expect(!d.message.empty(), "empty diagnostic message");
      c.expect(d.span.start <= d.span.end && d.span.end <= input.size(), "diagnostic span out of range");
      c.expect(d.span.line >= 1 && d.span.col >= 1, "diagnostic position not 1-based");
    }
  }
  std::ostringstream s;
  s << "10000 inputs, " << with_errors << " with errors, slowest " << slowest << " s";
  return s.str();
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    std::string (*run)(Check&);
  };
  const Criterion criteria[] = {
      {"extraction counts", extraction_counts},
      {"hyperedge reduction", hyperedge_reduction},
      {"evaluator oracle equivalence", evaluator_oracle},
      {"fixture costs and ranking", fixture_costs},
      {"layout invariants", layout_invariants},
      {"determinism", determinism},
      {"parser robustness", parser_robustness},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Check check;
    std::string summary;
    try {
      summary = crit.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    if (check.ok()) {
      std::cout << "PASS " << crit.name << " (" << summary << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL " << crit.name << ": " << check.detail() << "\n";
    }
  }
  std::cout << (std::size(criteria) - failed) << "/" << std::size(criteria) << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
