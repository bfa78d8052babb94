// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "repset/bench.hpp"
#include "repset/checkpoint.hpp"
#include "repset/classifier.hpp"
#include "repset/data_io.hpp"
#include "repset/model.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace repset;
namespace rt = repset::testing;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out != nullptr) *out = o.str();
  if (code != 0) std::fprintf(stderr, "  repset exited %d: %s", code, e.str().c_str());
  return code;
}

double parse_field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) return -1.0;
  return std::stod(text.substr(pos + key.size() + 1));
}

Outcome worked_example() {
  const WeightMatrix w = rt::worked_weights();
  const Assignment a = solve_exact(w);
  const std::vector<MatchedPair> expected{{0, 2}, {1, 1}, {2, 4}, {3, 0}};
  std::vector<double> times;
  for (int r = 0; r < 201; ++r) {
    const auto t0 = Clock::now();
    const Assignment b = solve_exact(w);
    times.push_back(seconds_since(t0));
    if (b.pairs.empty()) return {false, "empty assignment"};
  }
  std::nth_element(times.begin(), times.begin() + 100, times.end());
  const double median = times[100];
  const bool ok = std::abs(a.objective - 16.05) <= 0.01 && a.pairs == expected && median < 1e-3;
  return {ok, fmt("objective=%.4f pairs_match=%s median_solve_us=%.2f", a.objective,
                  a.pairs == expected ? "yes" : "no", median * 1e6)};
}

Outcome permutation_invariance() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t prediction_mismatches = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t n = rt::uniform_size(1, 12, rng);
    const std::size_t d = rt::uniform_size(1, 6, rng);
    std::vector<Eigen::MatrixXd> hs;
    const std::size_t m = rt::uniform_size(1, 5, rng);
    for (std::size_t k = 0; k < m; ++k) hs.push_back(rt::gaussian_matrix(d, rt::uniform_size(1, 8, rng), rng));
    Model model;
    model.hidden = HiddenSets(hs);
    model.head = {rt::gaussian_matrix(3, m, rng), rt::gaussian_matrix(3, 1, rng).col(0)};
    const Eigen::MatrixXd x = rt::gaussian_matrix(n, d, rng);
    for (MatchMode mode : {MatchMode::kExact, MatchMode::kRelaxed}) {
      model.mode = mode;
      const ForwardPass base = forward(model, VectorSet(x));
      for (int p = 0; p < 20; ++p) {
        const VectorSet xp(rt::permute_rows(x, rt::random_permutation(n, rng)));
        const ForwardPass perm = forward(model, xp);
        worst = std::max(worst, (perm.embedding.values - base.embedding.values).cwiseAbs().maxCoeff());
        worst = std::max(worst, (perm.record.probs - base.record.probs).cwiseAbs().maxCoeff());
        if (perm.record.predicted() != base.record.predicted()) ++prediction_mismatches;
      }
    }
  }
  return {worst <= 1e-9 && prediction_mismatches == 0,
          fmt("max_abs_diff=%.3g prediction_mismatches=%zu", worst, prediction_mismatches)};
}

Outcome relaxed_upper_bound() {
  std::mt19937_64 rng(202);
  std::size_t violations = 0, strict = 0;
  for (int t = 0; t < 1000; ++t) {
    const WeightMatrix w = rt::random_weights(rt::uniform_size(1, 10, rng), rt::uniform_size(1, 10, rng), rng);
    const double exact = solve_exact(w).objective;
    const double relaxed = solve_relaxed(w).objective;
    if (relaxed < exact - 1e-9) ++violations;
    if (relaxed > exact + 1e-9) ++strict;
  }
  return {violations == 0 && strict > 0, fmt("violations=%zu strict=%zu of 1000", violations, strict)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t r = rt::uniform_size(1, 6, rng), c = rt::uniform_size(1, 6, rng);
    const WeightMatrix w = t % 4 == 0 ? rt::random_integer_weights(r, c, rng) : rt::random_weights(r, c, rng);
    worst = std::max(worst, std::abs(solve_exact(w).objective - brute_force_oracle(w).objective));
  }
  return {worst <= 1e-9, fmt("max_abs_diff=%.3g over 500 matrices", worst)};
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  const double step = 1e-5;
  double worst = 0.0;
  std::map<MatchMode, int> checked, skipped;
  for (MatchMode mode : {MatchMode::kExact, MatchMode::kRelaxed}) {
    for (int attempt = 0; checked[mode] < 50 && attempt < 5000; ++attempt) {
      const std::size_t d = rt::uniform_size(1, 4, rng);
      const std::size_t m = rt::uniform_size(1, 3, rng);
      Model model;
      model.mode = mode;
      std::vector<Eigen::MatrixXd> hs;
      for (std::size_t k = 0; k < m; ++k) hs.push_back(rt::gaussian_matrix(d, rt::uniform_size(1, 4, rng), rng));
      model.hidden = HiddenSets(hs);
      model.head = {rt::gaussian_matrix(3, m, rng), rt::gaussian_matrix(3, 1, rng).col(0)};
      const VectorSet x(rt::gaussian_matrix(rt::uniform_size(1, 5, rng), d, rng));
      const std::size_t label = rt::uniform_size(0, 2, rng);

      bool degenerate = rt::near_kink(x, model.hidden, 1e-4);
      for (const auto& hk : model.hidden.matrices()) {
        degenerate = degenerate || rt::near_tie(score_matrix(x, hk), mode, 1e-4);
      }
      if (degenerate) {
        ++skipped[mode];
        continue;
      }
      ModelGradients g = ModelGradients::zeros_like(model);
      accumulate_backward(model, forward(model, x, label), g);
      const auto numeric = rt::numeric_gradients(
          model, [&](const Model& mm) { return nll_loss(forward(mm, x, label).record); }, step);
      const auto analytic = gradient_views(g);
      for (std::size_t b = 0; b < analytic.size(); ++b) {
        for (std::size_t i = 0; i < analytic[b].size(); ++i) {
          worst = std::max(worst, rt::relative_error(analytic[b][i], numeric[b][i]));
        }
      }
      ++checked[mode];
    }
  }
  const double elapsed = seconds_since(t0);
  const bool ok = checked[MatchMode::kExact] == 50 && checked[MatchMode::kRelaxed] == 50 && worst < 1e-5 &&
                  elapsed < 60.0;
  return {ok, fmt("checked exact=%d relaxed=%d skipped exact=%d relaxed=%d max_rel_err=%.3g seconds=%.2f",
                  checked[MatchMode::kExact], checked[MatchMode::kRelaxed], skipped[MatchMode::kExact],
                  skipped[MatchMode::kRelaxed], worst, elapsed)};
}

Outcome toy_convergence(const fs::path& work) {
  std::string detail;
  bool ok = true;
  double slowest = 0.0;
  for (const char* mode : {"exact", "relaxed"}) {
    for (const char* m : {"2", "1"}) {
      int converged = 0;
      for (int seed = 0; seed < 10; ++seed) {
        std::string out;
        const auto t0 = Clock::now();
        const int code = run_cli({"train", "--synthetic", "toy", "--m", m, "--card", "2", "--mode", mode,
                                  "--epochs", "200", "--seed", std::to_string(seed), "--checkpoint",
                                  (work / "toy.json").string(), "--out", (work / "toy.csv").string()},
                                 &out);
        const double elapsed = seconds_since(t0);
        slowest = std::max(slowest, elapsed);
        if (code == 0 && parse_field(out, "train_accuracy") == 1.0 && elapsed < 10.0) ++converged;
      }
      ok = ok && converged >= 9;
      detail += fmt("%s/m=%s:%d/10 ", mode, m, converged);
    }
  }
  return {ok, detail + fmt("slowest_run_s=%.3f", slowest)};
}

double best_epoch_time(const BenchPoint& point) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < 3; ++r) best = std::min(best, time_epoch(point, 7, 1));
  return best;
}

Outcome runtime_trend() {
  BenchPoint p;
  p.m = 50;
  p.cardinality = 50;
  p.examples = 200;
  p.dim = 20;
  std::map<std::size_t, double> exact;
  for (std::size_t s : {10, 50, 100}) {
    p.set_cardinality = s;
    p.mode = MatchMode::kExact;
    exact[s] = best_epoch_time(p);
  }
  p.set_cardinality = 50;
  p.mode = MatchMode::kRelaxed;
  const double relaxed = best_epoch_time(p);
  const double growth = exact[100] / exact[10];
  const bool monotone = exact[50] >= 0.9 * exact[10] && exact[100] >= 0.9 * exact[50];
  const bool ok = relaxed < 0.5 * exact[50] && growth > 10.0 && monotone;
  return {ok, fmt("exact_s{10,50,100}=%.4f,%.4f,%.4f relaxed_s(50)=%.4f ratio_relaxed/exact=%.3f growth=%.1f",
                  exact[10], exact[50], exact[100], relaxed, relaxed / exact[50], growth)};
}

Outcome mini_corpus(const fs::path& work) {
  const fs::path root(REPSET_SOURCE_DIR);
  const std::string sets = (work / "corpus.jsonl").string();
  const std::string ckpt = (work / "corpus.json").string();
  if (run_cli({"vectorize", "--docs", (root / "tests/data/mini_corpus.tsv").string(), "--embeddings",
               (root / "tests/data/mini_embeddings.txt").string(), "--stopwords",
               (root / "data/stopwords_mini.txt").string(), "--out", sets}) != 0) {
    return {false, "vectorize failed"};
  }
  if (run_cli({"train", "--data", sets, "--m", "4", "--card", "3", "--lr", "0.05", "--epochs", "100",
               "--val-fraction", "0", "--checkpoint", ckpt, "--out", (work / "corpus.csv").string()}) != 0) {
    return {false, "train failed"};
  }
  std::string out;
  if (run_cli({"eval", "--data", sets, "--checkpoint", ckpt}, &out) != 0) return {false, "eval failed"};
  const Dataset data = load_set_file(sets);
  std::vector<std::size_t> counts(data.num_classes(), 0);
  for (const auto& ex : data.examples) ++counts[*ex.label];
  const double baseline =
      static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(data.size());
  const double acc = parse_field(out, "accuracy");
  return {acc > baseline, fmt("accuracy=%.4f majority_baseline=%.4f", acc, baseline)};
}

}  // namespace

// Usage: acceptance [criterion-number ...]; no arguments runs every criterion.
int main(int argc, char** argv) {
  const fs::path work = fs::temp_directory_path() / ("repset_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"worked example objective and matching", worked_example},
      {"permutation invariance", permutation_invariance},
      {"relaxed objective bounds exact from above", relaxed_upper_bound},
      {"exact solver matches brute force", oracle_equivalence},
      {"analytic gradients match finite differences", gradient_checks},
      {"toy task convergence", [&] { return toy_convergence(work); }},
      {"runtime trend across modes and set sizes", runtime_trend},
      {"miniature corpus end to end", [&] { return mini_corpus(work); }},
  };

  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) {
    const std::size_t n = std::strtoul(argv[a], nullptr, 10);
    if (n < 1 || n > criteria.size()) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[a]);
      return 2;
    }
    selected.push_back(n - 1);
  }
  if (selected.empty()) {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  }

  int failures = 0;
  for (std::size_t i : selected) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(work);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(selected.size()) - failures, selected.size());
  return failures == 0 ? 0 : 1;
}
