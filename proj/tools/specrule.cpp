// specrule: sampling, coefficient/measure transforms, sum-rule reports,
// large-deviation experiments, and the built-in invariant check suite.

#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specrule/ensembles.hpp"
#include "specrule/io_json.hpp"
#include "specrule/ldp.hpp"
#include "specrule/measures.hpp"
#include "specrule/oprl.hpp"
#include "specrule/opuc.hpp"
#include "specrule/parallel.hpp"
#include "specrule/rng.hpp"
#include "specrule/selfcheck.hpp"
#include "specrule/sumrules.hpp"

namespace {

using namespace specrule;

struct SampleArgs {
  int n = 1;
  int count = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string out;
};

// Draw `count` items, one derived stream per item, so the output is
// independent of the worker count and matches any prefix of a larger run.
template <class Draw>
void run_sample(const std::string& kind, const SampleArgs& a, Draw draw) {
  if (a.n < 1) throw std::invalid_argument("sample: --n must be >= 1");
  if (a.count < 1) throw std::invalid_argument("sample: --count must be >= 1");
  std::vector<json> items(a.count);
  parallel_for(a.count, [&](int i) {
    RngStream rng(a.seed, a.stream + static_cast<std::uint64_t>(i));
    items[i] = draw(rng);
  });
  write_json_file(a.out, json{{"v", 1},
                              {"kind", kind},
                              {"n", a.n},
                              {"count", a.count},
                              {"seed", a.seed},
                              {"stream", a.stream},
                              {"samples", std::move(items)}});
}

// Transforms accept either a bare object or a sample envelope; envelopes are
// mapped item by item and keep their bookkeeping fields.
template <class F>
void run_transform(const std::string& in, const std::string& out,
                   const std::string& out_kind, F f) {
  json j = read_json_file(in);
  if (j.is_object() && j.contains("samples")) {
    detail::require_version(j, "sample envelope");
    json items = json::array();
    for (const auto& item : j["samples"]) items.push_back(f(item));
    j["samples"] = std::move(items);
    j["kind"] = out_kind;
    write_json_file(out, j);
  } else {
    write_json_file(out, f(j));
  }
}

void print_report(const SumRuleReport& rep) {
  std::printf("%s\n", rep.rule.c_str());
  auto row = [](const std::string& k, double v) {
    std::printf("  %-18s %s\n", k.c_str(), format_double(v).c_str());
  };
  row("coefficient_side", rep.coefficient_side);
  row("measure_side", rep.measure_side);
  row("defect", rep.defect);
  for (const auto& [k, v] : rep.terms) row(k, v);
  if (!rep.note.empty()) std::printf("  note: %s\n", rep.note.c_str());
}

int cmd_check(double tol_scale) {
  int failed = 0;
  for (const auto& o : run_selfchecks(tol_scale)) {
    if (o.ok) {
      std::printf("ok   %s\n", o.name.c_str());
    } else {
      ++failed;
      std::printf("FAIL %s: %s\n", o.name.c_str(), o.message.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d checks, %d failed\n",
              static_cast<int>(selfchecks().size()), failed);
  return failed == 0 ? 0 : 1;
}

void cmd_exp_tail(double t, const std::vector<int>& ns, int samples,
                  std::uint64_t seed, std::uint64_t stream, double lambda,
                  const std::string& out) {
  const TailStudy st = mc_tail_estimate(t, ns, samples, seed, stream, lambda);
  std::ostringstream csv;
  csv << "N,a_N,log_p_hat,stderr,ess\n";
  for (const auto& p : st.points) {
    csv << p.n << ',' << format_double(p.a_n) << ',' << format_double(p.log_p)
        << ',' << format_double(p.rel_stderr) << ',' << format_double(p.ess)
        << '\n';
    if (p.flagged)
      std::fprintf(stderr,
                   "warning: N=%d effective sample size %.1f is too small\n",
                   p.n, p.ess);
  }
  csv << "# lambda = " << format_double(st.lambda) << '\n';
  csv << "# extrapolated_rate = " << format_double(st.extrapolated_rate)
      << '\n';
  write_text_file(out, csv.str());
  std::printf("extrapolated_rate %s\n",
              format_double(st.extrapolated_rate).c_str());
}

void cmd_binned(const std::string& in, int jmax, const std::string& out) {
  // the CSV describes one measure, so only single-item envelopes unwrap
  json doc = read_json_file(in);
  if (doc.is_object() && doc.contains("samples")) {
    detail::require_version(doc, "sample envelope");
    if (doc["samples"].size() != 1)
      throw std::invalid_argument(
          "ldp binned: envelope holds " +
          std::to_string(doc["samples"].size()) +
          " items; expected a single measure document (sample with --count 1 "
          "or transform a bare coefficient file)");
    doc = doc["samples"][0];
  }
  const SpectralMeasure mu = measure_from_json(doc);
  const SpectralMeasure ref = mu.domain == Domain::Circle
                                  ? lebesgue_circle_measure()
                                  : semicircle_measure();
  const auto h = monotone_binned_entropy(ref, mu, jmax);
  std::ostringstream csv;
  csv << "j,entropy\n";
  for (size_t j = 0; j < h.size(); ++j)
    csv << j << ',' << format_double(h[j]) << '\n';
  write_text_file(out, csv.str());
}

// A sumrule input for the line rule: either a perturbation object or a bare
// set of tridiagonal coefficients used as the perturbed prefix.
FiniteRankPerturbation perturbation_from_input(const json& j) {
  if (j.is_object() && j.contains("prefix")) return perturbation_from_json(j);
  return FiniteRankPerturbation{jacobi_from_json(j)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral sum rules and large-deviation laboratory"};
  app.require_subcommand(1);

  // ---- sample -------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "draw from a random ensemble");
  SampleArgs sa;
  std::string sample_what;
  sample
      ->add_option("what", sample_what,
                   "one of: cue-alpha, cue-measure, gue, haar")
      ->required()
      ->check(CLI::IsMember({"cue-alpha", "cue-measure", "gue", "haar"}));
  sample->add_option("--n", sa.n, "instance size")->required();
  sample->add_option("--count", sa.count, "number of draws")->required();
  sample->add_option("--seed", sa.seed, "RNG seed")->required();
  sample->add_option("--stream", sa.stream, "base stream id (default 0)");
  sample->add_option("--out", sa.out, "output JSON path")->required();

  // ---- transform ----------------------------------------------------------
  auto* transform = app.add_subcommand(
      "transform", "convert between coefficients and measures");
  std::string tr_what, tr_in, tr_out;
  int tr_count = 0;
  transform
      ->add_option("what", tr_what,
                   "one of: alpha-to-measure, measure-to-alpha, "
                   "jacobi-to-measure, measure-to-jacobi")
      ->required()
      ->check(CLI::IsMember({"alpha-to-measure", "measure-to-alpha",
                             "jacobi-to-measure", "measure-to-jacobi"}));
  transform->add_option("--in", tr_in, "input JSON path")->required();
  transform->add_option("--out", tr_out, "output JSON path")->required();
  transform->add_option("--count", tr_count,
                        "coefficients to recover (measure-to-* only)");

  // ---- sumrule ------------------------------------------------------------
  auto* sumrule =
      app.add_subcommand("sumrule", "evaluate both sides of a sum rule");
  std::string sr_what, sr_in, sr_report;
  sumrule->add_option("what", sr_what, "one of: szego, ks")
      ->required()
      ->check(CLI::IsMember({"szego", "ks"}));
  sumrule->add_option("--in", sr_in, "input JSON path")->required();
  sumrule->add_option("--report", sr_report, "optional JSON report path");

  // ---- ldp ----------------------------------------------------------------
  auto* ldp = app.add_subcommand("ldp", "large-deviation experiments");
  ldp->require_subcommand(1);
  auto* exp_tail = ldp->add_subcommand(
      "exp-tail", "tilted Monte-Carlo tail rates for exponential sums");
  double et_t = 2.0, et_lambda = std::nan("");
  std::vector<int> et_ns;
  int et_samples = 0;
  std::uint64_t et_seed = 0, et_stream = 0;
  std::string et_out;
  exp_tail->add_option("--t", et_t, "tail threshold (mean is 1)")->required();
  exp_tail->add_option("--n", et_ns, "comma-separated sum lengths")
      ->required()
      ->delimiter(',');
  exp_tail
      ->add_option("--samples", et_samples, "Monte-Carlo samples per length")
      ->required();
  exp_tail->add_option("--seed", et_seed, "RNG seed")->required();
  exp_tail->add_option("--stream", et_stream, "base stream id (default 0)");
  exp_tail->add_option("--lambda", et_lambda,
                       "tilt parameter (default: optimal; 0 = naive)");
  exp_tail->add_option("--out", et_out, "output CSV path")->required();

  auto* binned = ldp->add_subcommand(
      "binned", "dyadic-resolution entropy profile of a measure");
  std::string bn_in, bn_out;
  int bn_jmax = 10;
  binned->add_option("--in", bn_in, "measure JSON path")->required();
  binned->add_option("--jmax", bn_jmax, "finest dyadic level")->required();
  binned->add_option("--out", bn_out, "output CSV path")->required();

  // ---- check --------------------------------------------------------------
  auto* check = app.add_subcommand("check", "run the invariant suite");
  std::string ck_what;
  double ck_scale = 1.0;
  check->add_option("what", ck_what, "must be: all")
      ->required()
      ->check(CLI::IsMember({"all"}));
  check->add_option("--tol-scale", ck_scale, "multiply every tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string op = "startup";
  try {
    if (*sample) {
      op = "sample " + sample_what;
      if (sample_what == "cue-alpha") {
        run_sample("cue-alpha", sa, [&](RngStream& rng) {
          return to_json(sample_cue_verblunsky(rng, sa.n));
        });
      } else if (sample_what == "cue-measure") {
        run_sample("cue-measure", sa, [&](RngStream& rng) {
          return to_json(verblunsky_to_measure(sample_cue_verblunsky(rng, sa.n)));
        });
      } else if (sample_what == "gue") {
        run_sample("gue", sa, [&](RngStream& rng) {
          return to_json(sample_gue_jacobi(rng, sa.n));
        });
      } else {
        run_sample("haar", sa, [&](RngStream& rng) {
          return to_json(sample_haar_unitary(rng, sa.n));
        });
      }
    } else if (*transform) {
      op = "transform " + tr_what;
      if (tr_what == "alpha-to-measure") {
        run_transform(tr_in, tr_out, "measure", [](const json& j) {
          return to_json(verblunsky_to_measure(verblunsky_from_json(j)));
        });
      } else if (tr_what == "measure-to-alpha") {
        if (tr_count < 1)
          throw std::invalid_argument(
              "transform measure-to-alpha: --count must be >= 1");
        run_transform(tr_in, tr_out, "verblunsky", [&](const json& j) {
          return to_json(
              measure_to_verblunsky(measure_from_json(j), tr_count));
        });
      } else if (tr_what == "jacobi-to-measure") {
        run_transform(tr_in, tr_out, "measure", [](const json& j) {
          return to_json(jacobi_to_measure(jacobi_from_json(j)));
        });
      } else {
        if (tr_count < 1)
          throw std::invalid_argument(
              "transform measure-to-jacobi: --count must be >= 1");
        run_transform(tr_in, tr_out, "jacobi", [&](const json& j) {
          return to_json(measure_to_jacobi(measure_from_json(j), tr_count));
        });
      }
    } else if (*sumrule) {
      op = "sumrule " + sr_what;
      // a sample envelope is evaluated item by item, like transform
      const json doc = read_json_file(sr_in);
      std::vector<json> inputs;
      if (doc.is_object() && doc.contains("samples")) {
        detail::require_version(doc, "sample envelope");
        for (const auto& item : doc["samples"]) inputs.push_back(item);
      } else {
        inputs.push_back(doc);
      }
      std::vector<SumRuleReport> reps;
      reps.reserve(inputs.size());
      for (size_t k = 0; k < inputs.size(); ++k) {
        SumRuleReport rep =
            sr_what == "szego"
                ? szego_report(verblunsky_from_json(inputs[k]))
                : ks_report(perturbation_from_input(inputs[k]));
        if (inputs.size() > 1) std::printf("-- item %zu --\n", k);
        print_report(rep);
        reps.push_back(std::move(rep));
      }
      if (!sr_report.empty())
        write_json_file(sr_report, reps.size() == 1 ? to_json(reps[0])
                                                    : reports_to_json(reps));
    } else if (*exp_tail) {
      op = "ldp exp-tail";
      cmd_exp_tail(et_t, et_ns, et_samples, et_seed, et_stream, et_lambda,
                   et_out);
    } else if (*binned) {
      op = "ldp binned";
      cmd_binned(bn_in, bn_jmax, bn_out);
    } else if (*check) {
      op = "check all";
      return cmd_check(ck_scale);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error (%s): %s\n", op.c_str(), e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error (%s): %s\n", op.c_str(), e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "numerical failure (%s): %s\n", op.c_str(), e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error (%s): %s\n", op.c_str(), e.what());
    return 2;
  }
  return 0;
}
