#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "conehull/certify.hpp"
#include "conehull/jsonio.hpp"
#include "conehull/orthant.hpp"
#include "conehull/relax.hpp"

namespace {

using conehull::Json;

constexpr const char* kVersion = "0.1.0";

// 0 affirmative, 1 negative, 2 undetermined, 64 malformed input or usage
constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitUndetermined = 2;
constexpr int kExitBadInput = 64;

struct Overrides {
  std::optional<int> order;
  std::optional<double> tol_eq, tol_psd;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_y;
};

void apply(const Overrides& o, conehull::ProblemOptions& opts) {
  if (o.order) opts.order = *o.order;
  if (o.tol_eq) opts.tol_eq = *o.tol_eq;
  if (o.tol_psd) opts.tol_psd = *o.tol_psd;
  if (o.seed) opts.seed = *o.seed;
  if (o.max_y) opts.max_y = *o.max_y;
}

Json envelope(const std::string& command, const std::string& path,
              const conehull::ProblemFile& p) {
  Json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["problem"] = path;
  j["problem_hash"] = conehull::hash_hex(conehull::problem_hash(p));
  j["order"] = p.options.order;
  Json s;
  s["tol_eq"] = p.options.tol_eq;
  s["tol_psd"] = p.options.tol_psd;
  s["seed"] = p.options.seed;
  s["max_y"] = p.options.max_y;
  j["settings"] = s;
  return j;
}

void emit(Json j, const std::string& out) {
  auto counters = conehull::solve_counters();
  Json t;
  t["solves"] = counters.solves;
  t["iterations"] = counters.iterations;
  j["timings"] = t;
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw conehull::Error("cannot write output file: " + out);
  f << j.dump(2) << "\n";
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

int from_decision(conehull::Decision d) {
  switch (d) {
    case conehull::Decision::member: return kExitYes;
    case conehull::Decision::not_member: return kExitNo;
    default: return kExitUndetermined;
  }
}

int from_outcome(conehull::CertOutcome o) {
  switch (o) {
    case conehull::CertOutcome::found: return kExitYes;
    case conehull::CertOutcome::not_found: return kExitNo;
    default: return kExitUndetermined;
  }
}

std::string csv_field(double v) {
  return std::isfinite(v) ? conehull::format_double(v) : std::string("inf");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semidefinite outer approximations of convex hulls of semialgebraic sets"};
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides ov;
  std::string out_path;
  app.add_option("--order", ov.order, "relaxation order, overrides the problem file");
  app.add_option("--tol-eq", ov.tol_eq, "equality residual tolerance");
  app.add_option("--tol-psd", ov.tol_psd, "PSD residual tolerance");
  app.add_option("--seed", ov.seed, "sampling seed");
  app.add_option("--max-y", ov.max_y, "override the moment-vector size guard");
  app.add_option("--out", out_path, "write the report here instead of stdout (trace: the CSV)");

  std::string file, aug_out, target_text;
  std::vector<double> point, direction;
  std::vector<std::string> pattern_text;
  int angles = 64;
  bool over_base = false;

  auto* member = app.add_subcommand("member", "test membership of a point in the outer hull");
  member->add_option("file", file, "problem file")->required();
  member->add_option("--at", point, "point coordinates")->required()->delimiter(',');

  auto* support = app.add_subcommand("support", "support value of the outer hull in a direction");
  support->add_option("file", file, "problem file")->required();
  support->add_option("--dir", direction, "direction coordinates")->required()->delimiter(',');

  auto* trace = app.add_subcommand("trace", "sweep support values over planar directions to CSV");
  trace->add_option("file", file, "problem file")->required();
  trace->add_option("--angles", angles, "number of directions")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify", "search a pointedness certificate for the lifted cone");
  certify->add_option("file", file, "problem file")->required();

  auto* closed = app.add_subcommand("check-closed", "screen the description for trouble at infinity");
  closed->add_option("file", file, "problem file")->required();

  auto* augment = app.add_subcommand("augment", "append the recommended bounding generator");
  augment->add_option("file", file, "problem file")->required();
  augment->add_option("out_file", aug_out, "augmented problem file to write")->required();

  auto* split = app.add_subcommand("split-member", "membership in the hull of an orthant-split union");
  split->add_option("file", file, "problem file")->required();
  split->add_option("--at", point, "point coordinates")->required()->delimiter(',');
  split->add_option("--patterns", pattern_text, "orthant sign patterns, e.g. 00,10")->delimiter(',');

  auto* sos = app.add_subcommand("sos-member", "certify a polynomial in the truncated quadratic module");
  sos->add_option("file", file, "problem file")->required();
  sos->add_option("--target", target_text, "polynomial to certify")->required();
  sos->add_flag("--base", over_base, "certify over the raw generators, not the homogenized cone");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    conehull::ProblemFile prob = conehull::load_problem(file);
    apply(ov, prob.options);
    const conehull::SolverSettings settings = conehull::settings_from(prob.options);
    const int k = prob.options.order;
    const std::size_t n = prob.set.nvars();
    conehull::reset_solve_counters();

    if (*member) {
      if (point.size() != n) throw conehull::Error("--at expects " + std::to_string(n) + " coordinates");
      auto h = conehull::homogenize_system(prob.set);
      auto v = conehull::is_member(h, k, to_vector(point), settings);
      Json j = envelope("member", file, prob);
      j["point"] = point;
      j["result"] = conehull::verdict_json(v);
      emit(j, out_path);
      return from_decision(v.decision);
    }

    if (*support) {
      if (direction.size() != n) throw conehull::Error("--dir expects " + std::to_string(n) + " coordinates");
      auto h = conehull::homogenize_system(prob.set);
      auto r = conehull::support_value(h, k, to_vector(direction), settings);
      Json j = envelope("support", file, prob);
      j["result"] = conehull::support_json(r);
      emit(j, out_path);
      if (r.status == conehull::SupportResult::Status::ok) return kExitYes;
      return r.status == conehull::SupportResult::Status::unbounded ? kExitNo : kExitUndetermined;
    }

    if (*trace) {
      if (n != 2) throw conehull::Error("trace needs a two-variable problem");
      if (out_path.empty()) throw conehull::Error("trace needs --out for the CSV file");
      auto h = conehull::homogenize_system(prob.set);
      auto rows = conehull::trace_support_2d(h, k, angles, settings);
      std::ofstream csv(out_path);
      if (!csv) throw conehull::Error("cannot write output file: " + out_path);
      csv << "theta,value,px,py,status\n";
      for (const auto& [theta, r] : rows) {
        csv << conehull::format_double(theta) << "," << csv_field(r.value) << ",";
        if (r.maximizer_proxy.size() == 2)
          csv << conehull::format_double(r.maximizer_proxy[0]) << ","
              << conehull::format_double(r.maximizer_proxy[1]);
        else
          csv << ",";
        csv << "," << to_string(r.status) << "\n";
      }
      if (!csv) throw conehull::Error("cannot write output file: " + out_path);
      Json j = envelope("trace", file, prob);
      j["result"] = Json{{"csv", out_path}, {"rows", rows.size()}};
      emit(j, "");
      return kExitYes;
    }

    if (*certify) {
      auto h = conehull::homogenize_system(prob.set);
      auto c = conehull::pointedness_certificate(h, k, settings);
      Json j = envelope("certify", file, prob);
      j["result"] = conehull::pointedness_json(c);
      emit(j, out_path);
      return from_outcome(c.outcome);
    }

    if (*closed) {
      auto h = conehull::homogenize_system(prob.set);
      auto r = conehull::closedness_report(prob.set, h, k, settings);
      Json j = envelope("check-closed", file, prob);
      j["result"] = conehull::closedness_json(r);
      emit(j, out_path);
      if (!r.structural_obstruction) return kExitYes;
      return r.recommendation ? kExitNo : kExitUndetermined;
    }

    if (*augment) {
      auto h = conehull::homogenize_system(prob.set);
      auto r = conehull::closedness_report(prob.set, h, k, settings);
      Json j = envelope("augment", file, prob);
      j["result"] = conehull::closedness_json(r);
      if (!r.recommendation) {
        j["written"] = nullptr;
        emit(j, out_path);
        return kExitNo;
      }
      if (prob.options.box.empty())
        throw conehull::Error("augment needs a sampling box in the problem options");
      conehull::ProblemFile next = prob;
      next.set = conehull::augment_generators(prob.set, *r.recommendation, prob.options.box, 500,
                                              prob.options.seed);
      next.comment = "generator \"" + r.recommendation->to_string() +
                     "\" appended by check-closed; redundant on the set, validated on samples";
      conehull::save_problem(next, aug_out);
      j["written"] = aug_out;
      emit(j, out_path);
      return kExitYes;
    }

    if (*split) {
      if (point.size() != n) throw conehull::Error("--at expects " + std::to_string(n) + " coordinates");
      std::optional<std::vector<conehull::OrthantPattern>> patterns;
      if (!pattern_text.empty()) {
        patterns.emplace();
        for (const auto& t : pattern_text) {
          if (t.size() != n) throw conehull::Error("pattern \"" + t + "\" needs one bit per variable");
          conehull::OrthantPattern pat;
          for (char c : t) {
            if (c != '0' && c != '1') throw conehull::Error("pattern \"" + t + "\" must use bits 0/1");
            pat.e.push_back(c - '0');
          }
          patterns->push_back(std::move(pat));
        }
      }
      auto pieces = conehull::split_orthants(prob.set, patterns);
      std::vector<conehull::HomogenizedSystem> systems;
      Json pats = Json::array();
      for (const auto& [pat, piece] : pieces) {
        systems.push_back(conehull::homogenize_system(piece));
        std::string bits;
        for (int b : pat.e) bits += static_cast<char>('0' + b);
        pats.push_back(bits);
      }
      auto v = conehull::union_hull_membership(systems, k, to_vector(point), settings);
      v.over_approximation_possible = !conehull::union_stabilized(systems, k, settings);
      Json j = envelope("split-member", file, prob);
      j["point"] = point;
      j["patterns"] = pats;
      j["result"] = conehull::union_verdict_json(v);
      emit(j, out_path);
      return from_decision(v.decision);
    }

    if (*sos) {
      Json j = envelope("sos-member", file, prob);
      conehull::QModuleCertificate c;
      if (over_base) {
        auto f = conehull::Polynomial::parse(target_text, prob.set.vars);
        c = conehull::qmodule_membership(f, prob.set, k, settings);
      } else {
        auto h = conehull::homogenize_system(prob.set);
        auto f = conehull::Polynomial::parse(target_text, h.vars);
        c = conehull::qmodule_membership(f, h, k, settings);
      }
      j["result"] = conehull::certificate_json(c);
      emit(j, out_path);
      return from_outcome(c.outcome);
    }
  } catch (const conehull::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
