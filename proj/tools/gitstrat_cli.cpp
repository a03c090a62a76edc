#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "gitstrat/cli.hpp"

namespace cli = gitstrat::cli;
using cli::json;

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Overrides {
  std::optional<double> tol;
  std::optional<std::string> convention;
  std::optional<bool> emit_certificates;

  void apply(json& doc) const {
    if (!doc.is_object()) return;
    if (!doc.contains("options")) doc["options"] = json::object();
    if (!doc["options"].is_object()) return;
    if (tol) doc["options"]["tol"] = *tol;
    if (convention) doc["options"]["convention"] = *convention;
    if (emit_certificates) doc["options"]["emit_certificates"] = *emit_certificates;
  }
};

void emit(const json& report, const std::string& format) {
  if (format == "text")
    std::cout << cli::render_text(report);
  else
    std::cout << report.dump(2) << "\n";
}

void print_errors(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Torus GIT stability, Kempf-Ness minimization and stratification reports"};
  app.require_subcommand(1);

  std::string input = "-";
  std::string format = "json";
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input,-i", input, "Spec document path, '-' for stdin");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--tol", ov.tol, "Numerical tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--convention", ov.convention, "Grading sign convention")
        ->check(CLI::IsMember({"default", "flipped"}));
    sub->add_option("--emit-certificates", ov.emit_certificates, "Include stability certificates");
  };

  auto* validate = app.add_subcommand("validate", "Validate a spec document");
  add_common(validate);
  auto* run = app.add_subcommand("run", "Validate and run a spec document");
  add_common(run);
  auto* batch = app.add_subcommand("batch", "Run a JSON array of spec documents concurrently");
  add_common(batch);
  auto* check = app.add_subcommand("check-report", "Structurally validate a report document");
  check->add_option("--input,-i", input, "Report document path, '-' for stdin");

  std::string kind;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen", "Emit a seeded random spec document");
  gen->add_option("kind", kind, "Problem kind")->required()->check(CLI::IsMember(cli::kKinds));
  gen->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitRejected;
  }

  try {
    if (*gen) {
      std::cout << cli::generate(kind, seed).dump(2) << "\n";
      return cli::kExitOk;
    }
    const std::string text = read_input(input);
    if (*check) {
      const auto errors = cli::validate_report(json::parse(text));
      print_errors(errors);
      if (errors.empty()) std::cout << "report ok\n";
      return errors.empty() ? cli::kExitOk : cli::kExitRejected;
    }
    if (*batch) {
      json docs = json::parse(text);
      if (!docs.is_array()) {
        std::cerr << "error: batch input must be a JSON array of spec documents\n";
        return cli::kExitRejected;
      }
      std::vector<json> specs(docs.begin(), docs.end());
      for (auto& d : specs) ov.apply(d);
      json reports = json::array();
      int code = cli::kExitOk;
      for (auto& o : cli::run_batch(specs)) {
        reports.push_back(o.report);
        if (o.exit_code == cli::kExitInternal || code == cli::kExitOk) code = std::max(code, o.exit_code);
      }
      if (format == "text")
        for (const auto& r : reports) std::cout << cli::render_text(r) << "\n";
      else
        std::cout << reports.dump(2) << "\n";
      return code;
    }

    auto v = cli::validate_text(text);
    if (v.ok()) {
      // Re-validate with command-line overrides folded into the options block.
      json doc = json::parse(text);
      ov.apply(doc);
      v = cli::validate_document(doc);
    }
    if (!v.ok()) {
      print_errors(v.errors);
      return cli::kExitRejected;
    }
    if (*validate) {
      std::cout << "valid " << v.spec->kind << " spec\n";
      return cli::kExitOk;
    }
    const auto out = cli::run(*v.spec);
    emit(out.report, format);
    if (out.exit_code != cli::kExitOk) std::cerr << "error: " << out.report.value("error", "") << "\n";
    return out.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitRejected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInternal;
  }
}
