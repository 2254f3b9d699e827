// Command-line front end: parse, model, layout, eval and serve.

#include "kbviz/service.hpp"
#include "kbviz/workspace.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

namespace {

std::optional<std::string> opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inspect, lay out and score an ASP visualization knowledge base"};
  app.require_subcommand(1);
  int status = 0;

  std::string parse_kb, parse_out;
  auto* parse = app.add_subcommand("parse", "Write the AST of a knowledge base as JSON");
  parse->add_option("kb", parse_kb, "Knowledge base (.lp)")->required();
  parse->add_option("-o,--output", parse_out, "Output file (default: stdout)");
  parse->callback([&] { status = kbviz::cmd_parse(parse_kb, opt(parse_out), std::cout, std::cerr); });

  std::string model_kb, model_weights, model_out;
  auto* model = app.add_subcommand("model", "Extract constraints, weights and hierarchy");
  model->add_option("kb", model_kb, "Knowledge base (.lp)")->required();
  model->add_option("-w,--weights", model_weights, "Weights file with #const <id>_weight = N. declarations");
  model->add_option("-o,--output", model_out, "Output file (default: stdout)");
  model->callback([&] {
    status = kbviz::cmd_model(model_kb, opt(model_weights), opt(model_out), std::cout, std::cerr);
  });

  std::string layout_model, layout_type = "soft", layout_features = "predicates,variables", layout_format = "json",
                            layout_out;
  std::size_t layout_min_degree = 2;
  auto* layout = app.add_subcommand("layout", "Compute the radial layout of one constraint kind");
  layout->add_option("model", layout_model, "Model JSON written by 'kbviz model'")->required();
  layout->add_option("--type", layout_type, "Constraint kind")->check(CLI::IsMember({"soft", "hard"}));
  layout->add_option("--features", layout_features, "Feature kinds: predicates, variables or both");
  layout->add_option("--min-degree", layout_min_degree, "Minimum constraints per feature node")
      ->check(CLI::PositiveNumber);
  layout->add_option("--out", layout_format, "Output format")->check(CLI::IsMember({"json", "svg"}));
  layout->add_option("-o,--output", layout_out, "Output file (default: stdout)");
  layout->callback([&] {
    kbviz::ViewParams params;
    try {
      params = kbviz::ViewParams::parse(layout_type, layout_features, std::to_string(layout_min_degree));
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = kbviz::kExitInvalid;
      return;
    }
    auto format = layout_format == "svg" ? kbviz::LayoutFormat::Svg : kbviz::LayoutFormat::Json;
    status = kbviz::cmd_layout(layout_model, params, format, opt(layout_out), std::cout, std::cerr);
  });

  std::string eval_model, eval_specs, eval_out;
  auto* eval = app.add_subcommand("eval", "Score every <name>.lp spec in a directory and rank them");
  eval->add_option("model", eval_model, "Model JSON written by 'kbviz model'")->required();
  eval->add_option("specs", eval_specs, "Directory of fact files")->required();
  eval->add_option("-o,--output", eval_out, "Output file (default: stdout)");
  eval->callback([&] { status = kbviz::cmd_eval(eval_model, eval_specs, opt(eval_out), std::cout, std::cerr); });

  std::string serve_model, serve_kb, serve_weights, serve_specs, serve_host = "127.0.0.1";
  int serve_port = kbviz::default_port();
  auto* serve = app.add_subcommand("serve", "Serve the workspace over HTTP");
  auto* model_opt = serve->add_option("--model", serve_model, "Model JSON written by 'kbviz model'");
  auto* kb_opt = serve->add_option("--kb", serve_kb, "Knowledge base (.lp), instead of --model");
  model_opt->excludes(kb_opt);
  serve->add_option("--weights", serve_weights, "Weights file (with --kb)")->needs(kb_opt);
  serve->add_option("--specs", serve_specs, "Directory of fact files to pre-evaluate");
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (default: $KBVIZ_PORT or 8080)")->check(CLI::Range(1, 65535));
  serve->callback([&] {
    if (serve_model.empty() && serve_kb.empty()) {
      std::cerr << "error: one of --model or --kb is required\n";
      status = kbviz::kExitInvalid;
      return;
    }
    try {
      std::optional<std::filesystem::path> specs;
      if (!serve_specs.empty()) specs = serve_specs;
      auto ws = serve_kb.empty()
                    ? kbviz::Workspace::from_model(serve_model, specs)
                    : kbviz::Workspace::from_sources(
                          serve_kb, serve_weights.empty() ? std::nullopt : std::optional<std::filesystem::path>(serve_weights),
                          specs);
      httplib::Server server;
      kbviz::install_routes(server, ws);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on http://" << serve_host << ":" << serve_port << "\n";
      if (!server.listen(serve_host, serve_port)) {
        std::cerr << "error: cannot listen on " << serve_host << ":" << serve_port << "\n";
        status = kbviz::kExitIo;
      }
      g_server = nullptr;
    } catch (const kbviz::IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = kbviz::kExitIo;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      status = kbviz::kExitInvalid;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kbviz::kExitInvalid;
  }
  return status;
}
