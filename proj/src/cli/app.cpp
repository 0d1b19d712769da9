#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dataclaw/cli/commands.hpp"

namespace dataclaw::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void route_logs_to_stderr(bool verbose) {
  spdlog::drop("dataclaw");
  auto logger = spdlog::stderr_color_mt("dataclaw");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dataclaw: local data-agent runtime"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string init_path = ".";
  auto* init = app.add_subcommand("init", "Create a workspace");
  init->add_option("path", init_path, "Workspace root")->envname("DATACLAW_WORKSPACE");

  ServeOptions serve_opts;
  std::string serve_ws = ".";
  auto* serve = app.add_subcommand("serve", "Run the gateway and agent service");
  serve->add_option("-w,--workspace", serve_ws, "Workspace root")->envname("DATACLAW_WORKSPACE");
  serve->add_option("--bind", serve_opts.bind, "host:port to listen on")->envname("DATACLAW_BIND");
  serve->add_option("--backend", serve_opts.backend, "Backend kind (scripted, remote)");
  serve->add_option("--script", serve_opts.script, "JSON script for the scripted backend");

  AskOptions ask_opts;
  std::string ask_ws = ".";
  auto* ask = app.add_subcommand("ask", "Run one turn and print the answer");
  ask->add_option("-w,--workspace", ask_ws, "Workspace root")->envname("DATACLAW_WORKSPACE");
  ask->add_option("--script", ask_opts.script, "JSON script for the scripted backend");
  ask->add_option("--session", ask_opts.session, "Named session to continue");
  ask->add_option("text", ask_opts.text, "Request text")->required();

  std::string replay_path;
  std::string level = "full_trace";
  auto* replay = app.add_subcommand("replay", "Render a session transcript");
  replay->add_option("transcript", replay_path, "transcript.jsonl path")->required();
  replay->add_option("--verbosity", level, "final_only, progress or full_trace")
      ->check(CLI::IsMember({"final_only", "progress", "full_trace"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }
  route_logs_to_stderr(verbose || serve->parsed());

  if (init->parsed()) return cmd_init(init_path, out, err);
  if (serve->parsed()) {
    serve_opts.workspace = serve_ws;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    return cmd_serve(serve_opts, g_stop, out, err);
  }
  if (ask->parsed()) {
    ask_opts.workspace = ask_ws;
    return cmd_ask(ask_opts, out, err);
  }
  return cmd_replay(replay_path, verbosity_from_string(level), out, err);
}

}  // namespace dataclaw::cli
