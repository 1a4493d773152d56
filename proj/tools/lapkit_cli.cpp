// SPDX-License-Identifier: Apache-2.0
// lapkit: configuration-driven front end over the shared library.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lapkit/lapkit.h"

namespace
{

int report_error(const char *what)
{
  std::cerr << "error: " << what << ": " << lapkit_last_error() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Limiting absorption experiments for magnetic Schrodinger operators"};
  app.set_version_flag("--version", lapkit_version());
  app.require_subcommand(1);

  std::string config_path, out_dir = "";
  std::vector<std::string> overrides;
  for (std::size_t i = 0; i < lapkit_command_count(); i++)
  {
    auto *sub = app.add_subcommand(lapkit_command_name(i));
    sub->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: report.out)");
    sub->add_option("--override", overrides, "section.key=value, repeatable");
  }
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    // help and version exit 0; every usage error maps to 1
    return app.exit(e) == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  lapkit_config *cfg = nullptr;
  const lapkit_status st =
      config_path.empty() ? lapkit_config_parse("", &cfg) : lapkit_config_load(config_path.c_str(), &cfg);
  if (st != LAPKIT_OK)
    return report_error("configuration");
  for (const auto &o : overrides)
    if (lapkit_config_override(cfg, o.c_str()) != LAPKIT_OK)
    {
      lapkit_config_free(cfg);
      return report_error("override");
    }
  if (out_dir.empty())
  {
    size_t n = 0;
    lapkit_config_get(cfg, "report.out", nullptr, 0, &n);
    std::string buf(n, '\0');
    lapkit_config_get(cfg, "report.out", buf.data(), n, &n);
    out_dir = buf.c_str();
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string log_path = (std::filesystem::path(out_dir) / "run.log").string();
  int code = 1;
  if (lapkit_run(command.c_str(), cfg, out_dir.c_str(), log_path.c_str(), &code) != LAPKIT_OK)
  {
    lapkit_config_free(cfg);
    return report_error(command.c_str());
  }
  lapkit_config_free(cfg);
  std::ifstream log(log_path);
  std::cout << log.rdbuf();
  std::cout.flush();
  return code;
}
