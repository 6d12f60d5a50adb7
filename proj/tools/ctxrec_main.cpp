#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ctxrec: context-aware recognition stimuli, model and analysis"};
  app.require_subcommand(1);
  ctxrec::cli::add_generate(app);
  ctxrec::cli::add_synth(app);
  ctxrec::cli::add_train(app);
  ctxrec::cli::add_eval(app);
  ctxrec::cli::add_report(app);
  ctxrec::cli::add_serve(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
