#pragma once

#include <CLI11.hpp>

namespace ctxrec::cli {

void add_generate(CLI::App& app);
void add_synth(CLI::App& app);
void add_train(CLI::App& app);
void add_eval(CLI::App& app);
void add_report(CLI::App& app);
void add_serve(CLI::App& app);

}  // namespace ctxrec::cli
