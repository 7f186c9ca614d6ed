#pragma once

#include "run_config.hpp"

namespace fender::cli {

int cmd_gen(const RunConfig& rc);
int cmd_pilot(const RunConfig& rc);
int cmd_train(const RunConfig& rc);
int cmd_eval(const RunConfig& rc);
int cmd_robust(const RunConfig& rc);
int cmd_casestudy(const RunConfig& rc);
int cmd_loop(const RunConfig& rc);

}  // namespace fender::cli
