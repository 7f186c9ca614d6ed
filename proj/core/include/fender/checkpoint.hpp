#pragma once

#include <string>

#include "fender/models.hpp"
#include "fender/rankers.hpp"
#include "fender/synth.hpp"

namespace fender {

// JSON checkpoints: shape-tagged row-major arrays plus a config echo. Doubles
// survive the round trip exactly (shortest-representation printing).

std::string stage1_to_json(const Stage1Model& m);

void save_fender_checkpoint(const Stage2Model& m, const TrainConfig& cfg, const std::string& path);
Stage2Model load_fender_checkpoint(const std::string& path, TrainConfig* cfg_out = nullptr);

void save_mf_checkpoint(const MfRanker& m, const TrainConfig& cfg, const std::string& path);
MfRanker load_mf_checkpoint(const std::string& path, TrainConfig* cfg_out = nullptr);

// The parameter-free frequency baseline still gets a checkpoint file so the
// evaluation step can treat every model uniformly.
void save_pif_checkpoint(const std::string& path);

void save_ground_truth(const GroundTruth& gt, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

std::string train_config_to_json(const TrainConfig& cfg);

}  // namespace fender
